#include "critmet/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "critmet/error.hpp"

namespace critmet::numerics {

double ln_2cosh(double x) noexcept {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax));
}

double coth_minus_one(double x) noexcept {
  if (x < 1e-6) {
    const double x3 = x * x * x;
    return 1.0 / x - 1.0 + x / 3.0 - x3 / 45.0;
  }
  return 2.0 / std::expm1(2.0 * x);
}

RootResult bisect(const std::function<double(double)>& f, double lo, double hi, int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return {lo, 0};
  if (fhi == 0.0) return {hi, 0};
  if ((flo < 0.0) == (fhi < 0.0)) {
    throw Error(Errc::NonConvergence, "bisection bracket does not straddle a sign change");
  }
  // Orient so that f(lo) < 0 < f(hi).
  if (flo > 0.0) std::swap(lo, hi);
  for (int it = 1; it <= max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) return {mid, it};
    const double fm = f(mid);
    if (fm == 0.0) return {mid, it};
    if (fm < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), max_iter};
}

Extremum golden_section_maximize(const std::function<double(double)>& f, double a, double b,
                                 double rel_tol, double scale_floor, int max_iter) {
  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  if (b < a) std::swap(a, b);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter; ++it) {
    const double scale = std::max({std::abs(c), std::abs(d), scale_floor});
    if (b - a <= rel_tol * scale) break;
    // Ties go left so that equal plateaus resolve toward smaller x.
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? Extremum{c, fc} : Extremum{d, fd};
}

namespace {

struct SimpsonState {
  const VectorIntegrand& f;
  std::size_t k;
  const QuadratureOptions& opt;
  std::size_t segments = 0;
};

void simpson_panel(const std::vector<double>& fa, const std::vector<double>& fm,
                   const std::vector<double>& fb, double h, std::vector<double>& out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = h / 6.0 * (fa[i] + 4.0 * fm[i] + fb[i]);
}

void refine(SimpsonState& st, double a, double b, const std::vector<double>& fa,
            const std::vector<double>& fm, const std::vector<double>& fb,
            const std::vector<double>& whole, const std::vector<double>& tol, int depth,
            std::vector<double>& acc) {
  if (++st.segments > st.opt.max_segments) {
    throw Error(Errc::QuadratureFailure, "adaptive Simpson exceeded its segment cap");
  }
  const double m = 0.5 * (a + b);
  std::vector<double> flm(st.k), frm(st.k), left(st.k), right(st.k);
  st.f(0.5 * (a + m), flm);
  st.f(0.5 * (m + b), frm);
  simpson_panel(fa, flm, fm, m - a, left);
  simpson_panel(fm, frm, fb, b - m, right);

  bool converged = true;
  for (std::size_t i = 0; i < st.k; ++i) {
    if (std::abs(left[i] + right[i] - whole[i]) > 15.0 * tol[i]) {
      converged = false;
      break;
    }
  }
  if (converged) {
    for (std::size_t i = 0; i < st.k; ++i) {
      const double two = left[i] + right[i];
      acc[i] += two + (two - whole[i]) / 15.0;
    }
    return;
  }
  if (depth >= st.opt.max_depth) {
    throw Error(Errc::QuadratureFailure, "adaptive Simpson exceeded its depth limit");
  }
  std::vector<double> half_tol(tol);
  for (double& t : half_tol) t *= 0.5;
  refine(st, a, m, fa, flm, fm, left, half_tol, depth + 1, acc);
  refine(st, m, b, fm, frm, fb, right, half_tol, depth + 1, acc);
}

}  // namespace

std::vector<double> adaptive_simpson(const VectorIntegrand& f, std::size_t components,
                                     std::span<const double> breakpoints,
                                     const QuadratureOptions& options) {
  std::vector<double> acc(components, 0.0);
  if (breakpoints.size() < 2) return acc;

  struct Panel {
    double a, b;
    std::vector<double> fa, fm, fb, whole;
  };
  std::vector<Panel> panels;
  const int per = std::max(1, options.panels_per_interval);
  for (std::size_t j = 0; j + 1 < breakpoints.size(); ++j) {
    const double lo = breakpoints[j];
    const double hi = breakpoints[j + 1];
    if (!(hi > lo)) continue;
    std::vector<double> prev(components);
    f(lo, prev);
    for (int p = 0; p < per; ++p) {
      const double a = lo + (hi - lo) * p / per;
      const double b = (p + 1 == per) ? hi : lo + (hi - lo) * (p + 1) / per;
      Panel panel{a, b, prev, std::vector<double>(components), std::vector<double>(components),
                  std::vector<double>(components)};
      f(0.5 * (a + b), panel.fm);
      f(b, panel.fb);
      simpson_panel(panel.fa, panel.fm, panel.fb, b - a, panel.whole);
      prev = panel.fb;
      panels.push_back(std::move(panel));
    }
  }
  if (panels.empty()) return acc;

  std::vector<double> scale(components, 0.0);
  for (const auto& p : panels) {
    for (std::size_t i = 0; i < components; ++i) {
      scale[i] += (p.b - p.a) / 6.0 *
                  (std::abs(p.fa[i]) + 4.0 * std::abs(p.fm[i]) + std::abs(p.fb[i]));
    }
  }
  const double total = panels.back().b - panels.front().a;

  SimpsonState st{f, components, options};
  std::vector<double> tol(components);
  for (const auto& p : panels) {
    const double frac = (p.b - p.a) / total;
    for (std::size_t i = 0; i < components; ++i) {
      tol[i] = std::max(options.rel_tol * scale[i] * frac, 1e-300);
    }
    refine(st, p.a, p.b, p.fa, p.fm, p.fb, p.whole, tol, 0, acc);
  }
  return acc;
}

unsigned worker_count() noexcept {
  if (const char* env = std::getenv("CRITMET_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::size_t failure_index = n;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (i < failure_index) {
              failure_index = i;
              failure = std::current_exception();
            }
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace critmet::numerics
