#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace critmet::numerics {

// ln(2 cosh x) without overflow: |x| + ln(1 + e^{-2|x|}).
double ln_2cosh(double x) noexcept;

// coth(x) - 1 for x > 0; series below 1e-6.
double coth_minus_one(double x) noexcept;

struct RootResult {
  double x = 0.0;
  int iterations = 0;
};

// Bisection on a bracket with f(lo) <= 0 <= f(hi) (either orientation is
// accepted). Runs until the midpoint is no longer representable between the
// endpoints or max_iter is hit. Throws NonConvergence if the bracket does
// not straddle a sign change.
RootResult bisect(const std::function<double(double)>& f, double lo, double hi,
                  int max_iter = 200);

struct Extremum {
  double x = 0.0;
  double fx = 0.0;
};

// Golden-section search for a maximum of a unimodal f on [a, b]; stops when
// the bracket width falls below rel_tol * max(|x|, scale_floor).
Extremum golden_section_maximize(const std::function<double(double)>& f, double a, double b,
                                 double rel_tol = 1e-8, double scale_floor = 1e-300,
                                 int max_iter = 500);

// Vector-valued integrand: writes `components` values for abscissa z.
using VectorIntegrand = std::function<void(double z, std::span<double> out)>;

struct QuadratureOptions {
  double rel_tol = 1e-10;
  int panels_per_interval = 16;
  int max_depth = 48;
  std::size_t max_segments = 500000;
};

// Adaptive Simpson with Richardson correction over consecutive breakpoint
// intervals. The error target for component k is rel_tol times a coarse
// estimate of the integral of |f_k|. Throws QuadratureFailure when the
// segment cap or depth limit is exceeded.
std::vector<double> adaptive_simpson(const VectorIntegrand& f, std::size_t components,
                                     std::span<const double> breakpoints,
                                     const QuadratureOptions& options = {});

// Worker count for data-parallel scans: CRITMET_THREADS if set and positive,
// otherwise hardware concurrency.
unsigned worker_count() noexcept;

// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
// written by exactly one worker, so results assembled by index are
// independent of scheduling. If any index throws, the exception from the
// lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace critmet::numerics
