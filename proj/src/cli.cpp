#include "critmet/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <tuple>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "critmet/error.hpp"
#include "critmet/fisher.hpp"
#include "critmet/numerics.hpp"
#include "critmet/svg_plot.hpp"

namespace critmet::cli {

std::string_view to_string(Command c) noexcept {
  switch (c) {
    case Command::Thermo: return "thermo";
    case Command::FiDynamics: return "fi-dynamics";
    case Command::FiScan: return "fi-scan";
    case Command::Scaling: return "scaling";
    case Command::Multiparam: return "multiparam";
  }
  return "unknown";
}

namespace {

std::string num(double v) { return fmt::format("{:.10g}", v); }

void config_error(const std::string& what) { throw Error(Errc::ConfigError, what); }

bool has_raw(const RunConfig& c) { return c.omega_q || c.g_qc || c.delta_q; }

}  // namespace

DickeParams RunConfig::dicke() const {
  DickeParams p;
  p.epsilon = epsilon;
  p.g = g;
  p.omega = omega.value_or(4.0 * std::tanh(0.5 * epsilon) * g * g / epsilon);
  p.n_atoms = n_atoms;
  p.beta = 1.0;
  if (p.superradiant_capable()) p.beta = critical_beta(p);
  return p;
}

ProbeParams RunConfig::probe() const {
  if (has_raw(*this)) return effective_probe_params(*omega_q, *g_qc, *delta_q, dicke().omega);
  ProbeParams pp;
  pp.omega_s = omega_s.value_or(1.5);
  pp.lambda = lambda.value_or(command == Command::Scaling ? 1e-3 : 0.1);
  return pp;
}

std::vector<double> RunConfig::beta_grid() const {
  return linspace(beta_min, beta_max, beta_points);
}

void RunConfig::validate() const {
  if (!(epsilon > 0.0) || !(g > 0.0)) config_error("epsilon and g must be positive");
  if (omega && !(*omega > 0.0)) config_error("omega must be positive");
  if (n_atoms < 1) config_error("n_atoms must be >= 1");
  const DickeParams p = dicke();
  if (!p.superradiant_capable()) {
    config_error(fmt::format("coupling too weak for a transition: eps*omega/(4g^2) = {} >= 1",
                             p.coupling_ratio()));
  }
  if (has_raw(*this)) {
    if (!(omega_q && g_qc && delta_q)) config_error("omega_q, g_qc and delta_q go together");
    if (omega_s || lambda) config_error("give either omega_s/lambda or the raw precursors");
    if (!(*delta_q > 0.0)) config_error("delta_q must be positive");
    if (!(*omega_q > 0.0) || !(*g_qc >= 0.0)) config_error("omega_q > 0 and g_qc >= 0 required");
  }
  if (omega_s && !(*omega_s > 0.0)) config_error("omega_s must be positive");
  if (lambda && !(*lambda > 0.0)) config_error("lambda must be positive");
  const ProbeParams pp = probe();
  if (!(pp.omega_s > 0.0) || !(pp.lambda > 0.0)) {
    config_error("derived probe needs omega_s > 0 and lambda > 0");
  }
  if (!(beta_min > 0.0) || !(beta_max > beta_min)) config_error("need 0 < beta_min < beta_max");
  if (beta_points < 2) config_error("beta_points must be >= 2");
  if (beta_ratio && !(*beta_ratio > 0.0)) config_error("beta_ratio must be positive");
  if (t_max && !(*t_max > 0.0)) config_error("t_max must be positive");
  if (t_points < 2) config_error("t_points must be >= 2");
  if (time_grid < 3) config_error("time_grid must be >= 3");
  if (n_probes.empty()) config_error("n_probes must not be empty");
  for (int n : n_probes) {
    if (n < 1 || n > 62) config_error("n_probes entries must be in [1, 62]");
  }
  if (command == Command::Scaling && n_probes.size() < 4) {
    config_error("scaling needs at least 4 probe numbers");
  }
  if (!(w >= 0.0 && w <= 1.0)) config_error("w must be in [0, 1]");
  if (!(normal_window.lo < normal_window.hi) ||
      !(superradiant_window.lo < superradiant_window.hi)) {
    config_error("fit windows need lo < hi");
  }
}

std::vector<std::pair<std::string, std::string>> RunConfig::resolved() const {
  const DickeParams p = dicke();
  const ProbeParams pp = probe();
  std::vector<std::pair<std::string, std::string>> kv{
      {"command", std::string(to_string(command))},
      {"epsilon", num(p.epsilon)},
      {"g", num(p.g)},
      {"omega", num(p.omega)},
      {"n_atoms", std::to_string(p.n_atoms)},
      {"beta_c", num(p.beta)},
      {"omega_s", num(pp.omega_s)},
      {"lambda", num(pp.lambda)},
  };
  if (pp.raw) {
    kv.emplace_back("omega_q", num(pp.raw->omega_q));
    kv.emplace_back("g_qc", num(pp.raw->g_qc));
    kv.emplace_back("delta_q", num(pp.raw->delta_q));
    kv.emplace_back("chi", num(pp.raw->chi));
  }
  kv.emplace_back("method", std::string(to_string(method)));
  kv.emplace_back("beta_min", num(beta_min));
  kv.emplace_back("beta_max", num(beta_max));
  kv.emplace_back("beta_points", std::to_string(beta_points));
  kv.emplace_back("beta_ratio", beta_ratio ? num(*beta_ratio) : "none");
  kv.emplace_back("t_max", t_max ? num(*t_max) : "auto");
  kv.emplace_back("t_points", std::to_string(t_points));
  kv.emplace_back("time_grid", std::to_string(time_grid));
  std::string list;
  for (std::size_t i = 0; i < n_probes.size(); ++i) {
    list += (i ? "," : "") + std::to_string(n_probes[i]);
  }
  kv.emplace_back("n_probes", list);
  kv.emplace_back("w", num(w));
  kv.emplace_back("normal_window", num(normal_window.lo) + "," + num(normal_window.hi));
  kv.emplace_back("superradiant_window",
                  num(superradiant_window.lo) + "," + num(superradiant_window.hi));
  return kv;
}

std::string Table::render() const {
  std::string out;
  for (const auto& line : preamble) out += line + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      if (const double* d = std::get_if<double>(&row[i])) {
        out += num(*d);
      } else {
        out += std::get<std::string>(row[i]);
      }
    }
    out += "\n";
  }
  for (const auto& line : summary) out += line + "\n";
  return out;
}

std::vector<double> Table::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error(Errc::InvalidParams, "no column " + std::string(name));
  const std::size_t k = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& row : rows) {
    const double* d = std::get_if<double>(&row[k]);
    v.push_back(d ? *d : std::numeric_limits<double>::quiet_NaN());
  }
  return v;
}

namespace {

Table start_table(const RunConfig& cfg, std::string stem) {
  Table t;
  t.stem = std::move(stem);
  t.preamble.push_back(fmt::format("# critmet {}", to_string(cfg.command)));
  for (const auto& [k, v] : cfg.resolved()) t.preamble.push_back(fmt::format("# {} = {}", k, v));
  if (cfg.command == Command::Thermo) {
    t.preamble.push_back("# units: energies in units of epsilon, beta_ratio = beta/beta_c");
  } else {
    const ProbeParams pp = cfg.probe();
    t.preamble.push_back("# units: Fisher information in 1/g^2 (energies in units of epsilon), "
                         "one repetition");
    if (pp.weak_coupling_warning()) {
      t.preamble.push_back("# warning: lambda/omega_s > 0.2, outside the weak-coupling regime");
    }
    if (pp.dispersive_warning()) {
      t.preamble.push_back("# warning: chi > 0.2 or delta_q/g_qc < 5, dispersive limit violated");
    }
  }
  return t;
}

std::string ratio_tag(double r) { return fmt::format("{:.4g}", r); }

std::string fit_line(std::string_view curve, const std::vector<double>& x,
                     const std::vector<double>& f, Phase branch, FitWindow window) {
  const std::string_view name = branch == Phase::Normal ? "mu" : "nu";
  const std::string_view label = branch == Phase::Normal ? "normal" : "superradiant";
  try {
    const PowerLawFit fit = fit_power_law(x, f, branch, window);
    return fmt::format(
        "# fit {} {} {} = {} slope = {} log_prefactor = {} window = [{}, {}] points = {} "
        "rms_residual = {}",
        curve, label, name, num(fit.exponent), num(fit.slope), num(fit.log_prefactor),
        num(window.lo), num(window.hi), fit.points, num(fit.rms_residual));
  } catch (const Error& e) {
    if (e.code() != Errc::InsufficientPoints) throw;
    return fmt::format("# fit {} {} {} unavailable window = [{}, {}]: {}", curve, label, name,
                       num(window.lo), num(window.hi), e.what());
  }
}

}  // namespace

std::vector<Table> cmd_thermo(const RunConfig& cfg) {
  cfg.validate();
  const DickeParams base = cfg.dicke();
  const std::vector<double> grid = cfg.beta_grid();
  struct Row {
    double z0, jz, n, n2;
    MomentMethod method;
  };
  std::vector<Row> rows(grid.size());
  numerics::parallel_for(grid.size(), [&](std::size_t i) {
    const DickeParams p = base.with_beta(grid[i] * base.beta);
    const MomentMethod method = resolve_method(cfg.method, grid[i], false);
    Row& r = rows[i];
    r.z0 = solve_order_parameter(p).z0;
    r.jz = order_parameter_jz(p);
    r.method = method;
    if (method == MomentMethod::Quadrature) {
      r.n = photon_moment_quadrature(p, 1);
      r.n2 = photon_moment_quadrature(p, 2);
    } else {
      r.n = photon_moment_closed(p, 1);
      r.n2 = photon_moment_closed(p, 2);
    }
  });
  Table t = start_table(cfg, "thermo");
  t.preamble.push_back("# z0 and j_z are saddle-point values; n_mean, n2_mean follow the method");
  t.columns = {"beta_ratio", "z0", "j_z", "n_mean", "n2_mean", "method"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t.rows.push_back({grid[i], rows[i].z0, rows[i].jz, rows[i].n, rows[i].n2,
                      std::string(to_string(rows[i].method))});
  }
  return {t};
}

std::vector<Table> cmd_fi_dynamics(const RunConfig& cfg) {
  cfg.validate();
  const DickeParams base = cfg.dicke();
  const ProbeParams pp = cfg.probe();
  const std::vector<double> ratios =
      cfg.beta_ratio ? std::vector<double>{*cfg.beta_ratio}
                     : std::vector<double>{0.5, 0.95, 1.05, 1.5};
  std::vector<Table> out;
  for (double ratio : ratios) {
    const PhotonMoments m = moments_at(base, ratio, cfg.method, true);
    const double t_max = cfg.t_max.value_or(default_t_max(pp, m));
    Table t = start_table(cfg, cfg.beta_ratio ? "fi_dynamics"
                                              : "fi_dynamics_beta" + ratio_tag(ratio));
    t.preamble.push_back(fmt::format("# beta_ratio = {}", num(ratio)));
    t.preamble.push_back(fmt::format("# moment_method = {}", to_string(m.method)));
    t.preamble.push_back(fmt::format("# t_rows = [0, {}] in {} points", num(t_max), cfg.t_points));
    t.columns = {"t", "f_classical", "f_quantum"};
    for (double time : linspace(0.0, t_max, cfg.t_points)) {
      const FisherRecord r = fisher_record(pp, m, time);
      t.rows.push_back({r.t, r.f_classical, r.f_quantum});
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Table> cmd_fi_scan(const RunConfig& cfg) {
  cfg.validate();
  const std::vector<double> grid = cfg.beta_grid();
  const ScanTarget targets[] = {ScanTarget::ClassicalG, ScanTarget::QuantumG};
  const ScanResult scan =
      beta_scan(cfg.dicke(), cfg.probe(), grid, targets, {cfg.method, cfg.time_grid});
  const ScanCurve& fc = scan.curve(ScanTarget::ClassicalG);
  const ScanCurve& fq = scan.curve(ScanTarget::QuantumG);

  Table t = start_table(cfg, "fi_scan");
  t.preamble.push_back("# t_opt is the optimal encoding time of the quantum FI");
  t.columns = {"beta_ratio", "t_opt", "f_max_classical", "f_max_quantum"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t.rows.push_back({grid[i], fq.t_opt[i], fc.f_max[i], fq.f_max[i]});
  }
  t.summary.push_back(fmt::format("# peak classical beta_ratio = {}", num(grid[fc.argmax_index()])));
  t.summary.push_back(fmt::format("# peak quantum beta_ratio = {}", num(grid[fq.argmax_index()])));
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (fq.f_max[i] > 0.0) {
      lo = std::min(lo, fc.f_max[i] / fq.f_max[i]);
      hi = std::max(hi, fc.f_max[i] / fq.f_max[i]);
    }
  }
  if (hi > 0.0) {
    t.summary.push_back(
        fmt::format("# ratio f_max_classical/f_max_quantum min = {} max = {}", num(lo), num(hi)));
  }
  for (const auto* c : {&fc, &fq}) {
    const std::string_view name = c == &fc ? "classical" : "quantum";
    t.summary.push_back(fit_line(name, grid, c->f_max, Phase::Normal, cfg.normal_window));
    t.summary.push_back(
        fit_line(name, grid, c->f_max, Phase::Superradiant, cfg.superradiant_window));
  }
  return {t};
}

std::vector<Table> cmd_scaling(const RunConfig& cfg) {
  cfg.validate();
  const DickeParams base = cfg.dicke();
  const ProbeParams pp = cfg.probe();
  const ScalingOptions options{cfg.beta_ratio.value_or(1.0), cfg.method, cfg.time_grid};
  const ScalingFit unc =
      scaling_fit(base, pp, cfg.n_probes, EnsembleKind::Uncorrelated, cfg.w, options);
  const ScalingFit wer = scaling_fit(base, pp, cfg.n_probes, EnsembleKind::Werner, cfg.w, options);
  const ScalingFit ghz = scaling_fit(base, pp, cfg.n_probes, EnsembleKind::GHZ, cfg.w, options);

  Table t = start_table(cfg, "scaling");
  t.preamble.push_back(fmt::format("# evaluated at beta_ratio = {}", num(options.beta_ratio)));
  t.columns = {"n_probes", "f_unc", "f_werner", "f_ghz"};
  for (std::size_t i = 0; i < cfg.n_probes.size(); ++i) {
    t.rows.push_back(
        {static_cast<double>(cfg.n_probes[i]), unc.values[i], wer.values[i], ghz.values[i]});
  }
  for (const auto& [name, fit] : {std::pair{"unc", &unc}, {"werner", &wer}, {"ghz", &ghz}}) {
    t.summary.push_back(fmt::format("# fit {} slope = {} intercept = 0 (forced) r2 = {} "
                                    "r2_centered = {}",
                                    name, num(fit->slope), num(fit->r2), num(fit->r2_centered)));
  }
  return {t};
}

std::vector<Table> cmd_multiparam(const RunConfig& cfg) {
  cfg.validate();
  const DickeParams base = cfg.dicke();
  const ProbeParams pp = cfg.probe();
  if (cfg.beta_ratio) {
    const PhotonMoments m = moments_at(base, *cfg.beta_ratio, cfg.method, true);
    const double t_max = cfg.t_max.value_or(default_t_max(pp, m));
    Table t = start_table(cfg, "multiparam_dynamics");
    t.preamble.push_back(fmt::format("# moment_method = {}", to_string(m.method)));
    t.columns = {"t", "f_eff"};
    for (double time : linspace(0.0, t_max, cfg.t_points)) {
      t.rows.push_back({time, fisher_matrix(pp, m, time).effective});
    }
    return {t};
  }
  const std::vector<double> grid = cfg.beta_grid();
  const ScanTarget targets[] = {ScanTarget::EffectiveMultiparam};
  const ScanResult scan = beta_scan(base, pp, grid, targets, {cfg.method, cfg.time_grid});
  const ScanCurve& c = scan.curves.front();
  Table t = start_table(cfg, "multiparam_scan");
  t.columns = {"beta_ratio", "t_opt", "f_eff_max"};
  for (std::size_t i = 0; i < grid.size(); ++i) t.rows.push_back({grid[i], c.t_opt[i], c.f_max[i]});
  t.summary.push_back(fmt::format("# peak beta_ratio = {}", num(grid[c.argmax_index()])));
  return {t};
}

std::vector<Table> run_command(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::Thermo: return cmd_thermo(cfg);
    case Command::FiDynamics: return cmd_fi_dynamics(cfg);
    case Command::FiScan: return cmd_fi_scan(cfg);
    case Command::Scaling: return cmd_scaling(cfg);
    case Command::Multiparam: return cmd_multiparam(cfg);
  }
  throw Error(Errc::ConfigError, "unknown command");
}

namespace {

std::string plot_svg(const Table& t) {
  std::vector<double> x = t.column(t.columns.front());
  std::vector<plot::Panel> panels;
  for (std::size_t k = 1; k < t.columns.size(); ++k) {
    std::vector<double> y = t.column(t.columns[k]);
    if (std::none_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) continue;
    panels.push_back({t.columns[k], std::move(y)});
  }
  return plot::stacked_line_plot(t.stem, t.columns.front(), x, panels);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".partial";
  {
    std::ofstream f(tmp, std::ios::binary);
    f << text;
    if (!f) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("cannot write " + path.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermodynamic-criticality-enhanced qubit sensing of the Dicke model"};
  app.set_config("--config", "", "flat key = value configuration file");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  RunConfig cfg;
  std::string method = "auto";
  std::vector<double> normal_window, superradiant_window;
  app.add_option("--epsilon", cfg.epsilon, "atomic transition frequency");
  app.add_option("--g", cfg.g, "atom-cavity coupling");
  app.add_option("--omega", cfg.omega, "cavity frequency (default 4 tanh(eps/2) g^2/eps)");
  app.add_option("--n_atoms", cfg.n_atoms, "number of atoms N");
  app.add_option("--omega_s", cfg.omega_s, "renormalized probe frequency");
  app.add_option("--lambda", cfg.lambda, "probe-cavity coupling");
  app.add_option("--omega_q", cfg.omega_q, "bare qubit frequency");
  app.add_option("--g_qc", cfg.g_qc, "qubit-cavity coupling");
  app.add_option("--delta_q", cfg.delta_q, "qubit-cavity detuning");
  app.add_option("--method", method, "moment method")
      ->check(CLI::IsMember({"closed", "quadrature", "auto"}));
  app.add_option("--beta_min", cfg.beta_min, "smallest beta/beta_c of the grid");
  app.add_option("--beta_max", cfg.beta_max, "largest beta/beta_c of the grid");
  app.add_option("--beta_points", cfg.beta_points, "beta grid points");
  app.add_option("--beta-ratio,--beta_ratio", cfg.beta_ratio, "single beta/beta_c");
  app.add_option("--t_max", cfg.t_max, "end of the dynamics time rows");
  app.add_option("--t_points", cfg.t_points, "dynamics time rows");
  app.add_option("--time_grid", cfg.time_grid, "coarse grid of the time maximization");
  app.add_option("--n_probes", cfg.n_probes, "probe numbers")->delimiter(',');
  app.add_option("--w", cfg.w, "Werner admixture");
  app.add_option("--normal_window", normal_window, "normal-branch fit window lo,hi")
      ->delimiter(',')
      ->expected(2);
  app.add_option("--superradiant_window", superradiant_window,
                 "superradiant-branch fit window lo,hi")
      ->delimiter(',')
      ->expected(2);
  app.add_option("--out,--out_dir", cfg.out_dir, "output directory (stdout when absent)");
  app.add_flag("--plot", cfg.plot, "also write SVG line plots");

  const std::tuple<const char*, Command, const char*> commands[] = {
      {"thermo", Command::Thermo, "order parameter and photon moments vs beta/beta_c"},
      {"fi-dynamics", Command::FiDynamics, "classical and quantum FI vs encoding time"},
      {"fi-scan", Command::FiScan, "time-optimized FI vs beta/beta_c, with power-law fits"},
      {"scaling", Command::Scaling, "optimal QFI vs probe number for three ensembles"},
      {"multiparam", Command::Multiparam, "effective QFI for joint (omega, g) estimation"},
  };
  for (const auto& [name, command, help] : commands) {
    app.add_subcommand(name, help)->fallthrough()->callback([&cfg, command = command] {
      cfg.command = command;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cfg.method = method == "closed"       ? MethodSelector::Closed
                 : method == "quadrature" ? MethodSelector::Quadrature
                                          : MethodSelector::Auto;
    if (!normal_window.empty()) cfg.normal_window = {normal_window[0], normal_window[1]};
    if (!superradiant_window.empty()) {
      cfg.superradiant_window = {superradiant_window[0], superradiant_window[1]};
    }
    cfg.validate();
  } catch (const Error& e) {
    std::cerr << "critmet: configuration error: " << e.what() << "\n";
    return 2;
  }

  std::vector<Table> tables;
  try {
    tables = run_command(cfg);
  } catch (const std::exception& e) {
    std::cerr << "critmet: numerical failure: " << e.what() << "\n";
    return 3;
  }

  try {
    if (cfg.out_dir) {
      const std::filesystem::path dir(*cfg.out_dir);
      std::filesystem::create_directories(dir);
      for (const auto& t : tables) {
        write_file(dir / (t.stem + ".csv"), t.render());
        if (cfg.plot) write_file(dir / (t.stem + ".svg"), plot_svg(t));
      }
    } else {
      std::string text;
      for (std::size_t i = 0; i < tables.size(); ++i) {
        if (i) text += "\n";
        text += tables[i].render();
      }
      std::cout << text;
      if (cfg.plot) {
        for (const auto& t : tables) write_file(t.stem + ".svg", plot_svg(t));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "critmet: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace critmet::cli
