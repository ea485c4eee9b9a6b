#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "critmet/cli.hpp"
#include "critmet/error.hpp"
#include "critmet/fisher.hpp"

using namespace critmet;
using namespace critmet::cli;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "critmet");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main(static_cast<int>(argv.size()), argv.data());
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("critmet_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("thermo table") {
  RunConfig cfg;
  cfg.command = Command::Thermo;
  cfg.beta_points = 11;
  cfg.validate();
  const auto tables = cmd_thermo(cfg);
  REQUIRE(tables.size() == 1);
  const Table& t = tables[0];
  CHECK(t.columns == std::vector<std::string>{"beta_ratio", "z0", "j_z", "n_mean", "n2_mean",
                                              "method"});
  const auto r = t.column("beta_ratio");
  const auto z0 = t.column("z0");
  const auto n = t.column("n_mean");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] <= 1.0) CHECK(z0[i] == 0.0);
    if (r[i] > 1.0) CHECK(z0[i] > 0.0);
  }
  CHECK(r.front() == 0.5);
  CHECK(n.front() == doctest::Approx(6.011).epsilon(1e-3));

  const std::string text = t.render();
  CHECK(count(text, "beta_ratio,z0,j_z,n_mean,n2_mean,method\n") == 1);
  CHECK(text.rfind("# critmet thermo", 0) == 0);
  CHECK(count(text, "# units:") == 1);
  CHECK(cmd_thermo(cfg)[0].render() == text);
}

TEST_CASE("fi-dynamics rows") {
  RunConfig cfg;
  cfg.command = Command::FiDynamics;
  cfg.validate();
  const auto tables = cmd_fi_dynamics(cfg);
  REQUIRE(tables.size() == 4);
  CHECK(tables[0].stem == "fi_dynamics_beta0.5");
  for (const Table& t : tables) {
    const auto time = t.column("t");
    const auto f = t.column("f_classical");
    const auto q = t.column("f_quantum");
    REQUIRE(time.size() == 201);
    CHECK(time[0] == 0.0);
    CHECK(f[0] == 0.0);
    CHECK(q[0] == 0.0);
    double peak = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      CHECK(std::isfinite(q[i]));
      CHECK(f[i] <= q[i] * (1.0 + 1e-9) + 1e-300);
      peak = std::max(peak, q[i]);
    }
    if (peak > 0.0) CHECK(q.back() < 1e-6 * peak);
  }

  cfg.beta_ratio = 1.0;
  cfg.t_points = 11;
  const auto single = cmd_fi_dynamics(cfg);
  REQUIRE(single.size() == 1);
  CHECK(single[0].stem == "fi_dynamics");
  CHECK(single[0].rows.size() == 11);
}

TEST_CASE("fi-scan summary reports the four exponents") {
  RunConfig cfg;
  cfg.command = Command::FiScan;
  cfg.validate();
  const auto tables = cmd_fi_scan(cfg);
  REQUIRE(tables.size() == 1);
  const Table& t = tables[0];
  CHECK(t.rows.size() == 101);
  std::string summary;
  for (const auto& line : t.summary) summary += line + "\n";
  CHECK(count(summary, "# fit classical normal mu = ") == 1);
  CHECK(count(summary, "# fit classical superradiant nu = ") == 1);
  CHECK(count(summary, "# fit quantum normal mu = ") == 1);
  CHECK(count(summary, "# fit quantum superradiant nu = ") == 1);
  CHECK(count(summary, "# peak quantum beta_ratio = ") == 1);
  const auto f = t.column("f_max_classical");
  const auto q = t.column("f_max_quantum");
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(f[i] <= q[i] * (1.0 + 1e-9));
}

TEST_CASE("scaling table") {
  RunConfig cfg;
  cfg.command = Command::Scaling;
  cfg.validate();
  const auto tables = cmd_scaling(cfg);
  REQUIRE(tables.size() == 1);
  const Table& t = tables[0];
  const auto n = t.column("n_probes");
  const auto unc = t.column("f_unc");
  const auto wer = t.column("f_werner");
  const auto ghz = t.column("f_ghz");
  REQUIRE(n.size() == 10);
  CHECK(unc[0] == doctest::Approx(ghz[0]).epsilon(1e-12));
  for (std::size_t i = 0; i < n.size(); ++i) {
    CHECK(unc[i] == doctest::Approx(n[i] * unc[0]).epsilon(1e-14));
    CHECK(wer[i] <= ghz[i] * (1.0 + 1e-12));
  }
  std::string summary;
  for (const auto& line : t.summary) summary += line + "\n";
  CHECK(count(summary, "intercept = 0 (forced)") == 3);
}

TEST_CASE("multiparam rows") {
  RunConfig cfg;
  cfg.command = Command::Multiparam;
  cfg.beta_ratio = 1.05;
  cfg.validate();
  const auto dyn = cmd_multiparam(cfg);
  REQUIRE(dyn.size() == 1);
  CHECK(dyn[0].stem == "multiparam_dynamics");
  const auto time = dyn[0].column("t");
  const auto eff = dyn[0].column("f_eff");
  CHECK(time[0] == 0.0);
  CHECK(eff[0] == 0.0);
  const PhotonMoments m = moments_at(reference_params(), 1.05, MethodSelector::Auto, true);
  const ProbeParams pp = cfg.probe();
  for (std::size_t i = 0; i < time.size(); ++i) {
    CHECK(eff[i] >= 0.0);
    CHECK(eff[i] <= quantum_fi_g(pp, m, time[i]) * (1.0 + 1e-9) + 1e-300);
  }

  cfg.beta_ratio.reset();
  cfg.beta_points = 11;
  const auto scan = cmd_multiparam(cfg);
  CHECK(scan[0].stem == "multiparam_scan");
  CHECK(scan[0].rows.size() == 11);
}

TEST_CASE("configuration validation") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  auto rejects = [](RunConfig c) {
    try {
      c.validate();
    } catch (const Error& e) {
      return e.code() == Errc::ConfigError;
    }
    return false;
  };
  {
    RunConfig c;
    c.g = 0.1;  // 4 g^2 < eps omega: no superradiant phase
    c.omega = 1.0;
    CHECK(rejects(c));
  }
  {
    RunConfig c;
    c.omega_q = 2.0;  // precursors must come together
    CHECK(rejects(c));
  }
  {
    RunConfig c;
    c.omega_q = 2.0;
    c.g_qc = 0.05;
    c.delta_q = 1.0;
    c.lambda = 0.1;  // cannot mix precursors with effective parameters
    CHECK(rejects(c));
  }
  {
    RunConfig c;
    c.w = 1.5;
    CHECK(rejects(c));
  }
  {
    RunConfig c;
    c.beta_min = 1.2;
    c.beta_max = 1.0;
    CHECK(rejects(c));
  }
  {
    RunConfig c;
    c.command = Command::Scaling;
    c.n_probes = {1, 2, 3};
    CHECK(rejects(c));
  }
  {
    RunConfig c;
    c.n_probes = {1, 0};
    CHECK(rejects(c));
  }
  {
    RunConfig c;
    c.normal_window = {0.99, 0.85};
    CHECK(rejects(c));
  }
  {
    RunConfig c;
    c.epsilon = -1.0;
    CHECK(rejects(c));
  }
}

TEST_CASE("raw probe precursors map to effective parameters") {
  RunConfig c;
  c.omega_q = 2.0;
  c.g_qc = 0.05;
  c.delta_q = 1.0;
  c.validate();
  const ProbeParams pp = c.probe();
  const ProbeParams expect = effective_probe_params(2.0, 0.05, 1.0, c.dicke().omega);
  CHECK(pp.omega_s == expect.omega_s);
  CHECK(pp.lambda == expect.lambda);
}

TEST_CASE("exit codes") {
  CHECK(run({"--help"}) == 0);
  CHECK(run({"thermo", "--beta_points", "3"}) == 0);
  CHECK(run({}) == 2);
  CHECK(run({"nonsense"}) == 2);
  CHECK(run({"thermo", "--method", "spline"}) == 2);
  CHECK(run({"thermo", "--g", "0.01", "--omega", "1"}) == 2);
  CHECK(run({"scaling", "--n_probes", "1,2"}) == 2);
  CHECK(run({"thermo", "--method", "quadrature", "--n_atoms", "100000000", "--beta_points",
             "3"}) == 3);
}

TEST_CASE("config files") {
  const fs::path dir = scratch("config");
  const fs::path good = dir / "run.cfg";
  {
    std::ofstream f(good);
    f << "# comment\n"
      << "n_atoms = 40\n"
      << "beta_points = 5\n"
      << "beta_min = 0.6\n"
      << "method = closed\n";
  }
  const fs::path out = dir / "out";
  CHECK(run({"thermo", "--config", good.string(), "--out", out.string()}) == 0);
  const std::string csv = slurp(out / "thermo.csv");
  CHECK(count(csv, "# n_atoms = 40") == 1);
  CHECK(count(csv, "# method = closed") == 1);
  CHECK(count(csv, "\n0.6,") == 1);

  // command-line flags override the file
  CHECK(run({"thermo", "--config", good.string(), "--n_atoms", "60", "--out", out.string()}) == 0);
  CHECK(count(slurp(out / "thermo.csv"), "# n_atoms = 60") == 1);

  const fs::path bad = dir / "bad.cfg";
  {
    std::ofstream f(bad);
    f << "n_atomz = 40\n";
  }
  CHECK(run({"thermo", "--config", bad.string()}) == 2);
  CHECK(run({"thermo", "--config", (dir / "missing.cfg").string()}) == 2);
}

TEST_CASE("output files and plots") {
  const fs::path dir = scratch("out");
  CHECK(run({"fi-dynamics", "--t_points", "5", "--out", dir.string(), "--plot"}) == 0);
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  CHECK(names == std::vector<std::string>{
                     "fi_dynamics_beta0.5.csv", "fi_dynamics_beta0.5.svg",
                     "fi_dynamics_beta0.95.csv", "fi_dynamics_beta0.95.svg",
                     "fi_dynamics_beta1.05.csv", "fi_dynamics_beta1.05.svg",
                     "fi_dynamics_beta1.5.csv", "fi_dynamics_beta1.5.svg"});
  const std::string svg = slurp(dir / "fi_dynamics_beta1.05.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count(svg, "<path") == 2);

  // a failed run leaves no partial output behind
  const fs::path failed = scratch("failed");
  CHECK(run({"thermo", "--method", "quadrature", "--n_atoms", "100000000", "--beta_points", "3",
             "--out", failed.string()}) == 3);
  CHECK(fs::is_empty(failed));
}
