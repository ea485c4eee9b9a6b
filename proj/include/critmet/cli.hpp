#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "critmet/dicke_thermo.hpp"
#include "critmet/optimize.hpp"
#include "critmet/probe.hpp"

namespace critmet::cli {

enum class Command { Thermo, FiDynamics, FiScan, Scaling, Multiparam };
std::string_view to_string(Command c) noexcept;

// Resolved run configuration. Defaults follow the reference parameters:
// eps = 1, g = 0.3, omega = 4 tanh(eps/2) g^2 / eps, N = 50, omega_s = 1.5,
// lambda = 0.1 (1e-3 for scaling), w = 0.5.
struct RunConfig {
  Command command = Command::Thermo;

  double epsilon = 1.0;
  double g = 0.3;
  std::optional<double> omega;  // derived from epsilon and g when absent
  int n_atoms = 50;

  std::optional<double> omega_s;  // 1.5 when absent
  std::optional<double> lambda;   // command-dependent default
  std::optional<double> omega_q, g_qc, delta_q;  // raw probe precursors

  MethodSelector method = MethodSelector::Auto;
  double beta_min = 0.5;
  double beta_max = 1.5;
  int beta_points = 101;
  std::optional<double> beta_ratio;
  std::optional<double> t_max;  // dynamics rows; default from the decay scale
  int t_points = 201;
  int time_grid = 400;  // coarse grid of the time maximization
  std::vector<int> n_probes{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  double w = 0.5;
  FitWindow normal_window = kNormalWindow;
  FitWindow superradiant_window = kSuperradiantWindow;

  std::optional<std::string> out_dir;
  bool plot = false;

  DickeParams dicke() const;
  ProbeParams probe() const;
  std::vector<double> beta_grid() const;

  // Throws Error(ConfigError) on any violated invariant, before any
  // numerical work.
  void validate() const;

  // key = value pairs of the fully resolved configuration.
  std::vector<std::pair<std::string, std::string>> resolved() const;
};

using Cell = std::variant<double, std::string>;

// One CSV document: metadata comments, header, rows, trailing summary.
struct Table {
  std::string stem;  // file name without extension
  std::vector<std::string> preamble;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> summary;

  std::string render() const;
  // Numeric column by name; string cells become NaN.
  std::vector<double> column(std::string_view name) const;
};

std::vector<Table> cmd_thermo(const RunConfig& cfg);
std::vector<Table> cmd_fi_dynamics(const RunConfig& cfg);
std::vector<Table> cmd_fi_scan(const RunConfig& cfg);
std::vector<Table> cmd_scaling(const RunConfig& cfg);
std::vector<Table> cmd_multiparam(const RunConfig& cfg);

std::vector<Table> run_command(const RunConfig& cfg);

// Full front end: parses argv, runs, writes output. Returns the exit code:
// 0 success, 2 configuration error, 3 numerical failure.
int main(int argc, char** argv);

}  // namespace critmet::cli
