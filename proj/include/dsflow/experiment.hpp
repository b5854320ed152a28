#pragma once

// Experiment runner: YAML specs, monitor CSVs, snapshots, summaries and
// refinement studies. See configs/ and README.md for the spec format.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsflow/errors.hpp"
#include "dsflow/flow.hpp"
#include "dsflow/grid.hpp"
#include "dsflow/initial_data.hpp"

namespace dsflow {

enum ExitStatus : int {
  exit_ok = 0,
  exit_monitor_violation = 2,
  exit_construction_failure = 3,
  exit_numerical_abort = 4,
};

struct InitialSpec {
  enum class Type { slice, perturbed };
  Type type = Type::slice;
  double rho0 = 1.0;
  std::vector<HarmonicMode> modes;
  int random_modes = 0;
  double random_amplitude = 0.0;
  int max_degree = 4;
  bool auto_shrink = false;
};

struct ExperimentSpec {
  int n = 2;
  int k = 2;
  GridKind grid_kind = GridKind::axisymmetric;
  Resolution resolution{256, 1};
  InitialSpec initial;
  FlowConfig flow;
  double snapshot_interval = 0.0;
  std::uint64_t seed = 0;
  std::string output;  // may be overridden on the command line
};

/// Every problem found in a spec, not only the first.
class SpecError : public Error {
 public:
  explicit SpecError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

ExperimentSpec parse_spec(std::string_view text);
ExperimentSpec load_spec(const std::filesystem::path& path);

GridPtr build_grid(const ExperimentSpec& spec);
/// Initial state of the spec, including random modes drawn from the seed.
InitialData build_initial_data(const ExperimentSpec& spec);

int exit_status_for(ErrorKind kind, bool during_construction);

std::vector<std::string> csv_columns(const Monitors& first);
std::string csv_row(const Sample& sample);

struct ExperimentOptions {
  bool quiet = true;
  std::ostream* log = nullptr;  // progress lines when not quiet
};

struct ExperimentResult {
  int exit_status = exit_ok;
  std::string status;  // stationary | converged | t_end | error kind
  std::string message;
  std::optional<Trajectory> trajectory;
  std::string summary;
};

/// Runs the spec and writes run.csv, snapshots/ and summary.txt to `out`.
/// Files are written to a sibling staging directory that replaces `out` once
/// complete, including when the run failed, so the summary carries the error.
ExperimentResult run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out,
                                const ExperimentOptions& options = {});

struct RefinementLevel {
  Resolution resolution;
  double h = 0.0;
  double hol = 0.0;
  std::optional<double> hos;
  std::vector<double> minkowski;  // |residual| of the initial state, j = 1..
  double a1_drift = 0.0;          // |A_1(t_end) - A_1(0)| / A_1(0)
};

struct RefinementRow {
  std::string quantity;
  std::vector<double> errors;
  std::vector<std::optional<double>> orders;  // nullopt: at rounding level ("exact")
};

struct RefinementTable {
  std::vector<RefinementLevel> levels;
  std::vector<RefinementRow> rows;
};

/// Repeats the spec at levels dyadically refined resolutions and reports
/// observed orders log2(e_h / e_{h/2}).
RefinementTable refinement_study(const ExperimentSpec& spec, int levels,
                                 const ExperimentOptions& options = {});
void write_refinement_table(std::ostream& os, const RefinementTable& table);

}  // namespace dsflow
