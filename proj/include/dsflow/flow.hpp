#pragma once

// Time integration of the graph form of the flow
//
//   dr/dt = upsilon (u - lambda' / F),   F = E_k / E_{k-1},
//
// by explicit midpoint steps under a parabolic step-size bound, with the
// monotone quantities of the flow checked after every step.

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dsflow/geometry.hpp"
#include "dsflow/grid.hpp"
#include "dsflow/polar_filter.hpp"
#include "dsflow/quermass.hpp"

namespace dsflow {

struct GraphState {
  ScalarField r;
  double t = 0.0;
  int k = 2;

  int n() const { return r.grid->dim(); }
};

enum class StepScheme { rk2 };

struct FlowConfig {
  double cfl = 0.2;
  double t_end = 1.0;
  double upsilon_min = 1e-3;
  double umbilicity_tol = 1e-8;
  /// Convergence also needs max r - min r below this.
  double spread_tol = 1e-6;
  double monitor_slack = 1e-8;
  double dt_min = 1e-12;
  double output_interval = 0.01;
  int max_retries = 8;
  bool check_omega = true;
  bool keep_states = false;
  StepScheme step_scheme = StepScheme::rk2;

  GeometryOptions geometry() const { return GeometryOptions{upsilon_min}; }
  /// Throws Error(invalid_argument) listing the offending field.
  void validate() const;
};

struct Monitors {
  double t = 0.0;
  double max_r = 0.0;
  double min_r = 0.0;
  double max_u = 0.0;
  double min_F = 0.0;
  double max_omega = 0.0;  // max of ln F + ln u - ln lambda'
  double min_upsilon = 0.0;
  double umbilicity_deficit = 0.0;     // int lambda' (E_1^2/E_2 - 1) dmu >= 0
  double umbilicity_cross_check = 0.0; // same integral through |A|^2 / H^2
  std::vector<double> minkowski;       // j = 1..: int u E_j - lambda' E_{j-1}
  QuermassVector A;
  AFReport af;
  std::array<double, 4> variation{};        // (n-l) int E_{l+1} speed dmu, l = -1..2
  std::array<double, 4> variation_scale{};

  double spread() const { return max_r - min_r; }
};

struct Violation {
  std::string monitor;
  double magnitude = 0.0;
};

struct StepReport {
  double dt_taken = 0.0;
  int retries = 0;
  Monitors monitor_before;
  Monitors monitor_after;
  std::vector<Violation> violations;
  std::vector<Violation> excess;  // every monitor, signed; positive means it moved the wrong way
};

/// Builds a state after checking r > 0, spacelikeness and k-convexity.
/// Throws the assembly error on failure.
GraphState make_state(ScalarField r, int k, const FlowConfig& config = {}, double t = 0.0);

Monitors monitors(const GeometryFields& fields, double t);
Monitors monitors(const GraphState& state, const FlowConfig& config = {});

ScalarField scalar_rhs(const GraphState& state, const FlowConfig& config = {});
double propose_dt(const GraphState& state, const FlowConfig& config = {});

/// Signed excess of every monitored quantity over its allowed direction.
std::vector<Violation> monitor_excess(const Monitors& initial, const Monitors& before,
                                      const Monitors& after, int k, const FlowConfig& config);

/// Monotonicity checks of `after` against `before` and the C^0 bounds of `initial`.
std::vector<Violation> check_monitors(const Monitors& initial, const Monitors& before,
                                      const Monitors& after, int k, const FlowConfig& config);

std::pair<GraphState, StepReport> step(const GraphState& state, const FlowConfig& config);

/// Stateful integrator that reuses the geometry of the current state.
class FlowIntegrator {
 public:
  FlowIntegrator(GraphState initial, FlowConfig config);

  const GraphState& state() const noexcept { return state_; }
  const GeometryFields& fields() const noexcept { return fields_; }
  const Monitors& current_monitors() const noexcept { return current_; }
  const Monitors& initial_monitors() const noexcept { return initial_; }
  const FlowConfig& config() const noexcept { return config_; }

  double propose_dt() const;
  ScalarField rhs(const GeometryFields& fields) const;

  /// One accepted step of size at most dt_cap. Monitor violations are
  /// reported, not thrown.
  StepReport advance(double dt_cap);

 private:
  GraphState state_;
  FlowConfig config_;
  std::unique_ptr<PolarFilter> filter_;
  GeometryFields fields_;
  Monitors initial_;
  Monitors current_;
};

double propose_dt(const GeometryFields& fields, const FlowConfig& config,
                  const PolarFilter* filter);

enum class StopReason { t_end, converged };

struct ConvergenceReport {
  StopReason reason = StopReason::t_end;
  bool converged = false;
  double t_final = 0.0;
  double spread = 0.0;
  double rho_final = 0.0;      // (max r + min r) / 2
  double rho_predicted = 0.0;  // phi_1^{-1}(A_1(initial))
  double limit_error = 0.0;    // |rho_final - rho_predicted|
};

struct Sample {
  Monitors monitors;
  double dt = 0.0;
  std::optional<ScalarField> r;
};

struct Trajectory {
  std::vector<Sample> samples;
  GraphState final_state;
  ConvergenceReport convergence;
  std::size_t steps = 0;
  double max_dt = 0.0;
  double min_dt = 0.0;
  std::vector<Violation> worst_excess;  // largest per-step excess of each monitor
};

struct RunObserver {
  std::function<void(const Sample&)> on_sample;
  std::function<void(const GraphState&)> on_snapshot;
  double snapshot_interval = 0.0;  // 0 disables snapshots
};

/// Integrates until t_end or convergence. Samples are emitted at t = 0, at
/// every multiple of output_interval and at the final time. Throws
/// Error(monitor_violation) on the first violated monitor (after emitting the
/// offending sample) and propagates numerical errors.
Trajectory run(const GraphState& initial, const FlowConfig& config,
               const RunObserver& observer = {});

/// Samples of A_l along a trajectory, ready for variation_check (l = -1..2).
std::vector<VariationSample> variation_samples(const Trajectory& trajectory, int l);
std::vector<VariationPoint> variation_check(const Trajectory& trajectory, int l);

}  // namespace dsflow
