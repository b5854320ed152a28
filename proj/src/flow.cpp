#include "dsflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "dsflow/errors.hpp"

namespace dsflow {

void FlowConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::invalid_argument, fmt::format("invalid flow config: {}", what));
  };
  require(cfl > 0.0 && cfl < 1.0, "cfl must lie in (0, 1)");
  require(t_end >= 0.0, "t_end must be >= 0");
  require(upsilon_min > 0.0 && upsilon_min < 1.0, "upsilon_min must lie in (0, 1)");
  require(umbilicity_tol > 0.0, "umbilicity_tol must be positive");
  require(spread_tol > 0.0, "spread_tol must be positive");
  require(monitor_slack > 0.0, "monitor_slack must be positive");
  require(dt_min > 0.0, "dt_min must be positive");
  require(output_interval > 0.0, "output_interval must be positive");
  require(max_retries >= 0, "max_retries must be >= 0");
}

GraphState make_state(ScalarField r, int k, const FlowConfig& config, double t) {
  const auto [lo, hi] = std::minmax_element(r.values.begin(), r.values.end());
  if (!(*lo > 0.0) || !std::isfinite(*hi)) {
    throw Error(ErrorKind::invalid_argument,
                fmt::format("radial function must be finite and positive (min r = {:.6g})", *lo),
                static_cast<std::size_t>(lo - r.values.begin()));
  }
  GraphState state{std::move(r), t, k};
  assemble(state.r, k, config.geometry());
  return state;
}

Monitors monitors(const GeometryFields& f, double t) {
  Monitors m;
  m.t = t;
  const int n = f.n;
  const std::size_t size = f.size();
  m.max_r = *std::max_element(f.r.begin(), f.r.end());
  m.min_r = *std::min_element(f.r.begin(), f.r.end());
  m.max_u = *std::max_element(f.u.begin(), f.u.end());
  m.min_F = *std::min_element(f.F.begin(), f.F.end());
  m.min_upsilon = *std::min_element(f.upsilon.begin(), f.upsilon.end());
  m.max_omega = -std::numeric_limits<double>::infinity();
  std::vector<double> deficit(size);
  std::vector<double> cross(size);
  for (std::size_t i = 0; i < size; ++i) {
    m.max_omega = std::max(m.max_omega, std::log(f.F[i]) + std::log(f.u[i]) - std::log(f.lambda_prime[i]));
    const double e1 = f.e(i, 1);
    const double e2 = f.e(i, 2);
    deficit[i] = f.lambda_prime[i] * (e1 * e1 / e2 - 1.0);
    double trace = 0.0;
    double norm2 = 0.0;
    for (int a = 0; a < n; ++a) {
      const double kap = f.kappa[i * n + a];
      trace += kap;
      norm2 += kap * kap;
    }
    // E_2 / E_1^2 = n/(n-1) (1 - |A|^2 / H^2)
    const double ratio = static_cast<double>(n) / (n - 1) * (1.0 - norm2 / (trace * trace));
    cross[i] = f.lambda_prime[i] * (1.0 / ratio - 1.0);
  }
  m.umbilicity_deficit = integrate(*f.grid, deficit, f.area_density);
  m.umbilicity_cross_check = integrate(*f.grid, cross, f.area_density);
  const int k_max = std::min(n, std::max(2, f.k));
  for (int j = 1; j <= k_max; ++j) m.minkowski.push_back(minkowski_residual(f, j));
  m.A = quermassintegrals(f, k_max);
  m.af = af_check(m.A);
  for (int l = -1; l <= 2; ++l) {
    m.variation[l + 1] = variation_rhs(f, l);
    m.variation_scale[l + 1] = variation_scale(f, l);
  }
  return m;
}

Monitors monitors(const GraphState& state, const FlowConfig& config) {
  return monitors(assemble(state.r, state.k, config.geometry()), state.t);
}

double propose_dt(const GeometryFields& f, const FlowConfig& config, const PolarFilter* filter) {
  const Grid& grid = *f.grid;
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) {
    // Largest eigenvalue of g^{-1} is 1 / (lambda^2 upsilon^2), along Dr.
    const double ginv_max = 1.0 / (f.lambda[i] * f.lambda[i] * f.upsilon[i] * f.upsilon[i]);
    const double diffusion =
        f.upsilon[i] * f.lambda_prime[i] / (f.F[i] * f.F[i]) * ginv_max * f.gradF_sum[i];
    double spacing = grid.dtheta();
    if (grid.kind() == GridKind::latlong) {
      const int row = grid.theta_index(i);
      spacing = std::min(spacing, filter ? filter->effective_spacing(row) : grid.spacing(i, 1));
    }
    dt = std::min(dt, config.cfl * spacing * spacing / diffusion);
  }
  if (!(dt >= config.dt_min)) {
    throw Error(ErrorKind::stiffness_collapse,
                fmt::format("stiffness collapse: proposed dt = {:.3g} < dt_min = {:.3g}", dt, config.dt_min));
  }
  return dt;
}

namespace {

ScalarField rhs_of(const GeometryFields& f, const PolarFilter* filter) {
  ScalarField out(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f.upsilon[i] * f.speed[i];
  if (filter) filter->apply(out.values);
  return out;
}

std::unique_ptr<PolarFilter> make_filter(const GridPtr& grid) {
  if (grid->kind() != GridKind::latlong) return nullptr;
  return std::make_unique<PolarFilter>(grid);
}

bool recoverable(ErrorKind kind) {
  return kind == ErrorKind::convexity_lost || kind == ErrorKind::null_degeneration ||
         kind == ErrorKind::near_null || kind == ErrorKind::numerical;
}

}  // namespace

ScalarField scalar_rhs(const GraphState& state, const FlowConfig& config) {
  const auto filter = make_filter(state.r.grid);
  return rhs_of(assemble(state.r, state.k, config.geometry()), filter.get());
}

double propose_dt(const GraphState& state, const FlowConfig& config) {
  const auto filter = make_filter(state.r.grid);
  return propose_dt(assemble(state.r, state.k, config.geometry()), config, filter.get());
}

std::vector<Violation> monitor_excess(const Monitors& initial, const Monitors& before,
                                      const Monitors& after, int k, const FlowConfig& config) {
  std::vector<Violation> out{
      {"max_r", after.max_r - before.max_r},
      {"min_r", before.min_r - after.min_r},
      {"c0_upper", after.max_r - initial.max_r},
      {"c0_lower", initial.min_r - after.min_r},
      {"max_u", after.max_u - before.max_u},
      {"min_F", before.min_F - after.min_F},
  };
  if (config.check_omega && k == 2) out.push_back({"max_omega", after.max_omega - before.max_omega});
  if (k == 2) out.push_back({"A_2", before.A(2) - after.A(2)});
  out.push_back({"umbilicity_deficit", -after.umbilicity_deficit});
  return out;
}

std::vector<Violation> check_monitors(const Monitors& initial, const Monitors& before,
                                      const Monitors& after, int k, const FlowConfig& config) {
  std::vector<Violation> out;
  for (auto& v : monitor_excess(initial, before, after, k, config)) {
    if (v.magnitude > config.monitor_slack) out.push_back(std::move(v));
  }
  return out;
}

FlowIntegrator::FlowIntegrator(GraphState initial, FlowConfig config)
    : state_(std::move(initial)), config_(config), filter_(make_filter(state_.r.grid)) {
  config_.validate();
  fields_ = assemble(state_.r, state_.k, config_.geometry());
  initial_ = monitors(fields_, state_.t);
  current_ = initial_;
}

double FlowIntegrator::propose_dt() const { return dsflow::propose_dt(fields_, config_, filter_.get()); }

ScalarField FlowIntegrator::rhs(const GeometryFields& fields) const { return rhs_of(fields, filter_.get()); }

StepReport FlowIntegrator::advance(double dt_cap) {
  StepReport report;
  report.monitor_before = current_;
  double dt = std::min(propose_dt(), dt_cap);
  const GeometryOptions opts = config_.geometry();
  const std::size_t size = state_.r.size();
  for (int attempt = 0;; ++attempt) {
    try {
      const ScalarField k1 = rhs(fields_);
      ScalarField mid(state_.r.grid);
      for (std::size_t i = 0; i < size; ++i) mid[i] = state_.r[i] + 0.5 * dt * k1[i];
      const ScalarField k2 = rhs(assemble(mid, state_.k, opts));
      ScalarField next(state_.r.grid);
      for (std::size_t i = 0; i < size; ++i) next[i] = state_.r[i] + dt * k2[i];
      GeometryFields next_fields = assemble(next, state_.k, opts);
      state_.r = std::move(next);
      state_.t = dt == dt_cap ? state_.t + dt_cap : state_.t + dt;
      fields_ = std::move(next_fields);
      break;
    } catch (const Error& e) {
      if (!recoverable(e.kind())) throw;
      if (attempt >= config_.max_retries) {
        throw Error(ErrorKind::numerical,
                    fmt::format("step rejected {} times at t = {:.9g}: {}", attempt + 1, state_.t, e.what()),
                    e.node());
      }
      dt *= 0.5;
      if (dt < config_.dt_min) {
        throw Error(ErrorKind::stiffness_collapse,
                    fmt::format("step size fell below dt_min at t = {:.9g}: {}", state_.t, e.what()),
                    e.node());
      }
      ++report.retries;
    }
  }
  report.dt_taken = dt;
  current_ = monitors(fields_, state_.t);
  report.monitor_after = current_;
  report.excess = monitor_excess(initial_, report.monitor_before, current_, state_.k, config_);
  for (const auto& v : report.excess) {
    if (v.magnitude > config_.monitor_slack) report.violations.push_back(v);
  }
  return report;
}

std::pair<GraphState, StepReport> step(const GraphState& state, const FlowConfig& config) {
  FlowIntegrator integrator(state, config);
  StepReport report = integrator.advance(std::numeric_limits<double>::infinity());
  return {integrator.state(), std::move(report)};
}

Trajectory run(const GraphState& initial, const FlowConfig& config, const RunObserver& observer) {
  FlowIntegrator integrator(initial, config);
  Trajectory traj;
  traj.min_dt = std::numeric_limits<double>::infinity();
  const double t0 = initial.t;
  long long output_count = 0;
  long long snapshot_count = 0;

  auto emit = [&](double dt) {
    Sample s;
    s.monitors = integrator.current_monitors();
    s.dt = dt;
    if (config.keep_states) s.r = integrator.state().r;
    if (observer.on_sample) observer.on_sample(s);
    traj.samples.push_back(std::move(s));
  };
  auto maybe_snapshot = [&](bool force) {
    if (!observer.on_snapshot || observer.snapshot_interval <= 0.0) return;
    const double elapsed = integrator.state().t - t0;
    const auto due = static_cast<long long>(std::floor(elapsed / observer.snapshot_interval + 1e-9));
    if (force || due >= snapshot_count) {
      observer.on_snapshot(integrator.state());
      snapshot_count = std::max(snapshot_count, due) + 1;
    }
  };
  auto converged = [&](const Monitors& m) {
    return m.umbilicity_deficit < config.umbilicity_tol && m.spread() < config.spread_tol;
  };

  emit(0.0);
  maybe_snapshot(true);
  StopReason reason = StopReason::t_end;
  const double t_end = t0 + config.t_end;
  if (converged(integrator.current_monitors())) reason = StopReason::converged;
  double last_dt = 0.0;
  while (reason != StopReason::converged && integrator.state().t < t_end) {
    const double target = std::min(t_end, t0 + (output_count + 1) * config.output_interval);
    const StepReport report = integrator.advance(target - integrator.state().t);
    ++traj.steps;
    last_dt = report.dt_taken;
    traj.max_dt = std::max(traj.max_dt, report.dt_taken);
    traj.min_dt = std::min(traj.min_dt, report.dt_taken);
    for (const auto& v : report.excess) {
      auto it = std::find_if(traj.worst_excess.begin(), traj.worst_excess.end(),
                             [&](const Violation& w) { return w.monitor == v.monitor; });
      if (it == traj.worst_excess.end()) {
        traj.worst_excess.push_back(v);
      } else {
        it->magnitude = std::max(it->magnitude, v.magnitude);
      }
    }
    const bool at_output = integrator.state().t >= target;
    if (at_output) ++output_count;
    if (!report.violations.empty()) {
      emit(last_dt);
      std::string list;
      for (const auto& v : report.violations) {
        list += fmt::format("{}{} by {:.3g}", list.empty() ? "" : ", ", v.monitor, v.magnitude);
      }
      throw Error(ErrorKind::monitor_violation,
                  fmt::format("monitor violation at t = {:.9g}: {}", integrator.state().t, list));
    }
    if (converged(integrator.current_monitors())) reason = StopReason::converged;
    if (at_output || reason == StopReason::converged || integrator.state().t >= t_end) {
      emit(last_dt);
      maybe_snapshot(false);
    }
  }
  if (traj.steps == 0) traj.min_dt = 0.0;

  traj.final_state = integrator.state();
  const Monitors& last = integrator.current_monitors();
  ConvergenceReport& c = traj.convergence;
  c.reason = reason;
  c.converged = reason == StopReason::converged;
  c.t_final = integrator.state().t;
  c.spread = last.spread();
  c.rho_final = 0.5 * (last.max_r + last.min_r);
  const double a1 = integrator.initial_monitors().A(1);
  c.rho_predicted = a1 > 0.0 ? invert_phi1(a1, initial.n()) : std::numeric_limits<double>::quiet_NaN();
  c.limit_error = std::abs(c.rho_final - c.rho_predicted);
  return traj;
}

std::vector<VariationSample> variation_samples(const Trajectory& trajectory, int l) {
  if (l < -1 || l > 2) throw Error(ErrorKind::invalid_argument, "variation index must be in [-1, 2]");
  std::vector<VariationSample> out;
  out.reserve(trajectory.samples.size());
  for (const Sample& s : trajectory.samples) {
    const Monitors& m = s.monitors;
    if (!out.empty() && m.t <= out.back().t) continue;
    out.push_back({m.t, m.A(l), m.variation[l + 1], m.variation_scale[l + 1]});
  }
  return out;
}

std::vector<VariationPoint> variation_check(const Trajectory& trajectory, int l) {
  const auto samples = variation_samples(trajectory, l);
  return variation_check(std::span<const VariationSample>(samples));
}

}  // namespace dsflow
