#include "dsflow/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <yaml-cpp/yaml.h>

#include "dsflow/geometry.hpp"
#include "dsflow/quermass.hpp"

namespace fs = std::filesystem;

namespace dsflow {

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += sep;
    out += item;
  }
  return out;
}

class SpecReader {
 public:
  std::vector<std::string> problems;

  void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) {
      problems.push_back(fmt::format("{}: expected a mapping", where.empty() ? "spec" : where));
      return;
    }
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!known.contains(key)) problems.push_back(fmt::format("unknown key '{}'", qualified(where, key)));
    }
  }

  template <class T>
  bool read(const YAML::Node& parent, const std::string& where, const char* key, T& out) {
    const YAML::Node node = parent[key];
    if (!node) return false;
    try {
      out = node.as<T>();
      return true;
    } catch (const YAML::Exception&) {
      problems.push_back(fmt::format("'{}': cannot read '{}' as {}", qualified(where, key), YAML::Dump(node),
                                     type_name<T>()));
      return false;
    }
  }

  void require(bool ok, const std::string& message) {
    if (!ok) problems.push_back(message);
  }

  static std::string qualified(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
  }

 private:
  template <class T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "a string";
  }
};

void parse_modes(SpecReader& reader, const YAML::Node& node, std::vector<HarmonicMode>& modes) {
  if (!node.IsSequence()) {
    reader.problems.push_back("'initial.modes' must be a list of [degree, order, amplitude]");
    return;
  }
  for (std::size_t i = 0; i < node.size(); ++i) {
    const YAML::Node item = node[i];
    const std::string where = fmt::format("initial.modes[{}]", i);
    HarmonicMode mode;
    try {
      if (item.IsSequence() && item.size() == 3) {
        mode.degree = item[0].as<int>();
        mode.order = item[1].as<int>();
        mode.amplitude = item[2].as<double>();
      } else if (item.IsMap()) {
        reader.check_keys(item, where, {"degree", "order", "amplitude"});
        mode.degree = item["degree"].as<int>();
        mode.order = item["order"] ? item["order"].as<int>() : 0;
        mode.amplitude = item["amplitude"].as<double>();
      } else {
        reader.problems.push_back(fmt::format("'{}' must be [degree, order, amplitude]", where));
        continue;
      }
    } catch (const YAML::Exception&) {
      reader.problems.push_back(fmt::format("'{}' must hold integer degree/order and a numeric amplitude", where));
      continue;
    }
    reader.require(mode.degree >= 0, fmt::format("'{}': degree must be >= 0", where));
    reader.require(std::abs(mode.order) <= mode.degree, fmt::format("'{}': |order| must be <= degree", where));
    reader.require(std::isfinite(mode.amplitude), fmt::format("'{}': amplitude must be finite", where));
    modes.push_back(mode);
  }
}

void parse_grid(SpecReader& reader, const YAML::Node& node, ExperimentSpec& spec) {
  reader.check_keys(node, "grid", {"kind", "resolution"});
  if (!node.IsMap()) return;
  std::string kind = "axisymmetric";
  reader.read(node, "grid", "kind", kind);
  if (kind == "axisymmetric") {
    spec.grid_kind = GridKind::axisymmetric;
  } else if (kind == "latlong") {
    spec.grid_kind = GridKind::latlong;
  } else {
    reader.problems.push_back(fmt::format("'grid.kind' must be axisymmetric or latlong, got '{}'", kind));
  }
  spec.resolution = spec.grid_kind == GridKind::latlong ? Resolution{64, 128} : Resolution{256, 1};
  const YAML::Node res = node["resolution"];
  if (!res) return;
  try {
    if (res.IsSequence() && res.size() == 2) {
      spec.resolution = {res[0].as<int>(), res[1].as<int>()};
    } else if (res.IsScalar()) {
      const int nt = res.as<int>();
      spec.resolution = {nt, spec.grid_kind == GridKind::latlong ? 2 * nt : 1};
    } else {
      reader.problems.push_back("'grid.resolution' must be an integer or [n_theta, n_phi]");
    }
  } catch (const YAML::Exception&) {
    reader.problems.push_back("'grid.resolution' must be an integer or [n_theta, n_phi]");
  }
}

void parse_initial(SpecReader& reader, const YAML::Node& node, ExperimentSpec& spec) {
  reader.check_keys(node, "initial",
                    {"type", "rho0", "modes", "random_modes", "random_amplitude", "max_degree", "auto_shrink"});
  if (!node.IsMap()) return;
  InitialSpec& init = spec.initial;
  std::string type = "slice";
  reader.read(node, "initial", "type", type);
  if (type == "slice") {
    init.type = InitialSpec::Type::slice;
  } else if (type == "perturbed") {
    init.type = InitialSpec::Type::perturbed;
  } else {
    reader.problems.push_back(fmt::format("'initial.type' must be slice or perturbed, got '{}'", type));
  }
  reader.read(node, "initial", "rho0", init.rho0);
  if (node["modes"]) parse_modes(reader, node["modes"], init.modes);
  reader.read(node, "initial", "random_modes", init.random_modes);
  reader.read(node, "initial", "random_amplitude", init.random_amplitude);
  reader.read(node, "initial", "max_degree", init.max_degree);
  reader.read(node, "initial", "auto_shrink", init.auto_shrink);

  reader.require(std::isfinite(init.rho0) && init.rho0 > 0.0, "'initial.rho0' must be positive");
  reader.require(init.random_modes >= 0, "'initial.random_modes' must be >= 0");
  reader.require(std::isfinite(init.random_amplitude) && init.random_amplitude >= 0.0,
                 "'initial.random_amplitude' must be >= 0");
  reader.require(init.max_degree >= 1, "'initial.max_degree' must be >= 1");
  if (init.type == InitialSpec::Type::slice) {
    reader.require(init.modes.empty() && init.random_modes == 0,
                   "slice initial data takes no modes; use type: perturbed");
  }
}

void parse_tolerances(SpecReader& reader, const YAML::Node& node, FlowConfig& flow) {
  reader.check_keys(node, "tolerances",
                    {"cfl", "upsilon_min", "umbilicity_tol", "spread_tol", "monitor_slack", "dt_min",
                     "max_retries"});
  if (!node.IsMap()) return;
  reader.read(node, "tolerances", "cfl", flow.cfl);
  reader.read(node, "tolerances", "upsilon_min", flow.upsilon_min);
  reader.read(node, "tolerances", "umbilicity_tol", flow.umbilicity_tol);
  reader.read(node, "tolerances", "spread_tol", flow.spread_tol);
  reader.read(node, "tolerances", "monitor_slack", flow.monitor_slack);
  reader.read(node, "tolerances", "dt_min", flow.dt_min);
  reader.read(node, "tolerances", "max_retries", flow.max_retries);
}

}  // namespace

SpecError::SpecError(std::vector<std::string> problems)
    : Error(ErrorKind::invalid_argument, "invalid spec: " + join(problems, "; ")), problems_(std::move(problems)) {}

ExperimentSpec parse_spec(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw SpecError({fmt::format("not valid YAML: {}", e.what())});
  }
  ExperimentSpec spec;
  SpecReader reader;
  if (!root.IsMap()) throw SpecError({"spec must be a YAML mapping"});
  reader.check_keys(root, "",
                    {"n", "k", "grid", "initial", "t_end", "output_interval", "snapshot_interval", "seed",
                     "output", "tolerances"});
  reader.read(root, "", "n", spec.n);
  reader.read(root, "", "k", spec.k);
  if (root["grid"]) {
    parse_grid(reader, root["grid"], spec);
  }
  if (root["initial"]) {
    parse_initial(reader, root["initial"], spec);
  } else {
    reader.problems.push_back("missing 'initial' section");
  }
  reader.read(root, "", "t_end", spec.flow.t_end);
  reader.read(root, "", "output_interval", spec.flow.output_interval);
  reader.read(root, "", "snapshot_interval", spec.snapshot_interval);
  reader.read(root, "", "seed", spec.seed);
  reader.read(root, "", "output", spec.output);
  if (root["tolerances"]) parse_tolerances(reader, root["tolerances"], spec.flow);

  reader.require(spec.n >= 2 && spec.n <= kMaxDim, fmt::format("'n' must lie in [2, {}]", kMaxDim));
  reader.require(spec.k >= 2, "'k' must be >= 2 (the umbilicity monitor needs E_2 > 0)");
  reader.require(spec.k <= spec.n, "'k' must satisfy k <= n");
  if (spec.grid_kind == GridKind::latlong) {
    reader.require(spec.n == 2, "latlong grids require n = 2");
    reader.require(spec.resolution.n_phi >= 16 && spec.resolution.n_phi % 2 == 0,
                   "'grid.resolution' n_phi must be even and >= 16");
  } else {
    reader.require(spec.resolution.n_phi == 1, "axisymmetric grids take a single resolution");
    for (const auto& mode : spec.initial.modes) {
      if (mode.order != 0) {
        reader.problems.push_back(
            fmt::format("mode ({}, {}) is not zonal; axisymmetric grids need order 0", mode.degree, mode.order));
      }
    }
  }
  reader.require(spec.resolution.n_theta >= 16, "'grid.resolution' n_theta must be >= 16");
  reader.require(spec.snapshot_interval >= 0.0, "'snapshot_interval' must be >= 0");
  try {
    spec.flow.validate();
  } catch (const Error& e) {
    reader.problems.push_back(e.what());
  }
  if (!reader.problems.empty()) throw SpecError(std::move(reader.problems));
  return spec;
}

ExperimentSpec load_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError({fmt::format("cannot read spec file '{}'", path.string())});
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_spec(buffer.str());
}

GridPtr build_grid(const ExperimentSpec& spec) { return Grid::build(spec.grid_kind, spec.n, spec.resolution); }

InitialData build_initial_data(const ExperimentSpec& spec) {
  const GridPtr grid = build_grid(spec);
  std::vector<HarmonicMode> modes = spec.initial.modes;
  if (spec.initial.random_modes > 0) {
    const auto extra = random_modes(spec.grid_kind, spec.initial.random_modes, spec.initial.random_amplitude,
                                    spec.seed, spec.initial.max_degree);
    modes.insert(modes.end(), extra.begin(), extra.end());
  }
  return build_initial_data(grid, spec.initial.rho0, std::move(modes), spec.k, spec.flow, spec.initial.auto_shrink);
}

int exit_status_for(ErrorKind kind, bool during_construction) {
  if (during_construction) return exit_construction_failure;
  return kind == ErrorKind::monitor_violation ? exit_monitor_violation : exit_numerical_abort;
}

std::vector<std::string> csv_columns(const Monitors& m) {
  std::vector<std::string> cols = {"t", "dt", "max_r", "min_r", "max_u", "min_F", "max_omega",
                                   "umbilicity_deficit", "A_minus1", "A_0", "A_1", "A_2",
                                   "minkowski_res_1", "minkowski_res_2"};
  for (int l = 3; l <= m.A.k_max; ++l) cols.push_back(fmt::format("A_{}", l));
  for (std::size_t j = 3; j <= m.minkowski.size(); ++j) cols.push_back(fmt::format("minkowski_res_{}", j));
  for (const char* c : {"af_rho_star", "af_bound", "af_slack", "var_rhs_m1", "var_rhs_0", "var_rhs_1", "var_rhs_2",
                        "min_upsilon", "umbilicity_cross_check"}) {
    cols.emplace_back(c);
  }
  return cols;
}

std::string csv_row(const Sample& s) {
  const Monitors& m = s.monitors;
  std::vector<double> v = {m.t, s.dt, m.max_r, m.min_r, m.max_u, m.min_F, m.max_omega,
                           m.umbilicity_deficit, m.A(-1), m.A(0), m.A(1), m.A(2),
                           m.minkowski.at(0), m.minkowski.at(1)};
  for (int l = 3; l <= m.A.k_max; ++l) v.push_back(m.A(l));
  for (std::size_t j = 3; j <= m.minkowski.size(); ++j) v.push_back(m.minkowski[j - 1]);
  v.insert(v.end(), {m.af.rho_star, m.af.bound, m.af.slack});
  v.insert(v.end(), m.variation.begin(), m.variation.end());
  v.insert(v.end(), {m.min_upsilon, m.umbilicity_cross_check});
  std::string row;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) row += ',';
    row += fmt::format("{:.17g}", v[i]);
  }
  return row;
}

namespace {

std::string a_vector(const QuermassVector& q) {
  std::vector<std::string> parts;
  for (int l = -1; l <= q.k_max; ++l) parts.push_back(fmt::format("A_{}={:.12g}", l, q(l)));
  return join(parts, " ");
}

std::string node_context(const GridPtr& grid, const Error& e) {
  if (!e.node() || !grid || *e.node() >= grid->size()) return "";
  const std::size_t node = *e.node();
  if (grid->kind() == GridKind::latlong) {
    return fmt::format(" (node {}, theta={:.6f}, phi={:.6f})", node, grid->theta(node), grid->phi(node));
  }
  return fmt::format(" (node {}, theta={:.6f})", node, grid->theta(node));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorKind::invalid_argument, fmt::format("cannot write '{}'", path.string()));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, const fs::path& out, const ExperimentOptions& options) {
  const fs::path target = out.empty() ? fs::path(spec.output.empty() ? "dsflow-out" : spec.output) : out;
  const fs::path parent = target.has_parent_path() ? target.parent_path() : fs::path(".");
  fs::create_directories(parent);
  const fs::path staging = parent / fmt::format(".{}.staging-{}", target.filename().string(), ::getpid());
  fs::remove_all(staging);
  fs::create_directories(staging / "snapshots");

  auto log = [&](const std::string& line) {
    if (!options.quiet && options.log) *options.log << line << '\n' << std::flush;
  };

  ExperimentResult result;
  std::ostringstream summary;
  summary << fmt::format("n={} k={} grid={} resolution={}", spec.n, spec.k, to_string(spec.grid_kind),
                         spec.resolution.n_theta);
  if (spec.grid_kind == GridKind::latlong) summary << 'x' << spec.resolution.n_phi;
  summary << fmt::format(" t_end={:.6g} seed={}\n", spec.flow.t_end, spec.seed);

  GridPtr grid;
  std::optional<InitialData> initial;
  try {
    grid = build_grid(spec);
    initial = build_initial_data(spec);
  } catch (const Error& e) {
    result.exit_status = exit_construction_failure;
    result.status = to_string(e.kind());
    result.message = fmt::format("construction failed: {}{}", e.what(), node_context(grid, e));
  }

  std::ofstream csv;
  double last_t = 0.0;
  if (initial) {
    if (initial->halvings > 0) {
      summary << fmt::format("initial amplitudes halved {} times to reach valid data\n", initial->halvings);
    }
    for (const auto& mode : initial->modes) {
      summary << fmt::format("mode degree={} order={} amplitude={:.17g}\n", mode.degree, mode.order, mode.amplitude);
    }
    csv.open(staging / "run.csv", std::ios::binary);
    bool header_written = false;
    int snapshot_index = 0;
    RunObserver observer;
    observer.on_sample = [&](const Sample& s) {
      if (!header_written) {
        csv << join(csv_columns(s.monitors), ",") << '\n';
        header_written = true;
      }
      csv << csv_row(s) << '\n';
      last_t = s.monitors.t;
      log(fmt::format("t={:.4f} dt={:.3e} spread={:.3e} deficit={:.3e} A1={:.12g}", s.monitors.t, s.dt,
                      s.monitors.spread(), s.monitors.umbilicity_deficit, s.monitors.A(1)));
    };
    observer.snapshot_interval = spec.snapshot_interval;
    observer.on_snapshot = [&](const GraphState& state) {
      std::ofstream snap(staging / "snapshots" / fmt::format("snap_{:06d}.txt", snapshot_index++), std::ios::binary);
      write_snapshot(snap, state.r, state.t);
    };
    try {
      Trajectory traj = run(initial->state, spec.flow, observer);
      const Monitors& first = traj.samples.front().monitors;
      const Monitors& last = traj.samples.back().monitors;
      const ConvergenceReport& c = traj.convergence;
      if (c.converged && traj.steps == 0) {
        result.status = "stationary";
      } else {
        result.status = c.converged ? "converged" : "t_end";
      }
      summary << fmt::format("steps={} t_final={:.9g} dt_min={:.6g} dt_max={:.6g}\n", traj.steps, c.t_final,
                             traj.min_dt, traj.max_dt);
      summary << "initial " << a_vector(first.A) << '\n';
      summary << "final   " << a_vector(last.A) << '\n';
      summary << fmt::format("rho_infinity={:.12g} predicted={:.12g} limit_error={:.6g}\n", c.rho_final,
                             c.rho_predicted, c.limit_error);
      summary << fmt::format("final_spread={:.6g} final_umbilicity_deficit={:.6g}\n", c.spread,
                             last.umbilicity_deficit);
      summary << fmt::format("A1_drift={:.6g} A2_gain={:.6g}\n", std::abs(last.A(1) - first.A(1)) / first.A(1),
                             last.A(2) - first.A(2));
      summary << fmt::format("af_slack_initial={:.6g} af_slack_final={:.6g}\n", first.af.slack, last.af.slack);
      result.trajectory = std::move(traj);
    } catch (const Error& e) {
      result.exit_status = exit_status_for(e.kind(), false);
      result.status = to_string(e.kind());
      result.message = fmt::format("{}{} (last output t={:.9g})", e.what(), node_context(grid, e), last_t);
    }
    csv.close();
  }

  summary << "status: " << result.status << '\n';
  if (!result.message.empty()) summary << "error: " << result.message << '\n';
  summary << "exit_status: " << result.exit_status << '\n';
  result.summary = summary.str();
  write_text(staging / "summary.txt", result.summary);
  log(result.summary);

  fs::remove_all(target);
  fs::rename(staging, target);
  return result;
}

namespace {

std::optional<double> observed_order(double coarse, double fine) {
  constexpr double rounding = 1e-12;
  if (std::abs(coarse) < rounding && std::abs(fine) < rounding) return std::nullopt;
  return std::log2(std::abs(coarse) / std::abs(fine));
}

RefinementRow make_row(std::string name, std::vector<double> errors) {
  RefinementRow row{std::move(name), std::move(errors), {}};
  for (std::size_t i = 0; i + 1 < row.errors.size(); ++i) {
    row.orders.push_back(observed_order(row.errors[i], row.errors[i + 1]));
  }
  return row;
}

}  // namespace

RefinementTable refinement_study(const ExperimentSpec& spec, int levels, const ExperimentOptions& options) {
  if (levels < 2) throw Error(ErrorKind::invalid_argument, "refinement study needs levels >= 2");
  RefinementTable table;
  for (int level = 0; level < levels; ++level) {
    ExperimentSpec refined = spec;
    refined.resolution.n_theta = spec.resolution.n_theta << level;
    if (spec.grid_kind == GridKind::latlong) refined.resolution.n_phi = spec.resolution.n_phi << level;
    const InitialData init = build_initial_data(refined);
    const GridPtr& grid = init.state.r.grid;

    RefinementLevel out;
    out.resolution = refined.resolution;
    out.h = grid->dtheta();
    const DerivativeBundle bundle = derivatives(init.state.r);
    const GeometryFields fields = assemble(init.state.r, bundle, refined.k, refined.flow.geometry());
    const IdentityResiduals ids = hessian_identity_residuals(fields, bundle);
    out.hol = ids.hol;
    out.hos = ids.hos;
    for (int j = 1; j <= std::min(spec.n, std::max(2, spec.k)); ++j) {
      out.minkowski.push_back(std::abs(minkowski_residual(fields, j)));
    }
    const Trajectory traj = run(init.state, refined.flow);
    const double a1_0 = traj.samples.front().monitors.A(1);
    out.a1_drift = std::abs(traj.samples.back().monitors.A(1) - a1_0) / a1_0;
    if (!options.quiet && options.log) {
      *options.log << fmt::format("level {} n_theta={} hol={:.3e} a1_drift={:.3e} steps={}\n", level,
                                  refined.resolution.n_theta, out.hol, out.a1_drift, traj.steps);
    }
    table.levels.push_back(std::move(out));
  }

  auto collect = [&](auto&& get) {
    std::vector<double> v;
    for (const auto& level : table.levels) v.push_back(get(level));
    return v;
  };
  table.rows.push_back(make_row("identity_hol", collect([](const RefinementLevel& l) { return l.hol; })));
  if (table.levels.front().hos) {
    table.rows.push_back(make_row("identity_hos", collect([](const RefinementLevel& l) { return *l.hos; })));
  }
  for (std::size_t j = 0; j < table.levels.front().minkowski.size(); ++j) {
    table.rows.push_back(make_row(fmt::format("minkowski_res_{}", j + 1),
                                  collect([j](const RefinementLevel& l) { return l.minkowski[j]; })));
  }
  table.rows.push_back(make_row("A1_drift", collect([](const RefinementLevel& l) { return l.a1_drift; })));
  return table;
}

void write_refinement_table(std::ostream& os, const RefinementTable& table) {
  os << "quantity";
  for (const auto& level : table.levels) {
    os << fmt::format(",e(N={})", level.resolution.n_theta);
  }
  for (std::size_t i = 0; i + 1 < table.levels.size(); ++i) {
    os << fmt::format(",order({}->{})", table.levels[i].resolution.n_theta, table.levels[i + 1].resolution.n_theta);
  }
  os << '\n';
  for (const auto& row : table.rows) {
    os << row.quantity;
    for (double e : row.errors) os << fmt::format(",{:.6e}", e);
    for (const auto& order : row.orders) os << (order ? fmt::format(",{:.3f}", *order) : std::string(",exact"));
    os << '\n';
  }
}

}  // namespace dsflow
