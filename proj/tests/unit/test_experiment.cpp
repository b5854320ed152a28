#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dsflow/experiment.hpp"

using namespace dsflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dsflow-tests" / name;
  fs::remove_all(dir);
  return dir;
}

bool has_problem(const SpecError& e, const std::string& needle) {
  for (const auto& p : e.problems()) {
    if (p.find(needle) != std::string::npos) return true;
  }
  return false;
}

constexpr const char* kPerturbed = R"(
n: 2
k: 2
grid: {kind: axisymmetric, resolution: 64}
initial:
  type: perturbed
  rho0: 1.0
  modes: [[1, 0, 0.1], [2, 0, -0.02]]
t_end: 0.05
output_interval: 0.01
)";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("minimal spec fills defaults") {
  const auto spec = parse_spec("n: 2\nk: 2\ninitial: {type: slice, rho0: 1.0}\n");
  CHECK(spec.n == 2);
  CHECK(spec.grid_kind == GridKind::axisymmetric);
  CHECK(spec.resolution.n_theta == 256);
  CHECK(spec.flow.cfl == 0.2);
  CHECK(spec.flow.monitor_slack == 1e-8);
  CHECK(spec.flow.upsilon_min == 1e-3);
  CHECK(spec.flow.umbilicity_tol == 1e-8);
  CHECK(spec.flow.dt_min == 1e-12);
  CHECK(spec.initial.type == InitialSpec::Type::slice);
}

TEST_CASE("latlong resolution defaults") {
  auto spec = parse_spec("n: 2\nk: 2\ngrid: {kind: latlong}\ninitial: {type: slice}\n");
  CHECK(spec.resolution.n_theta == 64);
  CHECK(spec.resolution.n_phi == 128);
  spec = parse_spec("n: 2\nk: 2\ngrid: {kind: latlong, resolution: 32}\ninitial: {type: slice}\n");
  CHECK(spec.resolution.n_phi == 64);
}

TEST_CASE("k must not exceed n") {
  try {
    parse_spec("n: 3\nk: 5\ninitial: {type: slice}\n");
    FAIL("expected a spec error");
  } catch (const SpecError& e) {
    CHECK(has_problem(e, "k <= n"));
  }
}

TEST_CASE("negative amplitudes are valid") {
  const auto spec = parse_spec(kPerturbed);
  REQUIRE(spec.initial.modes.size() == 2u);
  CHECK(spec.initial.modes[1].amplitude == -0.02);
}

TEST_CASE("all problems are reported together") {
  try {
    parse_spec(R"(
n: 3
k: 2
colour: blue
grid: {kind: latlong, resolution: [32, 64]}
initial: {type: perturbed, rho0: -1, modes: [[2, 3, 0.1]]}
tolerances: {cfl: 2.0, bogus: 1}
)");
    FAIL("expected a spec error");
  } catch (const SpecError& e) {
    CHECK(e.problems().size() >= 5u);
    CHECK(has_problem(e, "colour"));
    CHECK(has_problem(e, "tolerances.bogus"));
    CHECK(has_problem(e, "latlong grids require n = 2"));
    CHECK(has_problem(e, "rho0"));
    CHECK(has_problem(e, "|order|"));
    CHECK(has_problem(e, "cfl"));
  }
  CHECK_THROWS_AS(parse_spec("n: [1\n"), SpecError);
  CHECK_THROWS_AS(parse_spec("n: two\nk: 2\ninitial: {type: slice}\n"), SpecError);
}

TEST_CASE("slice experiment is stationary") {
  const auto out = scratch("slice");
  const auto spec = parse_spec("n: 3\nk: 2\ngrid: {resolution: 32}\ninitial: {type: slice, rho0: 0.5}\n");
  const auto result = run_experiment(spec, out);
  CHECK(result.exit_status == exit_ok);
  CHECK(result.status == "stationary");
  CHECK(fs::exists(out / "run.csv"));
  CHECK(slurp(out / "summary.txt").find("status: stationary") != std::string::npos);
}

TEST_CASE("perturbed experiment writes series, snapshots and summary") {
  const auto out = scratch("perturbed");
  auto spec = parse_spec(kPerturbed);
  spec.snapshot_interval = 0.02;
  const auto result = run_experiment(spec, out);
  CHECK(result.exit_status == exit_ok);
  const std::string csv = slurp(out / "run.csv");
  CHECK(csv.rfind("t,dt,max_r,min_r,max_u,min_F,max_omega,umbilicity_deficit,A_minus1,A_0,A_1,A_2,"
                  "minkowski_res_1,minkowski_res_2,",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  CHECK(csv.find('\r') == std::string::npos);
  const std::string summary = slurp(out / "summary.txt");
  for (const char* key : {"rho_infinity=", "A1_drift=", "A2_gain=", "af_slack_final=", "exit_status: 0"}) {
    CHECK(summary.find(key) != std::string::npos);
  }
  int snapshots = 0;
  for (const auto& entry : fs::directory_iterator(out / "snapshots")) {
    ++snapshots;
    CHECK(slurp(entry.path()).rfind("# kind=axisymmetric n=2 resolution=64", 0) == 0);
  }
  CHECK(snapshots == 3);
  for (const auto& entry : fs::directory_iterator(out.parent_path())) {
    CHECK(entry.path().filename().string().find(".staging") == std::string::npos);
  }
}

TEST_CASE("same spec and seed give identical bytes") {
  auto spec = parse_spec(R"(
n: 2
k: 2
grid: {kind: latlong, resolution: 16}
initial: {type: perturbed, rho0: 1.0, random_modes: 3, random_amplitude: 0.01}
seed: 7
t_end: 0.01
output_interval: 0.005
)");
  run_experiment(spec, scratch("repeat-a"));
  run_experiment(spec, scratch("repeat-b"));
  const auto a = slurp(fs::temp_directory_path() / "dsflow-tests" / "repeat-a" / "run.csv");
  CHECK(!a.empty());
  CHECK(a == slurp(fs::temp_directory_path() / "dsflow-tests" / "repeat-b" / "run.csv"));
}

TEST_CASE("near-null initial data fails at construction") {
  const auto out = scratch("null");
  const auto spec = parse_spec(R"(
n: 2
k: 2
grid: {resolution: 64}
initial: {type: perturbed, rho0: 1.0, modes: [[1, 0, 0.5]]}
tolerances: {upsilon_min: 0.99}
)");
  const auto result = run_experiment(spec, out);
  CHECK(result.exit_status == exit_construction_failure);
  const std::string summary = slurp(out / "summary.txt");
  CHECK(summary.find("null") != std::string::npos);
  CHECK(summary.find("node") != std::string::npos);
}

TEST_CASE("an existing output directory is replaced") {
  const auto out = scratch("replace");
  fs::create_directories(out);
  std::ofstream(out / "stale.txt") << "old";
  run_experiment(parse_spec("n: 2\nk: 2\ngrid: {resolution: 16}\ninitial: {type: slice}\n"), out);
  CHECK_FALSE(fs::exists(out / "stale.txt"));
  CHECK(fs::exists(out / "summary.txt"));
}

TEST_CASE("exit status mapping") {
  CHECK(exit_status_for(ErrorKind::null_degeneration, true) == 3);
  CHECK(exit_status_for(ErrorKind::monitor_violation, false) == 2);
  CHECK(exit_status_for(ErrorKind::stiffness_collapse, false) == 4);
  CHECK(exit_status_for(ErrorKind::convexity_lost, false) == 4);
}

TEST_CASE("refinement study") {
  const auto slice = parse_spec("n: 2\nk: 2\ngrid: {resolution: 32}\ninitial: {type: slice}\nt_end: 0.1\n");
  const auto flat = refinement_study(slice, 3);
  for (const auto& row : flat.rows) {
    for (const auto& order : row.orders) CHECK_FALSE(order);
  }
  std::ostringstream os;
  write_refinement_table(os, flat);
  CHECK(os.str().find("exact") != std::string::npos);

  auto spec = parse_spec(kPerturbed);
  spec.resolution.n_theta = 64;
  const auto table = refinement_study(spec, 3);
  REQUIRE(table.levels.size() == 3u);
  CHECK(table.levels[2].resolution.n_theta == 256);
  for (const auto& row : table.rows) {
    if (row.quantity == "identity_hol" || row.quantity == "minkowski_res_1") {
      for (const auto& order : row.orders) {
        REQUIRE(order);
        CHECK(*order == doctest::Approx(2.0).epsilon(0.15));
      }
    }
  }
  CHECK_THROWS_AS(refinement_study(spec, 1), Error);
}

}  // TEST_SUITE
