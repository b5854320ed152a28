#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dsflow/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Run flows of spacelike graphs in de Sitter space from a YAML spec"};
  std::string spec_path;
  std::string out_dir;
  int levels = 0;
  bool quiet = false;
  app.add_option("--spec", spec_path, "Experiment spec (YAML)")->required();
  app.add_option("--out", out_dir, "Output directory (overrides 'output' in the spec)");
  app.add_option("--levels", levels, "Run a refinement study over this many dyadic levels")
      ->check(CLI::Range(2, 8));
  app.add_flag("--quiet", quiet, "Suppress progress output");
  app.footer("Worker count: DSFLOW_NUM_THREADS (default 1).");
  CLI11_PARSE(app, argc, argv);

  dsflow::ExperimentSpec spec;
  try {
    spec = dsflow::load_spec(spec_path);
  } catch (const dsflow::SpecError& e) {
    for (const auto& problem : e.problems()) std::cerr << "spec error: " << problem << '\n';
    return dsflow::exit_construction_failure;
  }
  const dsflow::ExperimentOptions options{quiet, &std::cerr};

  if (levels > 0) {
    try {
      const auto table = dsflow::refinement_study(spec, levels, options);
      dsflow::write_refinement_table(std::cout, table);
      return dsflow::exit_ok;
    } catch (const dsflow::Error& e) {
      std::cerr << "refinement study failed: " << e.what() << '\n';
      return e.kind() == dsflow::ErrorKind::monitor_violation ? dsflow::exit_monitor_violation
                                                              : dsflow::exit_numerical_abort;
    }
  }

  try {
    const auto result = dsflow::run_experiment(spec, out_dir, options);
    if (result.exit_status != dsflow::exit_ok) std::cerr << "dsflow: " << result.message << '\n';
    if (!quiet) {
      const std::filesystem::path where = out_dir.empty() ? spec.output : out_dir;
      std::cerr << fmt::format("status {} written to {}\n", result.status, where.string());
    }
    return result.exit_status;
  } catch (const std::exception& e) {
    std::cerr << "dsflow: " << e.what() << '\n';
    return dsflow::exit_numerical_abort;
  }
}
