// Scenario runner: `setkoop run <config>` and `setkoop list-checks`.

#include <CLI11.hpp>

#include <iostream>

#include "setkoop/checks.hpp"
#include "setkoop/csv.hpp"
#include "setkoop/scenario.hpp"

int main(int argc, char** argv) {
  using namespace setkoop;

  CLI::App app{"Set-valued Koopman, Liouville and Perron-Frobenius checks"};
  app.require_subcommand(1);

  std::string config;
  std::string output_dir;
  std::uint64_t seed = 0;
  double step = 0.0;
  bool parallel = false;

  auto* run = app.add_subcommand("run", "Run the checks of a scenario file");
  run->add_option("config", config, "Scenario YAML file")->required();
  auto* out_opt = run->add_option("--output-dir", output_dir, "Override output_dir");
  auto* seed_opt = run->add_option("--seed", seed, "Override controls.seed");
  auto* step_opt = run->add_option("--step", step, "Override time.step");
  run->add_flag("--parallel", parallel, "Run checks concurrently");

  auto* list = app.add_subcommand("list-checks", "List the available checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code::invalid;
  }

  if (list->parsed()) {
    std::cout << list_checks_text();
    return exit_code::pass;
  }

  try {
    RunOptions options;
    if (*out_opt) options.output_dir = output_dir;
    if (*seed_opt) options.seed = seed;
    if (*step_opt) options.step = step;
    options.parallel = parallel;
    const auto report = run_scenario(load_scenario(config), options);
    for (const auto& o : report.outcomes) {
      std::cout << o.name << ": " << to_string(o.status) << " (worst " << format_number(o.worst_defect)
                << ", tolerance " << format_number(o.tolerance) << ")";
      if (!o.message.empty()) std::cout << " " << o.message;
      std::cout << "\n";
    }
    std::cout << "summary written to " << report.output_dir << "/summary.csv\n";
    return report.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::invalid;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return exit_code::divergence;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::invalid;
  }
}
