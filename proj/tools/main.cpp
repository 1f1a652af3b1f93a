#include <iostream>

#include "CLI11.hpp"
#include "capillary/cli/driver.hpp"

namespace cli = capillary::cli;

int main(int argc, char** argv) {
  CLI::App app{"Variational checks for capillary interfaces"};
  app.require_subcommand(1);

  std::string config;
  CLI::App* run = app.add_subcommand("run", "run every check of a scenario config");
  run->add_option("config", config, "config file")->required();

  std::string param;
  std::vector<std::string> values;
  CLI::App* sweep = app.add_subcommand("sweep", "tabulate checks against R0, resolution or t-step");
  sweep->add_option("config", config, "config file")->required();
  sweep->add_option("--param", param, "R0, resolution or t-step")->required();
  sweep->add_option("--values", values, "comma-separated values, at least three")->required()->delimiter(',');

  CLI::App* list = app.add_subcommand("list-scenarios", "print the scenarios and their defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : cli::kExecutionError;
  }

  if (*list) {
    cli::print_scenarios(std::cout);
    return 0;
  }
  cli::RunConfig cfg;
  try {
    cfg = cli::load_config(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExecutionError;
  }
  if (*run) return cli::run(cfg, std::cerr);
  return cli::sweep(cfg, param, values, std::cerr);
}
