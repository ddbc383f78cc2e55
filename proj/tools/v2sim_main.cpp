// Scenario runner: v2sim <scenario> --config file [--set key=value ...] [--csv out] [--plot out]
#include "v2sim/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"V2 spin and spin-wave resonance simulator"};
  app.require_subcommand(1);

  app.add_subcommand("list", "print every scenario with its parameters, defaults and units");

  v2sim::RunRequest request;
  std::string csv, plot;
  for (const v2sim::ScenarioSpec& spec : v2sim::scenarioCatalog()) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.summary);
    sub->add_option("--config,-c", request.configPath, "JSON scenario file");
    sub->add_option("--set,-s", request.overrides, "override a parameter, key=value")->take_all();
    sub->add_option("--csv", csv, "CSV output path (stdout when absent)");
    sub->add_option("--plot", plot, "SVG plot output path");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->get_name() == "list") {
    std::cout << v2sim::listScenarios();
    return 0;
  }
  request.scenario = chosen->get_name();
  if (!csv.empty()) request.csvPath = csv;
  if (!plot.empty()) request.plotPath = plot;
  return v2sim::runScenario(request, std::cout, std::cerr);
}
