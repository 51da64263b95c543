#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gerbe/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"2-group parallel transport: path/surface holonomy over crossed modules"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::string suite;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int steps = 0;
  double tolerance = 0;

  const std::vector<std::string> commands = {
      "poe",             "soe",
      "hgphi",           "check-crossed-module",
      "check-fake-flat", "check-gauge",
      "check-axioms",    "transport-path",
      "transport-bigon", "compare-itineraries",
      "validate-bundle", "calibrate-soe"};

  std::map<std::string, CLI::App*> subs;
  for (const auto& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    sub->add_option("--seed", seed, "override the scenario seed")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--steps", steps, "override integrator steps");
    sub->add_option("--tolerance", tolerance, "pass/fail tolerance for checks");
    sub->add_option("--out", out_path, "also write the report to this file");
    if (name == "check-axioms")
      sub->add_option("--suite", suite, "functor|gauge2|thin|homega|equivariance");
    subs[name] = sub;
  }

  CLI11_PARSE(app, argc, argv);

  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;

  try {
    gerbe::Scenario scenario = gerbe::load_scenario_file(scenario_path);
    gerbe::RunFlags flags;
    if (seed_set) flags.seed = seed;
    if (steps > 0) flags.steps = steps;
    if (tolerance > 0) flags.tolerance = tolerance;
    flags.suite = suite;
    gerbe::RunResult res = gerbe::run_command(command, scenario, flags);
    std::cout << res.report_json;
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      out << res.report_json;
    }
    std::cerr << "wall_seconds " << res.wall_seconds << "\n";
    return res.exit_code;
  } catch (const gerbe::LoadError& e) {
    std::cerr << "load error: " << e.what() << "\n";
    return 1;
  } catch (const gerbe::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
