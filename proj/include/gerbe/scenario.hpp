#pragma once

#include <map>
#include <optional>
#include <string>

#include "gerbe/bundle.hpp"
#include "gerbe/harness.hpp"

namespace gerbe {

// A fully resolved scenario file: every referenced id resolves, every field
// parses, and the type invariants of referenced objects are checked at load.
struct Scenario {
  CrossedModulePtr cm;
  std::uint64_t seed = 0;
  IntegratorConfig cfg;
  SoeConventions conventions;
  std::map<std::string, Chart> charts;
  std::map<std::string, ConnectionPtr> connections;
  std::map<std::string, GaugePtr> gauges;
  std::map<std::string, Gauge2Transformation> gauge2s;
  std::map<std::string, Path> paths;
  std::map<std::string, Bigon> bigons;
  std::map<std::string, Itinerary> itineraries;
  std::shared_ptr<BundleData> bundle;
  std::map<std::string, std::string> args;  // default command arguments

  const Chart& chart(const std::string& id) const;
  const ConnectionPtr& connection(const std::string& id) const;
  const GaugePtr& gauge(const std::string& id) const;
  const Gauge2Transformation& gauge2(const std::string& id) const;
  const Path& path(const std::string& id) const;
  const Bigon& bigon(const std::string& id) const;
  const Itinerary& itinerary(const std::string& id) const;
  std::string arg(const std::string& key) const;  // throws LoadError when absent
};

Scenario load_scenario_file(const std::string& path);
Scenario load_scenario_text(const std::string& text, const std::string& origin = "<inline>");

struct RunFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  std::optional<double> tolerance;
  std::string suite;     // for check-axioms
  std::string out_path;  // optional report copy
};

struct RunResult {
  int exit_code = 0;
  std::string report_json;  // byte-stable given scenario + seed + config
  double wall_seconds = 0;  // reported on stderr only, never in the json
};

RunResult run_command(const std::string& command, const Scenario& scenario,
                      const RunFlags& flags);

// soe convention calibration: runs the four candidate assignments against the
// paper identities and returns the unique winner with its evidence table.
struct CalibrationOutcome {
  SoeConventions winner;
  // per-candidate named residuals: key "sign<+/->_<ts|st>_<test>"
  std::map<std::string, double> evidence;
  bool matches_frozen = false;
};
CalibrationOutcome calibrate_soe(const Scenario& scenario, const RunFlags& flags);

}  // namespace gerbe
