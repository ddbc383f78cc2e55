#pragma once

#include "v2sim/csv.hpp"
#include "v2sim/svg_plot.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace v2sim {

/// Schema violation or unusable configuration value.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ParamType { Number, Integer, String, Boolean, NumberList, Table, Path };

struct ParamSpec {
  std::string key;
  ParamType type = ParamType::Number;
  nlohmann::json defaultValue;  ///< null with required=false means "derived when absent"
  std::string unit;             ///< "1" for dimensionless numbers
  std::string doc;
  bool required = false;
  std::vector<std::string> choices;  ///< allowed values of a String parameter
};

struct ScenarioSpec {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;

  const ParamSpec* find(const std::string& key) const;
};

/// The eight runnable scenarios, in catalog order.
const std::vector<ScenarioSpec>& scenarioCatalog();
const ScenarioSpec& scenarioSpec(const std::string& name);

/// Human-readable catalog: every parameter with its default and unit.
std::string listScenarios();

struct OutputSettings {
  std::optional<std::string> csvPath;   ///< stdout when empty
  std::optional<std::string> plotPath;
  int precision = 6;
};

/// Parameters after merging defaults, the config file and --set overrides.
struct ResolvedConfig {
  std::string scenario;
  nlohmann::json params;  ///< every schema key present (null for derived values)
  OutputSettings output;
  std::string baseDir;    ///< directory of the config file, for relative input paths
};

/// Parses "key=value"; the value is read as JSON when possible, else as a string.
std::pair<std::string, nlohmann::json> parseOverride(const std::string& assignment);

/// Validates the file against the strict schema and applies overrides
/// (command line > config file > default). Throws ConfigError naming the key.
ResolvedConfig resolveConfig(const std::string& scenario, const nlohmann::json& file,
                             const std::vector<std::string>& overrides,
                             const std::string& baseDir = ".");

struct ScenarioResult {
  Table table;
  PlotSpec plot;
  std::vector<std::string> notes;  ///< diagnostics printed to stderr
};

ScenarioResult executeScenario(const ResolvedConfig& config);

struct RunRequest {
  std::string scenario;
  std::string configPath;
  std::vector<std::string> overrides;
  std::optional<std::string> csvPath;
  std::optional<std::string> plotPath;
};

/// Full run with file output. Returns 0 on success, 2 on configuration errors,
/// 3 on numerical failures.
int runScenario(const RunRequest& request, std::ostream& out, std::ostream& err);

}  // namespace v2sim
