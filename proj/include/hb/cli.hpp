#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hb/balanced.hpp"

namespace hb {

using json = nlohmann::json;

struct ConfigError : Error {
  using Error::Error;
};

json instance_to_json(const HiggsInstance& inst);
HiggsInstance instance_from_json(const json& j);

struct RunConfig {
  HiggsInstance instance;
  std::optional<int> k;
  std::optional<std::pair<int, int>> k_range;
  Rational ell{1};
  std::optional<std::pair<int, int>> quad;
  IterationControls controls;
  std::uint64_t seed = 0;
  std::string out;
  json one_ps;
  json metric;
  std::vector<std::string> checks;
  int order = 1;

  std::vector<int> levels() const;
  json echo() const;
};

// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<int> k;
  std::optional<std::string> k_range;
  std::optional<std::string> ell;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> quad;
  std::optional<std::string> one_ps;
  std::optional<std::string> checks;
};

// Parses JSON text; errors carry the line and column of the problem.
json parse_json_text(const std::string& text, const std::string& origin);
RunConfig load_config(const json& j, const Overrides& ov = {});
RunConfig load_config_text(const std::string& text, const Overrides& ov = {});

BundleMetric metric_from_json(const json& j, const SplitBundle& E);

struct CommandResult {
  int exit_code = 0;
  json report;
  std::map<std::string, std::string> csv;
  json timing;
};

CommandResult cmd_balance(const RunConfig& cfg);
CommandResult cmd_weight(const RunConfig& cfg);
CommandResult cmd_asymptotics(const RunConfig& cfg);
CommandResult cmd_validate(const RunConfig& cfg);

// Writes report.json, timing.json and the CSV series into dir.
void write_outputs(const CommandResult& res, const std::string& dir);

int run_cli(int argc, char** argv);

}  // namespace hb
