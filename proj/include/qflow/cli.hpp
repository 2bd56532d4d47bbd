// The qflow command line: subcommands, run configuration files and the
// JSON/CSV report writers.
#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "qflow/states.hpp"
#include "qflow/verifier.hpp"

namespace qflow {

struct RunConfig {
  StateSpec state;
  std::string grid;  // empty: coarse for pointwise suites, reference for integrals
  std::vector<double> t_samples{0.0};
  std::vector<std::string> suites{"all"};
  std::map<std::string, double> tolerances;
  std::string deriv = "analytic";  // analytic | fd-space | fd-time | fd-all
  int threads = 1;
  std::string json_path;  // empty: stdout
  std::string csv_dir;    // empty: no field dumps

  // Accepts the state as a shorthand string or a JSON object. Unknown keys,
  // unknown suites and unknown tolerance names throw ConfigError.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

DerivativePolicy parse_derivative_policy(const std::string& text);

// Runs every suite at every t and writes the report; returns the exit code
// (0 all asserted checks pass, 1 otherwise). Config errors propagate.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Full command line without the program name. Returns 0, 1 or 2.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qflow
