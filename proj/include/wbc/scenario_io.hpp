#pragma once

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wbc/simulator.hpp"

namespace wbc {

/// Malformed or inconsistent configuration input. The message names the file
/// and, for syntax errors, the line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace io {

using nlohmann::json;

json chain_to_json(const KinematicChain& chain);
/// Accepts an object, or the names "default" / "planar2".
KinematicChain chain_from_json(const json& j);

/// Fully expanded: every field present, defaults resolved.
json scenario_to_json(const Scenario& scenario);
/// Missing fields take the defaults of make_scenario(chain). Relative
/// `press_script` paths resolve against `base_dir`.
Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir = {});

json parse_json_file(const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

/// Sets a dotted path (`priority.locomotion.eta_a`, `gains.k_cart.0`) in an
/// expanded scenario document. The path must already exist. `eta_b` and
/// `eta_a` are shorthands for the manipulation preset.
void apply_override(json& scenario, const std::string& assignment);

/// Column names of the trace CSV for a chain with `dofs` coordinates.
std::vector<std::string> trace_columns(int dofs);
void write_trace_csv(std::ostream& out, const SimTrace& trace);

json summary_json(const Scenario& scenario, const SimTrace& trace);

}  // namespace io
}  // namespace wbc
