#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "wlancap/model.hpp"

namespace wlancap {

/// Parses a scenario document. Layout:
///
///   {
///     "n": 50, "m": 1,
///     "lambda_pps": 2.0,            // or "offered_load_pps": 100.0 (total)
///     "payload_bits": 8184,
///     "timing": {
///       "model": "basic",           // equal-slot | basic | rts-cts | custom
///       "components": { "difs_us": 34, ... },   // optional overrides
///       "include_propagation": false,
///       "t_idle_us": 9, "t_coll_us": ..., "t_succ_us": ...  // explicit durations
///     },
///     "mac": { "w0": 16, "r": 2, "retry_limit": 7, "cw_max": 1024 }
///   }
///
/// Explicit durations take precedence over components; "custom" requires
/// them. Missing fields fall back to the reference parameter set. Errors
/// are ScenarioError naming the offending key path.
Scenario parse_scenario(std::string_view json_text);

Scenario load_scenario(const std::filesystem::path& path);

/// Serialises with explicit slot durations, so parse_scenario(to_json(s))
/// reproduces s exactly.
std::string scenario_to_json(const Scenario& scenario);

}  // namespace wlancap
