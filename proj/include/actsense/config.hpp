#pragma once

#include <filesystem>
#include <string>

#include "actsense/model.hpp"

namespace actsense {

// Model configuration is a JSON object with the keys
//   activities            integer count, or array of activity names
//   user_transition       |U| x |U| nested array, rows sum to 1
//   charge_prob           P(e = 1)
//   detect_error_active   per-activity detection error when active
//   connectivity_active   per-activity connectivity probability when active
//   battery_capacity      B (levels 0..B)
//   data_budget           D
//   discount              beta in [0,1)
//   data_usage_active     number, or per-activity array (used when b > 0)
//   detect_error_empty    optional, detection error when active at b = 0 (default 1;
//                         null means the per-activity value)
// Unknown keys are rejected.

SensingModel model_from_json(const std::string& text);
std::string model_to_json(const SensingModel& model);

SensingModel load_model(const std::filesystem::path& path);
void save_model(const SensingModel& model, const std::filesystem::path& path);

}  // namespace actsense
