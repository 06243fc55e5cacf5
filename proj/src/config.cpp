#include "actsense/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace actsense {

namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "activities",       "user_transition", "charge_prob", "detect_error_active", "connectivity_active",
      "battery_capacity", "data_budget",     "discount",    "data_usage_active",   "detect_error_empty"};
  return keys;
}

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw ModelError(std::string("missing key '") + key + "'", key);
  return j.at(key);
}

double number(const json& j, const char* key) {
  if (!j.is_number()) throw ModelError(std::string("'") + key + "' must be a number", key);
  return j.get<double>();
}

std::vector<double> numbers(const json& j, const char* key, std::size_t n) {
  if (!j.is_array() || j.size() != n)
    throw ModelError(std::string("'") + key + "' must be an array of " + std::to_string(n) + " numbers", key);
  std::vector<double> out;
  out.reserve(n);
  for (const auto& x : j) out.push_back(number(x, key));
  return out;
}

}  // namespace

SensingModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ModelError("config must be a JSON object");
  for (const auto& item : j.items()) {
    if (!known_keys().count(item.key())) throw ModelError("unknown key '" + item.key() + "'", item.key());
  }

  SensingModel m;
  const json& acts = require(j, "activities");
  int n = 0;
  if (acts.is_number_integer()) {
    n = acts.get<int>();
  } else if (acts.is_array()) {
    for (const auto& name : acts) {
      if (!name.is_string()) throw ModelError("'activities' names must be strings", "activities");
      m.activity_names.push_back(name.get<std::string>());
    }
    n = static_cast<int>(m.activity_names.size());
  } else {
    throw ModelError("'activities' must be a count or an array of names", "activities");
  }
  if (n <= 0) throw ModelError("'activities' must be positive", "activities");

  const json& cap = require(j, "battery_capacity");
  if (!cap.is_number_integer()) throw ModelError("'battery_capacity' must be an integer", "battery_capacity");
  m.space = StateSpace(n, cap.get<int>());

  const auto un = static_cast<std::size_t>(n);
  const json& rows = require(j, "user_transition");
  if (!rows.is_array() || rows.size() != un)
    throw ModelError("'user_transition' must have one row per activity", "user_transition");
  for (const auto& row : rows) {
    auto r = numbers(row, "user_transition", un);
    m.user_transition.insert(m.user_transition.end(), r.begin(), r.end());
  }
  m.charge_prob = number(require(j, "charge_prob"), "charge_prob");
  m.detect_error_active = numbers(require(j, "detect_error_active"), "detect_error_active", un);
  m.connectivity_active = numbers(require(j, "connectivity_active"), "connectivity_active", un);
  m.budget = number(require(j, "data_budget"), "data_budget");
  m.discount = number(require(j, "discount"), "discount");
  const json& du = require(j, "data_usage_active");
  if (du.is_number()) {
    m.data_usage_active.assign(un, du.get<double>());
  } else {
    m.data_usage_active = numbers(du, "data_usage_active", un);
  }
  if (j.contains("detect_error_empty")) {
    const json& de = j.at("detect_error_empty");
    if (de.is_null()) m.detect_error_empty.reset();
    else m.detect_error_empty = number(de, "detect_error_empty");
  }
  m.validate();
  return m;
}

std::string model_to_json(const SensingModel& m) {
  json j = json::object();
  if (m.activity_names.empty()) {
    j["activities"] = m.num_activities();
  } else {
    j["activities"] = m.activity_names;
  }
  const auto n = static_cast<std::size_t>(m.num_activities());
  json rows = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back(std::vector<double>(m.user_transition.begin() + static_cast<std::ptrdiff_t>(i * n),
                                       m.user_transition.begin() + static_cast<std::ptrdiff_t>((i + 1) * n)));
  }
  j["user_transition"] = rows;
  j["charge_prob"] = m.charge_prob;
  j["detect_error_active"] = m.detect_error_active;
  j["connectivity_active"] = m.connectivity_active;
  j["battery_capacity"] = m.capacity();
  j["data_budget"] = m.budget;
  j["discount"] = m.discount;
  j["data_usage_active"] = m.data_usage_active;
  if (m.detect_error_empty) j["detect_error_empty"] = *m.detect_error_empty;
  else j["detect_error_empty"] = nullptr;
  return j.dump(2) + "\n";
}

SensingModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

void save_model(const SensingModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write config " + path.string());
  out << model_to_json(model);
}

}  // namespace actsense
