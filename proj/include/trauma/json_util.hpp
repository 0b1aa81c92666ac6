#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "trauma/errors.hpp"
#include "trauma/schema.hpp"

namespace trauma {

using nlohmann::json;

// Strict-parse helper: every present key must be in `allowed`.
inline void check_keys(const json& j, const std::vector<std::string>& allowed,
                       const std::string& ctx) {
  if (!j.is_object()) throw config_error(ctx + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == k;
    if (!ok) throw config_error(ctx + ": unknown key '" + k + "'");
  }
}

inline json schema_to_json(const LabelSchema& s) {
  json groups = json::array();
  for (const auto& g : s.groups)
    groups.push_back({{"name", g.name},
                      {"states", g.state_count},
                      {"healthy", g.healthy_state},
                      {"weights", g.weights}});
  return json{{"groups", groups}};
}

inline LabelSchema schema_from_json(const json& j) {
  check_keys(j, {"groups"}, "schema");
  LabelSchema s;
  if (!j.contains("groups")) throw config_error("schema: missing 'groups'");
  for (const auto& gj : j.at("groups")) {
    check_keys(gj, {"name", "states", "healthy", "weights"}, "schema group");
    LabelGroup g;
    g.name = gj.at("name").get<std::string>();
    g.state_count = gj.at("states").get<int>();
    g.healthy_state = gj.value("healthy", 0);
    if (gj.contains("weights"))
      g.weights = gj.at("weights").get<std::vector<double>>();
    else
      g.weights.assign(static_cast<std::size_t>(g.state_count), 1.0);
    s.groups.push_back(std::move(g));
  }
  s.validate();
  return s;
}

}  // namespace trauma
