#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trauma/errors.hpp"

namespace trauma {

// One prediction target with mutually exclusive states, one of them healthy.
struct LabelGroup {
  std::string name;
  int state_count = 2;
  int healthy_state = 0;
  std::vector<double> weights;  // per-state sample weight, all > 0

  int injured_state_count() const { return state_count - 1; }
};

struct LabelSchema {
  std::vector<LabelGroup> groups;

  int group_count() const { return static_cast<int>(groups.size()); }

  int total_states() const {
    int n = 0;
    for (const auto& g : groups) n += g.state_count;
    return n;
  }

  // Offset of a group's first state in the concatenated class vector.
  int state_offset(int group) const {
    int o = 0;
    for (int g = 0; g < group; ++g) o += groups[static_cast<std::size_t>(g)].state_count;
    return o;
  }

  void validate() const {
    if (groups.empty()) throw config_error("schema: no label groups");
    for (const auto& g : groups) {
      if (g.name.empty()) throw config_error("schema: unnamed group");
      if (g.state_count < 2)
        throw config_error("schema: group '" + g.name + "' needs >= 2 states");
      if (g.healthy_state < 0 || g.healthy_state >= g.state_count)
        throw config_error("schema: group '" + g.name + "' healthy index out of range");
      if (static_cast<int>(g.weights.size()) != g.state_count)
        throw config_error("schema: group '" + g.name + "' weight count != state count");
      for (double w : g.weights)
        if (!(w > 0.0))
          throw config_error("schema: group '" + g.name + "' has non-positive weight");
    }
  }
};

// Three 3-state organ groups plus one binary effusion group. Weights default
// to 1 for every state.
inline LabelSchema default_schema() {
  LabelSchema s;
  s.groups = {
      {"liver", 3, 0, {1.0, 1.0, 1.0}},
      {"spleen", 3, 0, {1.0, 1.0, 1.0}},
      {"kidney", 3, 0, {1.0, 1.0, 1.0}},
      {"effusion", 2, 0, {1.0, 1.0}},
  };
  return s;
}

}  // namespace trauma
