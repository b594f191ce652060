#include "normsim/policy.hpp"

#include <algorithm>

#include "normsim/errors.hpp"

namespace normsim {

bool Observation::occupied(Cell c) const {
  for (const auto& [color, pos] : others) {
    if (pos == c) return true;
  }
  return false;
}

Observation observe(const WorldState& state, const VehicleId& id, const ScenarioSpec& spec) {
  const VehicleState* self = state.find(id);
  if (!self) throw UnknownVehicle("UnknownVehicle: no vehicle '" + id + "'");
  if (self->status != VehicleStatus::Active) {
    throw InactiveVehicle("InactiveVehicle: '" + id + "' is not active");
  }

  Observation obs;
  obs.self_id = self->id;
  obs.self_color = self->color;
  obs.self_position = self->position;
  obs.self_heading = self->heading;
  obs.self_cumulative_reward = self->cumulative_reward;
  obs.time_step = state.time_step;
  obs.legal = legal_actions(spec, *self);
  for (const auto& v : state.vehicles) {
    if (v.id == id || v.status == VehicleStatus::Completed) continue;
    obs.others.emplace_back(v.color, v.position);
  }
  std::sort(obs.others.begin(), obs.others.end());
  return obs;
}

namespace {

Cell ahead(const Observation& obs) {
  Cell c = obs.self_position;
  if (obs.self_heading == Heading::East) {
    c.col += 1;
  } else {
    c.row += 1;
  }
  return c;
}

Decision go_unless_blocked(const Observation& obs, DecisionSource source) {
  return Decision{obs.occupied(ahead(obs)) ? Action::Stop : Action::Go, source};
}

// The strategic vehicle that starts on the second lane column opens the gap
// and joins the other lane.
const VehicleRoute* platoon_joiner(const ScenarioSpec& spec) {
  for (const auto& r : spec.routes) {
    if (r.role == Role::Strategic && r.start.col == spec.lanes[1]) return &r;
  }
  return nullptr;
}

Decision intersection_rule(const Observation& obs, const ScenarioSpec& spec) {
  const Cell conflict = spec.conflict_cells.empty() ? Cell{5, 5} : spec.conflict_cells.front();
  const Cell my_approach = obs.self_heading == Heading::East
                               ? Cell{conflict.row, conflict.col - 1}
                               : Cell{conflict.row - 1, conflict.col};

  // Green crosses first; only the non-prioritized agent yields.
  const bool other_has_priority = obs.self_color == "red";
  if (other_has_priority && obs.self_position == my_approach) {
    for (const auto& r : spec.routes) {
      if (r.role != Role::Strategic || r.color == obs.self_color) continue;
      for (const auto& [color, pos] : obs.others) {
        if (color != r.color) continue;
        const bool before_conflict = r.heading == Heading::East ? pos.col < conflict.col
                                                                : pos.row < conflict.row;
        if (before_conflict) {
          return Decision{Action::Stop, DecisionSource::RuleBased};
        }
      }
    }
  }
  return go_unless_blocked(obs, DecisionSource::RuleBased);
}

Decision platoon_rule(const Observation& obs, const ScenarioSpec& spec) {
  const VehicleRoute* joiner = platoon_joiner(spec);
  const bool i_am_joiner = joiner && joiner->color == obs.self_color;
  const bool still_home = obs.self_position.col == spec.lanes[1];
  if (i_am_joiner && still_home) {
    if (obs.time_step == 0) {
      // Fall one cell behind so the neighbouring lane cell frees up.
      return Decision{Action::Stop, DecisionSource::RuleBased};
    }
    const Cell target{obs.self_position.row, spec.other_lane(obs.self_position.col)};
    const Cell upstream{target.row - 1, target.col};
    if (!obs.occupied(target) && !obs.occupied(upstream)) {
      return Decision{Action::LaneChange, DecisionSource::RuleBased};
    }
  }
  return go_unless_blocked(obs, DecisionSource::RuleBased);
}

}  // namespace

Decision background_policy(const Observation& obs) {
  return go_unless_blocked(obs, DecisionSource::Scripted);
}

Decision rule_based_strategic(const Observation& obs, const ScenarioSpec& spec) {
  if (spec.name == ScenarioKind::Intersection) {
    return intersection_rule(obs, spec);
  }
  return platoon_rule(obs, spec);
}

Decision always_go_policy(const Observation&) {
  return Decision{Action::Go, DecisionSource::Scripted};
}

Decision always_stop_policy(const Observation&) {
  return Decision{Action::Stop, DecisionSource::Scripted};
}

}  // namespace normsim
