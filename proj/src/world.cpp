#include "normsim/world.hpp"

#include <algorithm>
#include <map>

#include "normsim/errors.hpp"

namespace normsim {

const VehicleState* WorldState::find(const VehicleId& id) const {
  for (const auto& v : vehicles) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

VehicleState* WorldState::find(const VehicleId& id) {
  for (auto& v : vehicles) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

std::vector<const VehicleState*> WorldState::active() const {
  std::vector<const VehicleState*> out;
  for (const auto& v : vehicles) {
    if (v.status == VehicleStatus::Active) out.push_back(&v);
  }
  return out;
}

WorldState initial_state(const ScenarioSpec& spec) {
  WorldState state;
  for (const auto& r : spec.routes) {
    VehicleState v;
    v.id = r.id;
    v.color = r.color;
    v.role = r.role;
    v.position = r.start;
    v.heading = r.heading;
    state.vehicles.push_back(v);
  }
  return state;
}

Cell intended_cell(const VehicleState& vehicle, Action action, const ScenarioSpec& spec) {
  switch (action) {
    case Action::Stop:
      return vehicle.position;
    case Action::Go: {
      Cell next = vehicle.position;
      if (vehicle.heading == Heading::East) {
        next.col += 1;
      } else {
        next.row += 1;
      }
      if (next.row > spec.rows || next.col > spec.cols) {
        throw IllegalAction("IllegalAction: '" + vehicle.id + "' would drive off the grid");
      }
      return next;
    }
    case Action::LaneChange: {
      if (spec.lanes.size() != 2) {
        throw IllegalAction("IllegalAction: lane change in a scenario without lanes");
      }
      if (vehicle.position.col != spec.lanes[0] && vehicle.position.col != spec.lanes[1]) {
        throw IllegalAction("IllegalAction: '" + vehicle.id + "' is not on a lane column");
      }
      return Cell{vehicle.position.row, spec.other_lane(vehicle.position.col)};
    }
  }
  return vehicle.position;
}

namespace {

bool reached_goal(const VehicleState& v, const VehicleRoute& route) {
  return v.heading == Heading::East ? v.position.col == route.goal.col
                                    : v.position.row == route.goal.row;
}

int action_cost(Action a, const RewardSpec& reward) {
  switch (a) {
    case Action::Go: return reward.go_cost;
    case Action::Stop: return reward.stop_cost;
    case Action::LaneChange:
      if (!reward.lane_change_cost) {
        throw IllegalAction("IllegalAction: scenario has no lane-change cost");
      }
      return *reward.lane_change_cost;
  }
  return reward.stop_cost;
}

}  // namespace

StepOutcome apply_actions(const WorldState& state,
                          const std::map<VehicleId, Action>& actions,
                          const ScenarioSpec& spec) {
  if (state.terminal_flag != TerminalFlag::Running) {
    throw StaleState("StaleState: apply_actions called on a terminal state");
  }

  std::vector<const VehicleState*> movers = state.active();
  for (const auto* v : movers) {
    if (!actions.count(v->id)) {
      throw MissingAction("MissingAction: no action for active vehicle '" + v->id + "'");
    }
  }
  for (const auto& [id, action] : actions) {
    const VehicleState* v = state.find(id);
    if (!v) throw UnknownVehicle("UnknownVehicle: '" + id + "' has an action but no state");
    if (v->status != VehicleStatus::Active) {
      throw MissingAction("MissingAction: action supplied for non-active vehicle '" + id + "'");
    }
  }

  // Everyone's target is computed from the pre-step state; a Stop claims the
  // current cell.
  std::map<VehicleId, Cell> target;
  std::map<Cell, int> claims;
  for (const auto* v : movers) {
    Cell c = intended_cell(*v, actions.at(v->id), spec);
    target[v->id] = c;
    claims[c] += 1;
  }

  std::set<VehicleId> crashed;
  for (const auto* v : movers) {
    if (claims[target[v->id]] >= 2) crashed.insert(v->id);
  }
  if (spec.swap_is_crash) {
    for (const auto* a : movers) {
      for (const auto* b : movers) {
        if (a->id >= b->id) continue;
        const bool both_move = target[a->id] != a->position && target[b->id] != b->position;
        if (both_move && target[a->id] == b->position && target[b->id] == a->position) {
          crashed.insert(a->id);
          crashed.insert(b->id);
        }
      }
    }
  }

  StepOutcome out;
  out.next_state = state;
  out.next_state.time_step = state.time_step + 1;
  out.crash_ids = crashed;

  for (const auto* mover : movers) {
    VehicleState* v = out.next_state.find(mover->id);
    v->position = target[v->id];
    if (crashed.count(v->id)) {
      v->status = VehicleStatus::Crashed;
      continue;
    }
    const VehicleRoute* route = spec.route(v->id);
    if (route && reached_goal(*v, *route)) {
      v->status = VehicleStatus::Completed;
      out.completed_ids.insert(v->id);
    }
  }

  for (const auto* mover : movers) {
    int reward = crashed.count(mover->id) ? spec.reward.crash_penalty
                                          : action_cost(actions.at(mover->id), spec.reward);
    out.per_vehicle_reward[mover->id] = reward;
  }

  // Platoon bonus accrues per strategic vehicle still active when the
  // end-of-step state forms a platoon.
  if (spec.name == ScenarioKind::Platoon && spec.reward.platoon_bonus &&
      *spec.reward.platoon_bonus != 0 && is_platoon(out.next_state, spec)) {
    for (const auto& v : out.next_state.vehicles) {
      if (v.role == Role::Strategic && v.status == VehicleStatus::Active) {
        out.per_vehicle_reward[v.id] += *spec.reward.platoon_bonus;
      }
    }
  }

  for (const auto& [id, reward] : out.per_vehicle_reward) {
    out.next_state.find(id)->cumulative_reward += reward;
  }

  bool any_crashed = false;
  bool all_completed = true;
  for (const auto& v : out.next_state.vehicles) {
    if (v.status == VehicleStatus::Crashed) any_crashed = true;
    if (v.status != VehicleStatus::Completed) all_completed = false;
  }
  if (any_crashed) {
    out.next_state.terminal_flag = TerminalFlag::CrashOccurred;
  } else if (all_completed) {
    out.next_state.terminal_flag = TerminalFlag::AllCompleted;
  } else if (out.next_state.time_step >= spec.step_cap) {
    out.next_state.terminal_flag = TerminalFlag::TimedOut;
  }
  return out;
}

bool is_terminal(const WorldState& state) {
  return state.terminal_flag != TerminalFlag::Running;
}

Json state_to_json(const WorldState& state) {
  Json j;
  j["time_step"] = state.time_step;
  j["terminal_flag"] = to_string(state.terminal_flag);
  Json vehicles = Json::array();
  for (const auto& v : state.vehicles) {  // already sorted by id
    Json vj;
    vj["id"] = v.id;
    vj["color"] = v.color;
    vj["role"] = to_string(v.role);
    vj["position"] = cell_to_json(v.position);
    vj["heading"] = to_string(v.heading);
    vj["cumulative_reward"] = v.cumulative_reward;
    vj["status"] = to_string(v.status);
    vehicles.push_back(vj);
  }
  j["vehicles"] = vehicles;
  return j;
}

WorldState state_from_json(const Json& j) {
  expect_fields(j, {"time_step", "terminal_flag", "vehicles"}, "world state");
  WorldState state;
  state.time_step = require(j, "time_step", "world state").get<int>();
  state.terminal_flag = terminal_from_string(require(j, "terminal_flag", "world state").get<std::string>());
  for (const Json& vj : require(j, "vehicles", "world state")) {
    expect_fields(vj, {"id", "color", "role", "position", "heading", "cumulative_reward", "status"},
                  "vehicle state");
    VehicleState v;
    v.id = require(vj, "id", "vehicle").get<std::string>();
    v.color = require(vj, "color", "vehicle").get<std::string>();
    v.role = role_from_string(require(vj, "role", "vehicle").get<std::string>());
    v.position = cell_from_json(require(vj, "position", "vehicle"), "vehicle.position");
    v.heading = heading_from_string(require(vj, "heading", "vehicle").get<std::string>());
    v.cumulative_reward = require(vj, "cumulative_reward", "vehicle").get<int>();
    v.status = status_from_string(require(vj, "status", "vehicle").get<std::string>());
    state.vehicles.push_back(v);
  }
  return state;
}

Json outcome_to_json(const StepOutcome& outcome) {
  Json j;
  j["next_state"] = state_to_json(outcome.next_state);
  Json rewards = Json::object();
  for (const auto& [id, r] : outcome.per_vehicle_reward) rewards[id] = r;
  j["per_vehicle_reward"] = rewards;
  j["crash_ids"] = outcome.crash_ids;
  j["completed_ids"] = outcome.completed_ids;
  return j;
}

StepOutcome outcome_from_json(const Json& j) {
  expect_fields(j, {"next_state", "per_vehicle_reward", "crash_ids", "completed_ids"}, "step outcome");
  StepOutcome out;
  out.next_state = state_from_json(require(j, "next_state", "outcome"));
  for (auto it = require(j, "per_vehicle_reward", "outcome").begin();
       it != j["per_vehicle_reward"].end(); ++it) {
    out.per_vehicle_reward[it.key()] = it.value().get<int>();
  }
  for (const Json& id : require(j, "crash_ids", "outcome")) out.crash_ids.insert(id.get<std::string>());
  for (const Json& id : require(j, "completed_ids", "outcome")) {
    out.completed_ids.insert(id.get<std::string>());
  }
  return out;
}

std::string canonical_text(const WorldState& state) {
  return state_to_json(state).dump();
}

}  // namespace normsim
