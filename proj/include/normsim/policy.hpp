#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "normsim/scenario.hpp"
#include "normsim/types.hpp"
#include "normsim/world.hpp"

namespace normsim {

/// An agent's private view of one time step: own position, heading and
/// cumulative reward, plus the locations (only) of every non-completed other
/// vehicle.
struct Observation {
  VehicleId self_id;
  std::string self_color;
  Cell self_position;
  Heading self_heading = Heading::East;
  int self_cumulative_reward = 0;
  std::vector<std::pair<std::string, Cell>> others;  // (color, position), sorted
  int time_step = 0;
  std::vector<Action> legal;

  bool occupied(Cell c) const;
};

struct Decision {
  Action action = Action::Stop;
  DecisionSource source = DecisionSource::Scripted;
  std::optional<std::string> raw_response;
  std::optional<std::chrono::milliseconds> latency;
};

Observation observe(const WorldState& state, const VehicleId& id, const ScenarioSpec& spec);

/// Predetermined background rule: Go when the next cell along the heading is
/// unoccupied, otherwise Stop.
Decision background_policy(const Observation& obs);

/// Offline strategic baseline.
/// Intersection: green has priority; a vehicle stops at its approach cell
/// while the prioritized other agent has not yet reached the conflict cell,
/// and otherwise goes unless the next cell is occupied. Platoon: the lane-2
/// starter stops once at step 0, changes into the other lane at the first
/// later step where the target cell is free and nothing is about to enter it,
/// then both agents go unless blocked.
Decision rule_based_strategic(const Observation& obs, const ScenarioSpec& spec);

Decision always_go_policy(const Observation& obs);
Decision always_stop_policy(const Observation& obs);

}  // namespace normsim
