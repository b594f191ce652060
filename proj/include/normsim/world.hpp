#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "normsim/jsonio.hpp"
#include "normsim/scenario.hpp"
#include "normsim/types.hpp"

namespace normsim {

struct VehicleState {
  VehicleId id;
  std::string color;
  Role role = Role::Strategic;
  Cell position;
  Heading heading = Heading::East;
  int cumulative_reward = 0;
  VehicleStatus status = VehicleStatus::Active;

  bool operator==(const VehicleState&) const = default;
};

struct WorldState {
  int time_step = 0;
  std::vector<VehicleState> vehicles;  // sorted by id
  TerminalFlag terminal_flag = TerminalFlag::Running;

  bool operator==(const WorldState&) const = default;

  const VehicleState* find(const VehicleId& id) const;
  VehicleState* find(const VehicleId& id);
  std::vector<const VehicleState*> active() const;
};

struct StepOutcome {
  WorldState next_state;
  std::map<VehicleId, int> per_vehicle_reward;  // exactly the ids active at step start
  std::set<VehicleId> crash_ids;
  std::set<VehicleId> completed_ids;  // newly completed this step
};

WorldState initial_state(const ScenarioSpec& spec);

/// Cell the vehicle would occupy after `action`, ignoring every other vehicle.
/// Go advances one cell along the heading, Stop stays put, LaneChange moves
/// sideways into the same row of the other lane.
Cell intended_cell(const VehicleState& vehicle, Action action, const ScenarioSpec& spec);

/// One simultaneous transition. All intended cells are computed from the
/// pre-step state; any cell claimed twice crashes all claimants, and a pair
/// exchanging cells crashes both (when spec.swap_is_crash). Survivors move,
/// rewards are assigned from the scenario table (crash penalty replaces the
/// action cost; the platoon bonus is added per active strategic vehicle when
/// the end-of-step state forms a platoon), vehicles reaching their goal
/// become Completed, and the terminal flag and time step are updated.
StepOutcome apply_actions(const WorldState& state,
                          const std::map<VehicleId, Action>& actions,
                          const ScenarioSpec& spec);

bool is_terminal(const WorldState& state);

Json state_to_json(const WorldState& state);
WorldState state_from_json(const Json& j);
Json outcome_to_json(const StepOutcome& outcome);
StepOutcome outcome_from_json(const Json& j);

/// Canonical deterministic text form (stable key order) used by logs and
/// the determinism tests.
std::string canonical_text(const WorldState& state);

}  // namespace normsim
