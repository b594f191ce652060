#pragma once

#include <optional>
#include <vector>

#include "normsim/jsonio.hpp"
#include "normsim/types.hpp"

namespace normsim {

struct VehicleState;
struct WorldState;

/// Per-step reward table. Lane-change cost and platoon bonus are only
/// meaningful in scenarios that declare lanes.
struct RewardSpec {
  int go_cost = -2;
  int stop_cost = -2;
  std::optional<int> lane_change_cost;
  int crash_penalty = -5;
  std::optional<int> platoon_bonus;

  bool operator==(const RewardSpec&) const = default;
};

/// Partial reward table applied on top of a scenario's defaults.
struct RewardOverrides {
  std::optional<int> go_cost;
  std::optional<int> stop_cost;
  std::optional<int> lane_change_cost;
  std::optional<int> crash_penalty;
  std::optional<int> platoon_bonus;
};

struct VehicleRoute {
  VehicleId id;
  std::string color;
  Role role = Role::Strategic;
  Heading heading = Heading::East;
  Cell start;
  Cell goal;  // completion cell: reaching its row (South) or column (East) ends the trip

  bool operator==(const VehicleRoute&) const = default;
};

struct ScenarioSpec {
  ScenarioKind name = ScenarioKind::Intersection;
  int rows = 9;
  int cols = 9;
  std::vector<VehicleRoute> routes;  // sorted by id
  RewardSpec reward;
  std::vector<Cell> conflict_cells;
  std::vector<int> lanes;  // parallel lane columns; empty when the scenario has none
  std::optional<int> max_platoon_gap;  // nullopt: same lane suffices at any gap
  int n_background = 0;
  int step_cap = 30;
  bool swap_is_crash = true;

  bool operator==(const ScenarioSpec&) const = default;

  const VehicleRoute* route(const VehicleId& id) const;
  int other_lane(int col) const;
};

/// 9x9 crossing of an eastbound road (row 5, green agent) and a southbound
/// road (column 5, red agent) meeting at (5,5). Background vehicles fill
/// deterministic slots; more than 4 is accepted with a warning.
ScenarioSpec build_intersection(int n_background, const RewardOverrides& overrides = {});

/// 9-row two-lane southbound highway; red starts in lane 1, green in lane 2.
ScenarioSpec build_platoon(int n_background, const RewardOverrides& overrides = {});

/// Rejects overlapping spawns, off-route start/goal cells, bad grids and
/// reward tables that make a crash preferable to driving.
void validate_spec(const ScenarioSpec& spec);

std::vector<Action> legal_actions(const ScenarioSpec& spec, const VehicleState& vehicle);

/// True iff at least two strategic vehicles are active, all of them share a
/// lane column, and consecutive longitudinal gaps respect max_platoon_gap.
bool is_platoon(const WorldState& state, const ScenarioSpec& spec);

Json scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const Json& j);

Json reward_overrides_to_json(const RewardOverrides& o);
RewardOverrides reward_overrides_from_json(const Json& j, const std::string& context);

}  // namespace normsim
