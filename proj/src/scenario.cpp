#include "normsim/scenario.hpp"

#include <algorithm>
#include <iostream>
#include <set>

#include "normsim/errors.hpp"
#include "normsim/world.hpp"

namespace normsim {

namespace {

// Deterministic background slots, filled in id order. Road-1 slots sit
// downstream of the green agent; road-2 slots sit south of the conflict cell,
// so background traffic never contends for (5,5) after the strategic agents
// start negotiating it. Editable by writing the full scenario document.
constexpr Cell kIntersectionRoad1Slots[] = {{5, 3}, {5, 7}, {5, 2}, {5, 8}};
constexpr Cell kIntersectionRoad2Slots[] = {{7, 5}, {6, 5}, {8, 5}};
constexpr int kPlatoonLaneSlots[] = {4, 7, 2, 6};

RewardSpec apply_overrides(RewardSpec base, const RewardOverrides& o) {
  if (o.go_cost) base.go_cost = *o.go_cost;
  if (o.stop_cost) base.stop_cost = *o.stop_cost;
  if (o.lane_change_cost) base.lane_change_cost = *o.lane_change_cost;
  if (o.crash_penalty) base.crash_penalty = *o.crash_penalty;
  if (o.platoon_bonus) base.platoon_bonus = *o.platoon_bonus;
  return base;
}

void sort_routes(ScenarioSpec& spec) {
  std::sort(spec.routes.begin(), spec.routes.end(),
            [](const VehicleRoute& a, const VehicleRoute& b) { return a.id < b.id; });
}

}  // namespace

const VehicleRoute* ScenarioSpec::route(const VehicleId& id) const {
  for (const auto& r : routes) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

int ScenarioSpec::other_lane(int col) const {
  if (lanes.size() != 2) {
    throw IllegalAction("IllegalAction: scenario declares no lane pair");
  }
  return lanes[0] + lanes[1] - col;
}

ScenarioSpec build_intersection(int n_background, const RewardOverrides& overrides) {
  if (n_background < 0) {
    throw ConfigError("ConfigError: n_background must be >= 0");
  }
  if (n_background > 4) {
    std::cerr << "warning: intersection scenario with " << n_background
              << " background vehicles is outside the usual 0-4 range\n";
  }

  ScenarioSpec spec;
  spec.name = ScenarioKind::Intersection;
  spec.rows = 9;
  spec.cols = 9;
  spec.reward = apply_overrides(RewardSpec{-2, -2, std::nullopt, -5, std::nullopt}, overrides);
  spec.conflict_cells = {Cell{5, 5}};
  spec.n_background = n_background;

  spec.routes.push_back({"green", "green", Role::Strategic, Heading::East, {5, 1}, {5, 9}});
  spec.routes.push_back({"red", "red", Role::Strategic, Heading::South, {1, 5}, {9, 5}});

  std::size_t used1 = 0;
  std::size_t used2 = 0;
  for (int i = 0; i < n_background; ++i) {
    const bool road1 = (i % 2 == 0);
    VehicleRoute bv;
    bv.id = "bv" + std::to_string(i + 1);
    bv.color = "white";
    bv.role = Role::Background;
    if (road1) {
      if (used1 >= std::size(kIntersectionRoad1Slots)) {
        throw SpawnOverflow("SpawnOverflow: no free road-1 slot for " + bv.id);
      }
      bv.heading = Heading::East;
      bv.start = kIntersectionRoad1Slots[used1++];
      bv.goal = Cell{5, 9};
    } else {
      if (used2 >= std::size(kIntersectionRoad2Slots)) {
        throw SpawnOverflow("SpawnOverflow: no free road-2 slot for " + bv.id);
      }
      bv.heading = Heading::South;
      bv.start = kIntersectionRoad2Slots[used2++];
      bv.goal = Cell{9, 5};
    }
    spec.routes.push_back(bv);
  }

  sort_routes(spec);
  validate_spec(spec);
  return spec;
}

ScenarioSpec build_platoon(int n_background, const RewardOverrides& overrides) {
  if (n_background < 0) {
    throw ConfigError("ConfigError: n_background must be >= 0");
  }
  if (n_background > 4) {
    std::cerr << "warning: platoon scenario with " << n_background
              << " background vehicles is outside the usual 0-4 range\n";
  }

  ScenarioSpec spec;
  spec.name = ScenarioKind::Platoon;
  spec.rows = 9;
  spec.cols = 2;
  spec.reward = apply_overrides(RewardSpec{-4, -4, -4, -5, 2}, overrides);
  spec.lanes = {1, 2};
  spec.n_background = n_background;

  spec.routes.push_back({"red", "red", Role::Strategic, Heading::South, {1, 1}, {9, 1}});
  spec.routes.push_back({"green", "green", Role::Strategic, Heading::South, {1, 2}, {9, 2}});

  std::size_t used[2] = {0, 0};
  for (int i = 0; i < n_background; ++i) {
    const int lane_idx = i % 2;
    if (used[lane_idx] >= std::size(kPlatoonLaneSlots)) {
      throw SpawnOverflow("SpawnOverflow: no free lane slot for bv" + std::to_string(i + 1));
    }
    VehicleRoute bv;
    bv.id = "bv" + std::to_string(i + 1);
    bv.color = "white";
    bv.role = Role::Background;
    bv.heading = Heading::South;
    const int lane = spec.lanes[lane_idx];
    bv.start = Cell{kPlatoonLaneSlots[used[lane_idx]++], lane};
    bv.goal = Cell{9, lane};
    spec.routes.push_back(bv);
  }

  sort_routes(spec);
  validate_spec(spec);
  return spec;
}

void validate_spec(const ScenarioSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) {
    throw ConfigError("ConfigError: grid must have at least one row and column");
  }
  if (spec.step_cap < 1) {
    throw ConfigError("ConfigError: step_cap must be >= 1");
  }
  if (!spec.lanes.empty()) {
    if (spec.lanes.size() != 2 || spec.lanes[0] == spec.lanes[1]) {
      throw ConfigError("ConfigError: lanes must name two distinct columns");
    }
    for (int lane : spec.lanes) {
      if (lane < 1 || lane > spec.cols) {
        throw ConfigError("ConfigError: lane column out of range");
      }
    }
  }

  int min_cost = std::min(spec.reward.go_cost, spec.reward.stop_cost);
  if (spec.reward.lane_change_cost) min_cost = std::min(min_cost, *spec.reward.lane_change_cost);
  if (spec.reward.crash_penalty > min_cost) {
    throw ConfigError("ConfigError: crash_penalty must not exceed any action cost");
  }

  std::set<VehicleId> ids;
  std::set<Cell> spawns;
  int backgrounds = 0;
  for (const auto& r : spec.routes) {
    if (!ids.insert(r.id).second) {
      throw ConfigError("ConfigError: duplicate vehicle id '" + r.id + "'");
    }
    if (!spawns.insert(r.start).second) {
      throw SpawnOverflow("SpawnOverflow: two vehicles spawn at " + format_cell(r.start));
    }
    auto on_grid = [&](Cell c) {
      return c.row >= 1 && c.row <= spec.rows && c.col >= 1 && c.col <= spec.cols;
    };
    if (!on_grid(r.start) || !on_grid(r.goal)) {
      throw ConfigError("ConfigError: route of '" + r.id + "' leaves the grid");
    }
    if (r.heading == Heading::East) {
      if (r.start.row != r.goal.row || r.start.col >= r.goal.col) {
        throw ConfigError("ConfigError: eastbound route of '" + r.id + "' is not a forward row segment");
      }
    } else {
      // Southbound goals are reached by row; with lanes the column may differ.
      if (spec.lanes.empty() && r.start.col != r.goal.col) {
        throw ConfigError("ConfigError: southbound route of '" + r.id + "' changes column without lanes");
      }
      if (r.start.row >= r.goal.row) {
        throw ConfigError("ConfigError: southbound route of '" + r.id + "' is not a forward column segment");
      }
    }
    if (r.role == Role::Background) ++backgrounds;
  }
  if (backgrounds != spec.n_background) {
    throw ConfigError("ConfigError: n_background does not match the background routes");
  }
  if (spec.max_platoon_gap && *spec.max_platoon_gap < 1) {
    throw ConfigError("ConfigError: max_platoon_gap must be >= 1");
  }
}

std::vector<Action> legal_actions(const ScenarioSpec& spec, const VehicleState& vehicle) {
  if (vehicle.status != VehicleStatus::Active) return {};
  std::vector<Action> out{Action::Go, Action::Stop};
  if (spec.lanes.size() == 2) out.push_back(Action::LaneChange);
  return out;
}

bool is_platoon(const WorldState& state, const ScenarioSpec& spec) {
  if (spec.name != ScenarioKind::Platoon) {
    throw WrongScenario("WrongScenario: is_platoon applies to the platoon scenario only");
  }
  std::vector<const VehicleState*> strategic;
  for (const auto& v : state.vehicles) {
    if (v.role == Role::Strategic && v.status == VehicleStatus::Active) {
      strategic.push_back(&v);
    }
  }
  if (strategic.size() < 2) return false;
  const int lane = strategic.front()->position.col;
  for (const auto* v : strategic) {
    if (v->position.col != lane) return false;
  }
  if (spec.max_platoon_gap) {
    std::vector<int> rows;
    rows.reserve(strategic.size());
    for (const auto* v : strategic) rows.push_back(v->position.row);
    std::sort(rows.begin(), rows.end());
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i] - rows[i - 1] > *spec.max_platoon_gap) return false;
    }
  }
  return true;
}

Json scenario_to_json(const ScenarioSpec& spec) {
  Json j;
  j["name"] = to_string(spec.name);
  j["grid"] = Json{{"rows", spec.rows}, {"cols", spec.cols}};
  Json routes = Json::array();
  for (const auto& r : spec.routes) {
    Json rj;
    rj["id"] = r.id;
    rj["color"] = r.color;
    rj["role"] = to_string(r.role);
    rj["heading"] = to_string(r.heading);
    rj["start"] = cell_to_json(r.start);
    rj["goal"] = cell_to_json(r.goal);
    routes.push_back(rj);
  }
  j["routes"] = routes;
  Json rw;
  rw["go_cost"] = spec.reward.go_cost;
  rw["stop_cost"] = spec.reward.stop_cost;
  if (spec.reward.lane_change_cost) rw["lane_change_cost"] = *spec.reward.lane_change_cost;
  rw["crash_penalty"] = spec.reward.crash_penalty;
  if (spec.reward.platoon_bonus) rw["platoon_bonus"] = *spec.reward.platoon_bonus;
  j["reward"] = rw;
  Json conflicts = Json::array();
  for (Cell c : spec.conflict_cells) conflicts.push_back(cell_to_json(c));
  j["conflict_cells"] = conflicts;
  j["lanes"] = spec.lanes;
  if (spec.max_platoon_gap) {
    j["max_platoon_gap"] = *spec.max_platoon_gap;
  } else {
    j["max_platoon_gap"] = nullptr;
  }
  j["n_background"] = spec.n_background;
  j["step_cap"] = spec.step_cap;
  j["swap_is_crash"] = spec.swap_is_crash;
  return j;
}

ScenarioSpec scenario_from_json(const Json& j) {
  expect_fields(j,
                {"name", "grid", "routes", "reward", "conflict_cells", "lanes",
                 "max_platoon_gap", "n_background", "step_cap", "swap_is_crash"},
                "scenario");
  ScenarioSpec spec;
  spec.name = scenario_kind_from_string(require(j, "name", "scenario").get<std::string>());
  const Json& grid = require(j, "grid", "scenario");
  expect_fields(grid, {"rows", "cols"}, "scenario.grid");
  spec.rows = require(grid, "rows", "scenario.grid").get<int>();
  spec.cols = require(grid, "cols", "scenario.grid").get<int>();

  for (const Json& rj : require(j, "routes", "scenario")) {
    expect_fields(rj, {"id", "color", "role", "heading", "start", "goal"}, "scenario.routes[]");
    VehicleRoute r;
    r.id = require(rj, "id", "route").get<std::string>();
    r.color = require(rj, "color", "route").get<std::string>();
    r.role = role_from_string(require(rj, "role", "route").get<std::string>());
    r.heading = heading_from_string(require(rj, "heading", "route").get<std::string>());
    r.start = cell_from_json(require(rj, "start", "route"), "route.start");
    r.goal = cell_from_json(require(rj, "goal", "route"), "route.goal");
    spec.routes.push_back(r);
  }
  sort_routes(spec);

  const Json& rw = require(j, "reward", "scenario");
  expect_fields(rw, {"go_cost", "stop_cost", "lane_change_cost", "crash_penalty", "platoon_bonus"},
                "scenario.reward");
  spec.reward.go_cost = require(rw, "go_cost", "reward").get<int>();
  spec.reward.stop_cost = require(rw, "stop_cost", "reward").get<int>();
  if (rw.contains("lane_change_cost")) spec.reward.lane_change_cost = rw["lane_change_cost"].get<int>();
  spec.reward.crash_penalty = require(rw, "crash_penalty", "reward").get<int>();
  if (rw.contains("platoon_bonus")) spec.reward.platoon_bonus = rw["platoon_bonus"].get<int>();

  for (const Json& cj : require(j, "conflict_cells", "scenario")) {
    spec.conflict_cells.push_back(cell_from_json(cj, "conflict_cells[]"));
  }
  spec.lanes = require(j, "lanes", "scenario").get<std::vector<int>>();
  const Json& gap = require(j, "max_platoon_gap", "scenario");
  if (!gap.is_null()) spec.max_platoon_gap = gap.get<int>();
  spec.n_background = require(j, "n_background", "scenario").get<int>();
  spec.step_cap = require(j, "step_cap", "scenario").get<int>();
  spec.swap_is_crash = require(j, "swap_is_crash", "scenario").get<bool>();

  validate_spec(spec);
  return spec;
}

Json reward_overrides_to_json(const RewardOverrides& o) {
  Json j = Json::object();
  if (o.go_cost) j["go_cost"] = *o.go_cost;
  if (o.stop_cost) j["stop_cost"] = *o.stop_cost;
  if (o.lane_change_cost) j["lane_change_cost"] = *o.lane_change_cost;
  if (o.crash_penalty) j["crash_penalty"] = *o.crash_penalty;
  if (o.platoon_bonus) j["platoon_bonus"] = *o.platoon_bonus;
  return j;
}

RewardOverrides reward_overrides_from_json(const Json& j, const std::string& context) {
  expect_fields(j, {"go_cost", "stop_cost", "lane_change_cost", "crash_penalty", "platoon_bonus"},
                context);
  RewardOverrides o;
  if (j.contains("go_cost")) o.go_cost = j["go_cost"].get<int>();
  if (j.contains("stop_cost")) o.stop_cost = j["stop_cost"].get<int>();
  if (j.contains("lane_change_cost")) o.lane_change_cost = j["lane_change_cost"].get<int>();
  if (j.contains("crash_penalty")) o.crash_penalty = j["crash_penalty"].get<int>();
  if (j.contains("platoon_bonus")) o.platoon_bonus = j["platoon_bonus"].get<int>();
  return o;
}

}  // namespace normsim
