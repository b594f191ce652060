#include "normsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "normsim/errors.hpp"

namespace normsim {

namespace {

const VehicleRoute* strategic_route_by_color(const ScenarioSpec& spec, const std::string& color) {
  for (const auto& r : spec.routes) {
    if (r.role == Role::Strategic && r.color == color) return &r;
  }
  return nullptr;
}

Cell conflict_cell(const ScenarioSpec& spec) {
  if (spec.conflict_cells.empty()) {
    throw WrongScenario("WrongScenario: scenario declares no conflict cell");
  }
  return spec.conflict_cells.front();
}

Cell approach_cell(const VehicleRoute& route, Cell conflict) {
  return route.heading == Heading::East ? Cell{conflict.row, conflict.col - 1}
                                        : Cell{conflict.row - 1, conflict.col};
}

bool before_conflict(const VehicleRoute& route, Cell pos, Cell conflict) {
  return route.heading == Heading::East ? pos.col < conflict.col : pos.row < conflict.row;
}

// State sequence indexed by time step: element 0 is the initial state.
std::vector<const WorldState*> state_sequence(const EpisodeLog& log, WorldState& initial) {
  initial = initial_state(log.config.scenario);
  std::vector<const WorldState*> states{&initial};
  for (const auto& step : log.steps) states.push_back(&step.outcome.next_state);
  return states;
}

int first_at_conflict(const std::vector<const WorldState*>& states, const VehicleId& id,
                      Cell conflict) {
  for (std::size_t i = 0; i < states.size(); ++i) {
    const VehicleState* v = states[i]->find(id);
    if (v && v->position == conflict && v->status != VehicleStatus::Completed) {
      return static_cast<int>(i);
    }
  }
  return std::numeric_limits<int>::max();
}

}  // namespace

int count_early_stops(const EpisodeLog& log, const std::string& color) {
  const ScenarioSpec& spec = log.config.scenario;
  if (spec.name != ScenarioKind::Intersection) {
    throw WrongScenario("WrongScenario: early stops are an intersection metric");
  }
  const VehicleRoute* route = strategic_route_by_color(spec, color);
  if (!route) throw UnknownVehicle("UnknownVehicle: no strategic vehicle colored '" + color + "'");
  const Cell conflict = conflict_cell(spec);
  const Cell approach = approach_cell(*route, conflict);

  int count = 0;
  for (const auto& step : log.steps) {
    auto it = step.agents.find(route->id);
    if (it == step.agents.end()) continue;
    const AgentRecord& agent = it->second;
    if (agent.decision.action != Action::Stop) continue;
    const Cell pos = agent.observation.self_position;
    if (before_conflict(*route, pos, conflict) && pos != approach) ++count;
  }
  return count;
}

bool norm_adherence(const EpisodeLog& log) {
  if (log.config.scenario.name != ScenarioKind::Intersection) {
    throw WrongScenario("WrongScenario: norm adherence is an intersection metric");
  }
  return log.outcome == EpisodeOutcome::AllCompleted;
}

std::vector<std::pair<std::string, int>> yield_events(const EpisodeLog& log) {
  const ScenarioSpec& spec = log.config.scenario;
  if (spec.name != ScenarioKind::Intersection) {
    throw WrongScenario("WrongScenario: yield events are an intersection metric");
  }
  const Cell conflict = conflict_cell(spec);

  WorldState initial;
  const auto states = state_sequence(log, initial);

  std::vector<std::pair<std::string, int>> events;
  for (const auto& me : spec.routes) {
    if (me.role != Role::Strategic) continue;
    const VehicleRoute* other = nullptr;
    for (const auto& r : spec.routes) {
      if (r.role == Role::Strategic && r.id != me.id) other = &r;
    }
    if (!other) continue;
    const int my_cross = first_at_conflict(states, me.id, conflict);
    const int other_cross = first_at_conflict(states, other->id, conflict);
    if (other_cross == std::numeric_limits<int>::max() || other_cross > my_cross) continue;
    const Cell approach = approach_cell(me, conflict);
    for (const auto& step : log.steps) {
      auto it = step.agents.find(me.id);
      if (it == step.agents.end()) continue;
      if (it->second.decision.action == Action::Stop &&
          it->second.observation.self_position == approach && step.time_step < other_cross) {
        events.emplace_back(me.color, step.time_step);
      }
    }
  }
  std::sort(events.begin(), events.end(),
            [](const auto& a, const auto& b) { return std::tie(a.second, a.first) < std::tie(b.second, b.first); });
  return events;
}

std::vector<std::pair<std::string, int>> lane_change_events(const EpisodeLog& log) {
  const ScenarioSpec& spec = log.config.scenario;
  if (spec.name != ScenarioKind::Platoon) {
    throw WrongScenario("WrongScenario: lane changes are a platoon metric");
  }
  std::vector<std::pair<std::string, int>> events;
  for (const auto& step : log.steps) {
    for (const auto& [id, agent] : step.agents) {
      const VehicleRoute* route = spec.route(id);
      if (!route || route->role != Role::Strategic) continue;
      if (agent.decision.action != Action::LaneChange) continue;
      if (step.outcome.crash_ids.count(id)) continue;  // not executed: the step crashed it
      events.emplace_back(route->color, step.time_step);
    }
  }
  std::sort(events.begin(), events.end(),
            [](const auto& a, const auto& b) { return std::tie(a.second, a.first) < std::tie(b.second, b.first); });
  return events;
}

std::pair<bool, double> platoon_stats(const EpisodeLog& log, const ScenarioSpec& spec) {
  if (spec.name != ScenarioKind::Platoon) {
    throw WrongScenario("WrongScenario: platoon stats apply to the platoon scenario");
  }
  WorldState initial;
  const auto states = state_sequence(log, initial);
  const int n_steps = static_cast<int>(states.size()) - 1;

  int first_completion = std::numeric_limits<int>::max();
  for (int i = 1; i <= n_steps; ++i) {
    for (const auto& v : states[i]->vehicles) {
      if (v.role == Role::Strategic && v.status == VehicleStatus::Completed) {
        first_completion = std::min(first_completion, i);
      }
    }
    if (first_completion != std::numeric_limits<int>::max()) break;
  }

  // Steps whose end state precedes the first strategic completion.
  const int counted = first_completion == std::numeric_limits<int>::max()
                          ? n_steps
                          : first_completion - 1;
  bool formed = false;
  int platoon_steps = 0;
  for (int i = 1; i <= n_steps; ++i) {
    const bool p = is_platoon(*states[i], spec);
    formed = formed || p;
    if (p && i <= counted) ++platoon_steps;
  }
  const double fraction = counted > 0 ? static_cast<double>(platoon_steps) / counted : 0.0;
  const bool success = formed && log.outcome == EpisodeOutcome::AllCompleted;
  return {success, fraction};
}

EpisodeMetrics episode_metrics(const EpisodeLog& log) {
  const ScenarioSpec& spec = log.config.scenario;
  EpisodeMetrics m;
  m.scenario = spec.name;
  m.outcome = log.outcome;
  for (const auto& r : spec.routes) {
    if (r.role != Role::Strategic) continue;
    const VehicleState* v = log.final_state.find(r.id);
    m.total_rewards[r.color] = v ? v->cumulative_reward : 0;
  }
  if (spec.name == ScenarioKind::Intersection) {
    m.norm_adherent = norm_adherence(log);
    for (const auto& r : spec.routes) {
      if (r.role == Role::Strategic) m.early_stops[r.color] = count_early_stops(log, r.color);
    }
    m.yield_events = yield_events(log);
  } else {
    m.lane_changes = lane_change_events(log);
    auto [success, fraction] = platoon_stats(log, spec);
    m.platoon_success = success;
    m.platoon_time_fraction = fraction;
    m.norm_adherent = success;
  }
  return m;
}

BatchSummary summarize(const std::vector<EpisodeLog>& logs) {
  BatchSummary s;
  bool first = true;
  std::map<std::string, long> early_totals;

  for (const auto& log : logs) {
    if (log.outcome == EpisodeOutcome::Aborted) continue;  // excluded from metrics
    if (first) {
      s.scenario = log.config.scenario.name;
      first = false;
    } else if (log.config.scenario.name != s.scenario) {
      throw MixedScenarios("MixedScenarios: summarize needs logs of a single scenario");
    }

    const EpisodeMetrics m = episode_metrics(log);
    ++s.n_episodes;
    if (m.norm_adherent) ++s.n_adherent;
    s.n_yield_events += static_cast<int>(m.yield_events.size());

    if (s.scenario == ScenarioKind::Intersection) {
      for (const auto& [color, n] : m.early_stops) {
        early_totals[color] += n;
        s.early_stop_series[color].push_back(n);
      }
    } else {
      std::map<std::string, int> per_color;
      for (const auto& r : log.config.scenario.routes) {
        if (r.role == Role::Strategic) per_color[r.color] = 0;
      }
      for (const auto& [color, t] : m.lane_changes) {
        per_color[color] += 1;
        s.lane_change_time_hist[t][color] += 1;
      }
      for (const auto& [color, n] : per_color) {
        s.lane_change_count_hist[n][color] += 1;
      }
      s.platoon_fractions.push_back(m.platoon_time_fraction);
      const int bin = std::min(9, static_cast<int>(std::floor(m.platoon_time_fraction * 10.0)));
      s.platoon_fraction_hist[bin] += 1;
    }
  }

  if (s.n_episodes > 0) {
    s.rate_defined = true;
    s.adherence_rate = static_cast<double>(s.n_adherent) / s.n_episodes;
    for (const auto& [color, total] : early_totals) {
      s.mean_early_stops[color] = static_cast<double>(total) / s.n_episodes;
    }
  }
  return s;
}

std::string summary_table_csv(const std::vector<std::pair<int, BatchSummary>>& rows) {
  std::string out = "n_background,n_tests,n_success,rate\n";
  for (const auto& [n_background, summary] : rows) {
    char rate[16] = "nan";
    if (summary.rate_defined) {
      std::snprintf(rate, sizeof(rate), "%.2f", summary.adherence_rate);
    }
    out += std::to_string(n_background) + "," + std::to_string(summary.n_episodes) + "," +
           std::to_string(summary.n_adherent) + "," + rate + "\n";
  }
  return out;
}

}  // namespace normsim
