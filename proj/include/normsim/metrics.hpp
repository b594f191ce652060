#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "normsim/episode.hpp"

namespace normsim {

struct EpisodeMetrics {
  ScenarioKind scenario = ScenarioKind::Intersection;
  EpisodeOutcome outcome = EpisodeOutcome::Aborted;
  bool norm_adherent = false;
  std::map<std::string, int> early_stops;               // intersection, per color
  std::vector<std::pair<std::string, int>> yield_events;  // intersection (diagnostic)
  std::vector<std::pair<std::string, int>> lane_changes;  // platoon
  bool platoon_success = false;                           // platoon
  double platoon_time_fraction = 0.0;                     // platoon, in [0,1]
  std::map<std::string, int> total_rewards;               // per strategic color
};

struct BatchSummary {
  ScenarioKind scenario = ScenarioKind::Intersection;
  int n_episodes = 0;
  int n_adherent = 0;  // crash-free completions; platoon additionally requires a platoon
  bool rate_defined = false;
  double adherence_rate = 0.0;
  int n_yield_events = 0;
  std::map<std::string, double> mean_early_stops;
  // per-episode series (episode order preserved), plot-ready
  std::map<std::string, std::vector<int>> early_stop_series;
  std::vector<double> platoon_fractions;
  // histograms: lane changes per episode, lane-change time steps, platoon fraction deciles
  std::map<int, std::map<std::string, int>> lane_change_count_hist;
  std::map<int, std::map<std::string, int>> lane_change_time_hist;
  std::vector<int> platoon_fraction_hist = std::vector<int>(10, 0);
};

/// Stop decisions taken by the colored strategic agent before the conflict
/// cell and away from its approach cell.
int count_early_stops(const EpisodeLog& log, const std::string& color);

/// Crash-free completion of every trip within the step cap.
bool norm_adherence(const EpisodeLog& log);

/// Stops at the approach cell after which the other strategic agent crossed
/// the conflict cell first; diagnostic only, does not gate adherence.
std::vector<std::pair<std::string, int>> yield_events(const EpisodeLog& log);

/// Executed strategic lane changes as (color, time_step), time-ordered.
std::vector<std::pair<std::string, int>> lane_change_events(const EpisodeLog& log);

/// (success, fraction): success means a platoon formed at least once and the
/// episode completed crash-free; the fraction counts platoon step-ends over
/// the steps before the first strategic completion.
std::pair<bool, double> platoon_stats(const EpisodeLog& log, const ScenarioSpec& spec);

EpisodeMetrics episode_metrics(const EpisodeLog& log);

/// Exact-arithmetic aggregation over logs of one scenario.
BatchSummary summarize(const std::vector<EpisodeLog>& logs);

/// CSV in the table shape: header n_background,n_tests,n_success,rate and one
/// row per (n_background -> summary) entry.
std::string summary_table_csv(const std::vector<std::pair<int, BatchSummary>>& rows);

}  // namespace normsim
