#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "normsim/episode.hpp"

namespace normsim {

/// Sweep over background-vehicle counts, episodes_per_cell runs each.
struct BatchSpec {
  ScenarioKind scenario_kind = ScenarioKind::Intersection;
  RewardOverrides overrides;
  std::optional<int> step_cap;
  std::optional<int> max_platoon_gap;
  std::vector<int> sweep;
  int episodes_per_cell = 50;
  std::map<VehicleId, PolicyBinding> policies;
  ProviderKind provider_kind = ProviderKind::None;
  ProviderConfig provider;
  MockSpec mock;
  std::optional<PromptTemplateSet> templates;
  std::uint64_t rng_seed_base = 0;

  /// Fully determined per-cell episode config.
  EpisodeConfig episode_config(int n_background, int episode_index) const;
};

/// Load and strictly validate an episode config document. The scenario block
/// is either builder form ({name, n_background, rewards?, step_cap?, ...}) or
/// a full ScenarioSpec document (distinguished by a "grid" field). Unknown
/// fields are rejected everywhere.
EpisodeConfig load_episode_config(const Json& j);
EpisodeConfig load_episode_config_file(const std::filesystem::path& path);

BatchSpec load_batch_spec(const Json& j);
BatchSpec load_batch_spec_file(const std::filesystem::path& path);

/// True when the document looks like a batch spec (has a "sweep" field).
bool is_batch_document(const Json& j);

Json read_json_file(const std::filesystem::path& path);

}  // namespace normsim
