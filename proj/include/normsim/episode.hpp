#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "normsim/llm.hpp"
#include "normsim/policy.hpp"
#include "normsim/prompt.hpp"
#include "normsim/scenario.hpp"
#include "normsim/world.hpp"

namespace normsim {

enum class PolicyKind { Background, RuleBased, Llm, AlwaysGo, AlwaysStop, Random, Script };

std::string to_string(PolicyKind k);
PolicyKind policy_kind_from_string(const std::string& s);

struct PolicyBinding {
  PolicyKind kind = PolicyKind::RuleBased;
  std::vector<Action> script;  // Script only; steps past the end mean Stop

  bool operator==(const PolicyBinding&) const = default;
};

struct MockSpec {
  std::map<std::string, std::vector<std::string>> by_key;
  std::string default_response = "Stop";

  bool operator==(const MockSpec&) const = default;
};

struct EpisodeConfig {
  ScenarioSpec scenario;
  std::map<VehicleId, PolicyBinding> policies;  // every strategic vehicle bound;
                                                // background vehicles implicitly Background
  ProviderKind provider_kind = ProviderKind::None;
  ProviderConfig provider;
  MockSpec mock;
  PromptTemplateSet templates;
  std::uint64_t rng_seed = 0;
};

struct AgentRecord {
  Observation observation;
  std::optional<RenderedPrompt> prompt;
  std::vector<ChatExchange> exchanges;
  Decision decision;
};

struct StepRecord {
  int time_step = 0;
  std::map<VehicleId, AgentRecord> agents;  // one entry per vehicle active at step start
  StepOutcome outcome;
};

struct EpisodeLog {
  EpisodeConfig config;
  std::vector<StepRecord> steps;
  WorldState final_state;
  EpisodeOutcome outcome = EpisodeOutcome::Aborted;
};

struct EpisodeSinks {
  ExchangeSink on_exchange;  // invoked before each exchange's decision is acted on
};

/// Validates bindings against the scenario roster. Throws ConfigError on an
/// unbound strategic vehicle, a background vehicle bound to anything but the
/// background policy, an unknown id, or an Llm binding with no provider.
void validate_bindings(const EpisodeConfig& cfg);

/// Turn-based loop: per-agent observations and decisions from the pre-step
/// state, one apply_actions per step, completed vehicles dropped from future
/// observation and prompting. A provider AuthError aborts with a partial log
/// marked Aborted. `provider` overrides the one the config would build.
EpisodeLog run_episode(const EpisodeConfig& cfg, ChatProvider* provider = nullptr,
                       const EpisodeSinks& sinks = {});

/// Re-applies the logged decisions and returns the state sequence (initial
/// state first). Throws ReplayDivergence when a recomputed step disagrees
/// with the log.
std::vector<WorldState> replay(const EpisodeLog& log);

/// Line-delimited form: a header record, one record per step, and a final
/// record. schema_version is checked on read.
std::string log_to_jsonl(const EpisodeLog& log);
EpisodeLog log_from_jsonl(std::istream& in);
EpisodeLog load_log(const std::string& path);

Json episode_config_to_json(const EpisodeConfig& cfg);
EpisodeConfig episode_config_from_json(const Json& j);

}  // namespace normsim
