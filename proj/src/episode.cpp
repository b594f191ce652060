#include "normsim/episode.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "normsim/errors.hpp"

namespace normsim {

namespace {
constexpr int kSchemaVersion = 1;
}

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::Background: return "background";
    case PolicyKind::RuleBased: return "rule_based";
    case PolicyKind::Llm: return "llm";
    case PolicyKind::AlwaysGo: return "always_go";
    case PolicyKind::AlwaysStop: return "always_stop";
    case PolicyKind::Random: return "random";
    case PolicyKind::Script: return "script";
  }
  return "rule_based";
}

PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "background") return PolicyKind::Background;
  if (s == "rule_based") return PolicyKind::RuleBased;
  if (s == "llm") return PolicyKind::Llm;
  if (s == "always_go") return PolicyKind::AlwaysGo;
  if (s == "always_stop") return PolicyKind::AlwaysStop;
  if (s == "random") return PolicyKind::Random;
  if (s == "script") return PolicyKind::Script;
  throw ConfigError("ConfigError: unknown policy kind '" + s + "'");
}

void validate_bindings(const EpisodeConfig& cfg) {
  bool any_llm = false;
  for (const auto& [id, binding] : cfg.policies) {
    const VehicleRoute* route = cfg.scenario.route(id);
    if (!route) {
      throw ConfigError("ConfigError: policy bound to unknown vehicle '" + id + "'");
    }
    if (route->role == Role::Background && binding.kind != PolicyKind::Background) {
      throw ConfigError("ConfigError: background vehicle '" + id +
                        "' can only use the background policy");
    }
    if (binding.kind == PolicyKind::Llm) any_llm = true;
  }
  for (const auto& r : cfg.scenario.routes) {
    if (r.role == Role::Strategic && !cfg.policies.count(r.id)) {
      throw ConfigError("ConfigError: strategic vehicle '" + r.id + "' has no policy binding");
    }
  }
  if (any_llm && cfg.provider_kind == ProviderKind::None) {
    throw ConfigError("ConfigError: an llm binding requires a provider");
  }
}

namespace {

std::uint64_t agent_stream_seed(std::uint64_t base, const VehicleId& id) {
  std::uint64_t h = base ^ 0x9e3779b97f4a7c15ull;
  for (unsigned char c : id) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct DecisionContext {
  const EpisodeConfig& cfg;
  ChatProvider* provider;
  const EpisodeSinks& sinks;
  std::map<VehicleId, std::mt19937_64> rngs;
  std::map<VehicleId, std::size_t> script_pos;
};

Decision decide(DecisionContext& ctx, const VehicleId& id, const PolicyBinding& binding,
                const Observation& obs, AgentRecord& record) {
  switch (binding.kind) {
    case PolicyKind::Background:
      return background_policy(obs);
    case PolicyKind::RuleBased:
      return rule_based_strategic(obs, ctx.cfg.scenario);
    case PolicyKind::AlwaysGo:
      return always_go_policy(obs);
    case PolicyKind::AlwaysStop:
      return always_stop_policy(obs);
    case PolicyKind::Random: {
      auto [it, inserted] = ctx.rngs.try_emplace(id, agent_stream_seed(ctx.cfg.rng_seed, id));
      std::uniform_int_distribution<std::size_t> pick(0, obs.legal.size() - 1);
      return Decision{obs.legal[pick(it->second)], DecisionSource::Scripted};
    }
    case PolicyKind::Script: {
      std::size_t& pos = ctx.script_pos[id];
      Action a = pos < binding.script.size() ? binding.script[pos] : Action::Stop;
      ++pos;
      if (std::find(obs.legal.begin(), obs.legal.end(), a) == obs.legal.end()) {
        throw IllegalAction("IllegalAction: scripted action " + to_string(a) +
                            " is not legal for '" + id + "'");
      }
      return Decision{a, DecisionSource::Scripted};
    }
    case PolicyKind::Llm: {
      record.prompt = render_prompt(ctx.cfg.scenario, obs, ctx.cfg.templates);
      ExchangeSink sink = [&](const ChatExchange& ex) {
        record.exchanges.push_back(ex);
        if (ctx.sinks.on_exchange) ctx.sinks.on_exchange(ex);
      };
      return decide_llm(obs, ctx.cfg.scenario, ctx.cfg.templates, ctx.cfg.provider,
                        *ctx.provider, sink);
    }
  }
  return Decision{Action::Stop, DecisionSource::Fallback};
}

PolicyBinding binding_for(const EpisodeConfig& cfg, const VehicleRoute& route) {
  auto it = cfg.policies.find(route.id);
  if (it != cfg.policies.end()) return it->second;
  return PolicyBinding{PolicyKind::Background, {}};  // background vehicles may be left implicit
}

}  // namespace

EpisodeLog run_episode(const EpisodeConfig& cfg, ChatProvider* provider,
                       const EpisodeSinks& sinks) {
  validate_bindings(cfg);

  std::unique_ptr<ChatProvider> owned;
  bool any_llm = false;
  for (const auto& [id, b] : cfg.policies) any_llm |= b.kind == PolicyKind::Llm;
  if (any_llm && !provider) {
    if (cfg.provider_kind == ProviderKind::Mock) {
      owned = std::make_unique<MockProvider>(cfg.mock.by_key, cfg.mock.default_response);
    } else {
      owned = std::make_unique<HttpProvider>();
    }
    provider = owned.get();
  }

  EpisodeLog log;
  log.config = cfg;

  DecisionContext ctx{cfg, provider, sinks, {}, {}};
  WorldState state = initial_state(cfg.scenario);

  while (!is_terminal(state)) {
    StepRecord record;
    record.time_step = state.time_step;
    std::map<VehicleId, Action> actions;
    try {
      for (const auto* vehicle : state.active()) {
        const VehicleRoute* route = cfg.scenario.route(vehicle->id);
        AgentRecord agent;
        agent.observation = observe(state, vehicle->id, cfg.scenario);
        agent.decision = decide(ctx, vehicle->id, binding_for(cfg, *route), agent.observation, agent);
        actions[vehicle->id] = agent.decision.action;
        record.agents.emplace(vehicle->id, std::move(agent));
      }
    } catch (const AuthError&) {
      log.final_state = state;
      log.outcome = EpisodeOutcome::Aborted;
      return log;
    }
    record.outcome = apply_actions(state, actions, cfg.scenario);
    state = record.outcome.next_state;
    log.steps.push_back(std::move(record));
  }

  log.final_state = state;
  switch (state.terminal_flag) {
    case TerminalFlag::AllCompleted: log.outcome = EpisodeOutcome::AllCompleted; break;
    case TerminalFlag::CrashOccurred: log.outcome = EpisodeOutcome::CrashOccurred; break;
    case TerminalFlag::TimedOut: log.outcome = EpisodeOutcome::TimedOut; break;
    case TerminalFlag::Running: log.outcome = EpisodeOutcome::Aborted; break;
  }
  return log;
}

std::vector<WorldState> replay(const EpisodeLog& log) {
  WorldState state = initial_state(log.config.scenario);
  std::vector<WorldState> sequence{state};
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    const StepRecord& record = log.steps[i];
    std::map<VehicleId, Action> actions;
    for (const auto& [id, agent] : record.agents) actions[id] = agent.decision.action;
    StepOutcome outcome = apply_actions(state, actions, log.config.scenario);
    if (canonical_text(outcome.next_state) != canonical_text(record.outcome.next_state)) {
      throw ReplayDivergence("ReplayDivergence: step " + std::to_string(i) +
                             " does not reproduce the logged state");
    }
    state = outcome.next_state;
    sequence.push_back(state);
  }
  if (canonical_text(state) != canonical_text(log.final_state) &&
      log.outcome != EpisodeOutcome::Aborted) {
    throw ReplayDivergence("ReplayDivergence: final state does not match the log");
  }
  return sequence;
}

namespace {

Json observation_to_json(const Observation& obs) {
  Json j;
  j["self_id"] = obs.self_id;
  j["self_color"] = obs.self_color;
  j["self_position"] = cell_to_json(obs.self_position);
  j["self_heading"] = to_string(obs.self_heading);
  j["self_cumulative_reward"] = obs.self_cumulative_reward;
  j["time_step"] = obs.time_step;
  Json others = Json::array();
  for (const auto& [color, pos] : obs.others) {
    others.push_back(Json{{"color", color}, {"position", cell_to_json(pos)}});
  }
  j["others"] = others;
  Json legal = Json::array();
  for (Action a : obs.legal) legal.push_back(to_string(a));
  j["legal"] = legal;
  return j;
}

Observation observation_from_json(const Json& j) {
  expect_fields(j,
                {"self_id", "self_color", "self_position", "self_heading",
                 "self_cumulative_reward", "time_step", "others", "legal"},
                "observation");
  Observation obs;
  obs.self_id = require(j, "self_id", "observation").get<std::string>();
  obs.self_color = require(j, "self_color", "observation").get<std::string>();
  obs.self_position = cell_from_json(require(j, "self_position", "observation"), "self_position");
  obs.self_heading = heading_from_string(require(j, "self_heading", "observation").get<std::string>());
  obs.self_cumulative_reward = require(j, "self_cumulative_reward", "observation").get<int>();
  obs.time_step = require(j, "time_step", "observation").get<int>();
  for (const Json& oj : require(j, "others", "observation")) {
    expect_fields(oj, {"color", "position"}, "observation.others[]");
    obs.others.emplace_back(require(oj, "color", "other").get<std::string>(),
                            cell_from_json(require(oj, "position", "other"), "other.position"));
  }
  for (const Json& aj : require(j, "legal", "observation")) {
    obs.legal.push_back(action_from_string(aj.get<std::string>()));
  }
  return obs;
}

Json prompt_to_json(const RenderedPrompt& p) {
  Json j;
  j["system_message"] = p.system_message;
  j["user_message"] = p.user_message;
  j["agent_id"] = p.agent_id;
  j["time_step"] = p.time_step;
  return j;
}

RenderedPrompt prompt_from_json(const Json& j) {
  expect_fields(j, {"system_message", "user_message", "agent_id", "time_step"}, "prompt");
  RenderedPrompt p;
  p.system_message = require(j, "system_message", "prompt").get<std::string>();
  p.user_message = require(j, "user_message", "prompt").get<std::string>();
  p.agent_id = require(j, "agent_id", "prompt").get<std::string>();
  p.time_step = require(j, "time_step", "prompt").get<int>();
  return p;
}

Json exchange_to_json(const ChatExchange& ex) {
  Json j;
  j["prompt_key"] = prompt_key(ex.request);
  j["model_name"] = ex.model_name;
  j["temperature"] = ex.temperature;
  j["max_tokens"] = ex.max_tokens;
  j["response_text"] = ex.response_text;
  if (ex.prompt_tokens) j["prompt_tokens"] = *ex.prompt_tokens;
  if (ex.completion_tokens) j["completion_tokens"] = *ex.completion_tokens;
  j["wall_time_ms"] = ex.wall_time.count();
  return j;
}

ChatExchange exchange_from_json(const Json& j, const RenderedPrompt& prompt) {
  expect_fields(j,
                {"prompt_key", "model_name", "temperature", "max_tokens", "response_text",
                 "prompt_tokens", "completion_tokens", "wall_time_ms"},
                "exchange");
  ChatExchange ex;
  ex.request = prompt;
  ex.model_name = require(j, "model_name", "exchange").get<std::string>();
  ex.temperature = require(j, "temperature", "exchange").get<double>();
  ex.max_tokens = require(j, "max_tokens", "exchange").get<int>();
  ex.response_text = require(j, "response_text", "exchange").get<std::string>();
  if (j.contains("prompt_tokens")) ex.prompt_tokens = j["prompt_tokens"].get<int>();
  if (j.contains("completion_tokens")) ex.completion_tokens = j["completion_tokens"].get<int>();
  ex.wall_time = std::chrono::milliseconds{require(j, "wall_time_ms", "exchange").get<long>()};
  return ex;
}

Json decision_to_json(const Decision& d) {
  Json j;
  j["action"] = to_string(d.action);
  j["source"] = to_string(d.source);
  if (d.raw_response) j["raw_response"] = *d.raw_response;
  if (d.latency) j["latency_ms"] = d.latency->count();
  return j;
}

Decision decision_from_json(const Json& j) {
  expect_fields(j, {"action", "source", "raw_response", "latency_ms"}, "decision");
  Decision d;
  d.action = action_from_string(require(j, "action", "decision").get<std::string>());
  d.source = source_from_string(require(j, "source", "decision").get<std::string>());
  if (j.contains("raw_response")) d.raw_response = j["raw_response"].get<std::string>();
  if (j.contains("latency_ms")) d.latency = std::chrono::milliseconds{j["latency_ms"].get<long>()};
  return d;
}

Json step_to_json(const StepRecord& record) {
  Json j;
  j["type"] = "step";
  j["time_step"] = record.time_step;
  Json agents = Json::object();
  for (const auto& [id, agent] : record.agents) {
    Json aj;
    aj["observation"] = observation_to_json(agent.observation);
    if (agent.prompt) aj["prompt"] = prompt_to_json(*agent.prompt);
    if (!agent.exchanges.empty()) {
      Json exs = Json::array();
      for (const auto& ex : agent.exchanges) exs.push_back(exchange_to_json(ex));
      aj["exchanges"] = exs;
    }
    aj["decision"] = decision_to_json(agent.decision);
    agents[id] = aj;
  }
  j["agents"] = agents;
  j["outcome"] = outcome_to_json(record.outcome);
  return j;
}

StepRecord step_from_json(const Json& j) {
  expect_fields(j, {"type", "time_step", "agents", "outcome"}, "step record");
  StepRecord record;
  record.time_step = require(j, "time_step", "step").get<int>();
  for (auto it = require(j, "agents", "step").begin(); it != j["agents"].end(); ++it) {
    expect_fields(it.value(), {"observation", "prompt", "exchanges", "decision"}, "agent record");
    AgentRecord agent;
    agent.observation = observation_from_json(require(it.value(), "observation", "agent"));
    if (it.value().contains("prompt")) agent.prompt = prompt_from_json(it.value()["prompt"]);
    if (it.value().contains("exchanges")) {
      for (const Json& ej : it.value()["exchanges"]) {
        agent.exchanges.push_back(
            exchange_from_json(ej, agent.prompt ? *agent.prompt : RenderedPrompt{}));
      }
    }
    agent.decision = decision_from_json(require(it.value(), "decision", "agent"));
    record.agents.emplace(it.key(), std::move(agent));
  }
  record.outcome = outcome_from_json(require(j, "outcome", "step"));
  return record;
}

}  // namespace

std::string log_to_jsonl(const EpisodeLog& log) {
  std::string out;
  Json header;
  header["type"] = "header";
  header["schema_version"] = kSchemaVersion;
  header["config"] = episode_config_to_json(log.config);
  out += header.dump();
  out += '\n';
  for (const auto& step : log.steps) {
    out += step_to_json(step).dump();
    out += '\n';
  }
  Json footer;
  footer["type"] = "final";
  footer["outcome"] = to_string(log.outcome);
  footer["final_state"] = state_to_json(log.final_state);
  out += footer.dump();
  out += '\n';
  return out;
}

EpisodeLog log_from_jsonl(std::istream& in) {
  EpisodeLog log;
  std::string line;
  bool have_header = false;
  bool have_final = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const std::exception& e) {
      throw CorruptLog(std::string("CorruptLog: unparseable record: ") + e.what());
    }
    const std::string type = require(j, "type", "log record").get<std::string>();
    if (type == "header") {
      expect_fields(j, {"type", "schema_version", "config"}, "log header");
      if (require(j, "schema_version", "header").get<int>() != kSchemaVersion) {
        throw CorruptLog("CorruptLog: unsupported schema_version");
      }
      log.config = episode_config_from_json(require(j, "config", "header"));
      have_header = true;
    } else if (type == "step") {
      if (!have_header) throw CorruptLog("CorruptLog: step record before header");
      log.steps.push_back(step_from_json(j));
    } else if (type == "final") {
      expect_fields(j, {"type", "outcome", "final_state"}, "log footer");
      log.outcome = outcome_from_string(require(j, "outcome", "footer").get<std::string>());
      log.final_state = state_from_json(require(j, "final_state", "footer"));
      have_final = true;
    } else {
      throw CorruptLog("CorruptLog: unknown record type '" + type + "'");
    }
  }
  if (!have_header || !have_final) {
    throw CorruptLog("CorruptLog: missing header or final record");
  }
  return log;
}

EpisodeLog load_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorruptLog("CorruptLog: cannot open '" + path + "'");
  try {
    return log_from_jsonl(in);
  } catch (const CorruptLog& e) {
    throw CorruptLog(std::string(e.what()) + " (file: " + path + ")");
  }
}

Json episode_config_to_json(const EpisodeConfig& cfg) {
  Json j;
  j["scenario"] = scenario_to_json(cfg.scenario);
  Json policies = Json::object();
  for (const auto& [id, binding] : cfg.policies) {
    if (binding.kind == PolicyKind::Script) {
      Json actions = Json::array();
      for (Action a : binding.script) actions.push_back(to_string(a));
      policies[id] = Json{{"kind", "script"}, {"actions", actions}};
    } else {
      policies[id] = to_string(binding.kind);
    }
  }
  j["policies"] = policies;
  Json provider;
  provider["type"] = to_string(cfg.provider_kind);
  if (cfg.provider_kind == ProviderKind::Remote) {
    provider["config"] = provider_config_to_json(cfg.provider);
  } else if (cfg.provider_kind == ProviderKind::Mock) {
    provider["config"] = provider_config_to_json(cfg.provider);
    provider["default"] = cfg.mock.default_response;
    Json by_key = Json::object();
    for (const auto& [key, seq] : cfg.mock.by_key) by_key[key] = seq;
    provider["by_key"] = by_key;
  }
  j["provider"] = provider;
  j["templates"] = templates_to_json(cfg.templates);
  j["rng_seed"] = cfg.rng_seed;
  return j;
}

EpisodeConfig episode_config_from_json(const Json& j) {
  expect_fields(j, {"scenario", "policies", "provider", "templates", "rng_seed"},
                "episode config");
  EpisodeConfig cfg;
  cfg.scenario = scenario_from_json(require(j, "scenario", "episode config"));
  for (auto it = require(j, "policies", "episode config").begin(); it != j["policies"].end(); ++it) {
    PolicyBinding binding;
    if (it.value().is_string()) {
      binding.kind = policy_kind_from_string(it.value().get<std::string>());
    } else {
      expect_fields(it.value(), {"kind", "actions"}, "policy binding");
      binding.kind = policy_kind_from_string(require(it.value(), "kind", "binding").get<std::string>());
      if (binding.kind != PolicyKind::Script) {
        throw ConfigError("ConfigError: only script bindings take an actions list");
      }
      for (const Json& aj : require(it.value(), "actions", "binding")) {
        binding.script.push_back(action_from_string(aj.get<std::string>()));
      }
    }
    cfg.policies[it.key()] = binding;
  }
  const Json& provider = require(j, "provider", "episode config");
  expect_fields(provider, {"type", "config", "default", "by_key", "responses_file"}, "provider");
  cfg.provider_kind = provider_kind_from_string(require(provider, "type", "provider").get<std::string>());
  if (provider.contains("config")) {
    cfg.provider = provider_config_from_json(provider["config"], "provider.config");
  }
  if (cfg.provider_kind == ProviderKind::Mock) {
    if (provider.contains("responses_file")) {
      throw ConfigError("ConfigError: responses_file must be resolved before this point");
    }
    if (provider.contains("default")) cfg.mock.default_response = provider["default"].get<std::string>();
    if (provider.contains("by_key")) {
      for (auto it = provider["by_key"].begin(); it != provider["by_key"].end(); ++it) {
        if (it.value().is_string()) {
          cfg.mock.by_key[it.key()] = {it.value().get<std::string>()};
        } else {
          cfg.mock.by_key[it.key()] = it.value().get<std::vector<std::string>>();
        }
      }
    }
  }
  cfg.templates = templates_from_json(require(j, "templates", "episode config"));
  cfg.rng_seed = require(j, "rng_seed", "episode config").get<std::uint64_t>();
  validate_bindings(cfg);
  return cfg;
}

}  // namespace normsim
