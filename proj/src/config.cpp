#include "normsim/config.hpp"

#include <fstream>

#include "normsim/errors.hpp"

namespace normsim {

namespace {

ScenarioSpec scenario_from_builder_form(const Json& j) {
  expect_fields(j, {"name", "n_background", "rewards", "step_cap", "max_platoon_gap", "swap_is_crash"},
                "scenario");
  const ScenarioKind kind =
      scenario_kind_from_string(require(j, "name", "scenario").get<std::string>());
  const int n_background = j.contains("n_background") ? j["n_background"].get<int>() : 0;
  RewardOverrides overrides;
  if (j.contains("rewards")) {
    overrides = reward_overrides_from_json(j["rewards"], "scenario.rewards");
  }
  ScenarioSpec spec = kind == ScenarioKind::Intersection
                          ? build_intersection(n_background, overrides)
                          : build_platoon(n_background, overrides);
  if (j.contains("step_cap")) spec.step_cap = j["step_cap"].get<int>();
  if (j.contains("max_platoon_gap")) {
    if (kind != ScenarioKind::Platoon) {
      throw ConfigError("ConfigError: max_platoon_gap applies to the platoon scenario only");
    }
    if (!j["max_platoon_gap"].is_null()) spec.max_platoon_gap = j["max_platoon_gap"].get<int>();
  }
  if (j.contains("swap_is_crash")) spec.swap_is_crash = j["swap_is_crash"].get<bool>();
  validate_spec(spec);
  return spec;
}

ScenarioSpec scenario_from_document(const Json& j) {
  if (!j.is_object()) throw ConfigError("ConfigError: scenario must be an object");
  // Full documents carry an explicit grid; builder form does not.
  return j.contains("grid") ? scenario_from_json(j) : scenario_from_builder_form(j);
}

std::map<VehicleId, PolicyBinding> policies_from_json(const Json& j) {
  std::map<VehicleId, PolicyBinding> out;
  if (!j.is_object()) throw ConfigError("ConfigError: policies must map vehicle ids to bindings");
  for (auto it = j.begin(); it != j.end(); ++it) {
    PolicyBinding binding;
    if (it.value().is_string()) {
      binding.kind = policy_kind_from_string(it.value().get<std::string>());
    } else {
      expect_fields(it.value(), {"kind", "actions"}, "policies." + it.key());
      binding.kind =
          policy_kind_from_string(require(it.value(), "kind", "policy binding").get<std::string>());
      if (binding.kind != PolicyKind::Script) {
        throw ConfigError("ConfigError: only script bindings take an actions list");
      }
      for (const Json& aj : require(it.value(), "actions", "policy binding")) {
        binding.script.push_back(action_from_string(aj.get<std::string>()));
      }
    }
    out[it.key()] = binding;
  }
  return out;
}

struct ProviderBlock {
  ProviderKind kind = ProviderKind::None;
  ProviderConfig config;
  MockSpec mock;
};

ProviderBlock provider_from_json(const Json& j, const std::filesystem::path& base_dir) {
  expect_fields(j, {"type", "config", "default", "by_key", "responses_file"}, "provider");
  ProviderBlock out;
  out.kind = provider_kind_from_string(require(j, "type", "provider").get<std::string>());
  if (j.contains("config")) {
    out.config = provider_config_from_json(j["config"], "provider.config");
  }
  if (out.kind != ProviderKind::Mock &&
      (j.contains("default") || j.contains("by_key") || j.contains("responses_file"))) {
    throw ConfigError("ConfigError: mock response fields on a non-mock provider");
  }
  if (out.kind == ProviderKind::Mock) {
    if (j.contains("responses_file")) {
      const auto path = base_dir / j["responses_file"].get<std::string>();
      std::ifstream in(path);
      if (!in) {
        throw ConfigError("ConfigError: cannot open responses_file '" + path.string() + "'");
      }
      Json doc;
      try {
        doc = Json::parse(in);
      } catch (const std::exception& e) {
        throw ConfigError("ConfigError: bad responses_file '" + path.string() + "': " + e.what());
      }
      expect_fields(doc, {"default", "by_key"}, "responses file");
      if (doc.contains("default")) out.mock.default_response = doc["default"].get<std::string>();
      if (doc.contains("by_key")) {
        for (auto it = doc["by_key"].begin(); it != doc["by_key"].end(); ++it) {
          if (it.value().is_string()) {
            out.mock.by_key[it.key()] = {it.value().get<std::string>()};
          } else {
            out.mock.by_key[it.key()] = it.value().get<std::vector<std::string>>();
          }
        }
      }
    }
    if (j.contains("default")) out.mock.default_response = j["default"].get<std::string>();
    if (j.contains("by_key")) {
      for (auto it = j["by_key"].begin(); it != j["by_key"].end(); ++it) {
        if (it.value().is_string()) {
          out.mock.by_key[it.key()] = {it.value().get<std::string>()};
        } else {
          out.mock.by_key[it.key()] = it.value().get<std::vector<std::string>>();
        }
      }
    }
  }
  return out;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("ConfigError: cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("ConfigError: '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

bool is_batch_document(const Json& j) {
  return j.is_object() && j.contains("sweep");
}

// Relative responses_file paths resolve against the config file location.
static EpisodeConfig load_episode_config_with_base(const Json& j,
                                                   const std::filesystem::path& base_dir) {
  expect_fields(j, {"scenario", "policies", "provider", "templates", "rng_seed"}, "episode config");
  EpisodeConfig cfg;
  cfg.scenario = scenario_from_document(require(j, "scenario", "episode config"));
  cfg.policies = policies_from_json(require(j, "policies", "episode config"));
  if (j.contains("provider")) {
    ProviderBlock block = provider_from_json(j["provider"], base_dir);
    cfg.provider_kind = block.kind;
    cfg.provider = block.config;
    cfg.mock = block.mock;
  }
  cfg.templates = j.contains("templates") ? templates_from_json(j["templates"])
                                          : default_templates(cfg.scenario.name);
  if (j.contains("rng_seed")) cfg.rng_seed = j["rng_seed"].get<std::uint64_t>();
  validate_bindings(cfg);
  return cfg;
}

EpisodeConfig load_episode_config(const Json& j) {
  return load_episode_config_with_base(j, std::filesystem::current_path());
}

EpisodeConfig load_episode_config_file(const std::filesystem::path& path) {
  return load_episode_config_with_base(read_json_file(path), path.parent_path());
}

BatchSpec load_batch_spec(const Json& j) {
  expect_fields(j,
                {"scenario", "sweep", "episodes_per_cell", "policies", "provider", "templates",
                 "rng_seed_base"},
                "batch spec");
  BatchSpec spec;
  const Json& scenario = require(j, "scenario", "batch spec");
  expect_fields(scenario, {"name", "rewards", "step_cap", "max_platoon_gap", "swap_is_crash"},
                "batch.scenario");
  spec.scenario_kind =
      scenario_kind_from_string(require(scenario, "name", "batch.scenario").get<std::string>());
  if (scenario.contains("rewards")) {
    spec.overrides = reward_overrides_from_json(scenario["rewards"], "batch.scenario.rewards");
  }
  if (scenario.contains("step_cap")) spec.step_cap = scenario["step_cap"].get<int>();
  if (scenario.contains("max_platoon_gap") && !scenario["max_platoon_gap"].is_null()) {
    spec.max_platoon_gap = scenario["max_platoon_gap"].get<int>();
  }

  spec.sweep = require(j, "sweep", "batch spec").get<std::vector<int>>();
  if (spec.sweep.empty()) throw ConfigError("ConfigError: sweep must not be empty");
  for (int n : spec.sweep) {
    if (n < 0) throw ConfigError("ConfigError: sweep values must be >= 0");
  }
  if (j.contains("episodes_per_cell")) spec.episodes_per_cell = j["episodes_per_cell"].get<int>();
  if (spec.episodes_per_cell < 1) throw ConfigError("ConfigError: episodes_per_cell must be >= 1");

  spec.policies = policies_from_json(require(j, "policies", "batch spec"));
  if (j.contains("provider")) {
    ProviderBlock block = provider_from_json(j["provider"], std::filesystem::current_path());
    spec.provider_kind = block.kind;
    spec.provider = block.config;
    spec.mock = block.mock;
  }
  if (j.contains("templates")) spec.templates = templates_from_json(j["templates"]);
  if (j.contains("rng_seed_base")) spec.rng_seed_base = j["rng_seed_base"].get<std::uint64_t>();
  return spec;
}

BatchSpec load_batch_spec_file(const std::filesystem::path& path) {
  Json j = read_json_file(path);
  // Resolve a mock responses_file relative to the batch file.
  if (j.contains("provider") && j["provider"].is_object() &&
      j["provider"].contains("responses_file")) {
    ProviderBlock block = provider_from_json(j["provider"], path.parent_path());
    j["provider"].erase("responses_file");
    BatchSpec spec = load_batch_spec(j);
    spec.provider_kind = block.kind;
    spec.provider = block.config;
    spec.mock = block.mock;
    return spec;
  }
  return load_batch_spec(j);
}

EpisodeConfig BatchSpec::episode_config(int n_background, int episode_index) const {
  EpisodeConfig cfg;
  cfg.scenario = scenario_kind == ScenarioKind::Intersection
                     ? build_intersection(n_background, overrides)
                     : build_platoon(n_background, overrides);
  if (step_cap) cfg.scenario.step_cap = *step_cap;
  if (max_platoon_gap) cfg.scenario.max_platoon_gap = *max_platoon_gap;
  cfg.policies = policies;
  cfg.provider_kind = provider_kind;
  cfg.provider = provider;
  cfg.mock = mock;
  cfg.templates = templates ? *templates : default_templates(cfg.scenario.name);
  cfg.rng_seed = rng_seed_base + static_cast<std::uint64_t>(n_background) * 1000003ull +
                 static_cast<std::uint64_t>(episode_index);
  validate_bindings(cfg);
  return cfg;
}

}  // namespace normsim
