#pragma once

#include <string>

#include "normsim/policy.hpp"
#include "normsim/scenario.hpp"

namespace normsim {

/// Template texts with `{name}` placeholders. The system template describes
/// the static game; the user message is assembled from the self template, one
/// other-template instance per visible other vehicle, and the question.
struct PromptTemplateSet {
  std::string system_template;
  std::string self_template;
  std::string other_template;
  std::string question_template;

  bool operator==(const PromptTemplateSet&) const = default;
};

struct RenderedPrompt {
  std::string system_message;
  std::string user_message;
  VehicleId agent_id;
  int time_step = 0;
};

/// Built-in template texts for each scenario. The wording is this project's
/// own and is replaceable via config.
PromptTemplateSet default_templates(ScenarioKind kind);

/// Enforces the placeholder contract: the self template must use exactly
/// {color}, {position}, {cumulative_reward}, {time_step}; the other template
/// exactly {color}, {position}.
void validate_templates(const PromptTemplateSet& templates);

/// Static per-scenario system text with grid shape and reward values filled
/// in; identical across time steps and agents. Throws TemplateError if any
/// `{name}` survives substitution.
std::string render_system(const ScenarioSpec& spec, const PromptTemplateSet& templates);

/// Self text + one line per other vehicle (sorted by color, then position)
/// + the question. Contains the agent's own reward and never anyone else's.
std::string render_user(const Observation& obs, const PromptTemplateSet& templates);

RenderedPrompt render_prompt(const ScenarioSpec& spec, const Observation& obs,
                             const PromptTemplateSet& templates);

Json templates_to_json(const PromptTemplateSet& t);
PromptTemplateSet templates_from_json(const Json& j);

}  // namespace normsim
