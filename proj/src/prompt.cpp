#include "normsim/prompt.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "normsim/errors.hpp"

namespace normsim {

namespace {

constexpr const char* kIntersectionSystem =
    "You are a car driving on a grid of {rows} rows and {cols} columns. Rows are "
    "numbered 1 to {rows} from north to south and columns 1 to {cols} from west to "
    "east; a cell is written as (row,column). Road 1 runs west to east along row 5 "
    "and carries eastbound cars. Road 2 runs north to south along column 5 and "
    "carries southbound cars. The roads cross at (5,5). At every time step each car "
    "picks exactly one action. Go moves the car forward by one cell and gives a "
    "reward of {go_reward}. Stop keeps the car in place and gives a reward of "
    "{stop_reward}. If two cars ever end up in the same cell they crash, each "
    "crashed car receives {crash_reward} for that step, and the game ends for "
    "everyone. A car finishes its trip when it reaches the last cell of its road, "
    "and the game ends when every car has finished. Reach the end of your road "
    "while keeping your cumulative reward as high as possible. Reply with the one "
    "action you pick and the cell it puts you in.";

constexpr const char* kPlatoonSystem =
    "You are a car driving south on a highway of {rows} rows and {cols} lanes. Rows "
    "are numbered 1 to {rows} from north to south; the lanes are columns 1 and 2, "
    "and a cell is written as (row,lane). At every time step each car picks exactly "
    "one action. Go moves the car forward by one cell and gives a reward of "
    "{go_reward}. Stop keeps the car in place and gives a reward of {stop_reward}. "
    "Lane change moves the car sideways into the same row of the other lane and "
    "gives a reward of {lane_change_reward}. If two cars ever end up in the same "
    "cell they crash, each crashed car receives {crash_reward} for that step, and "
    "the game ends for everyone. Whenever the red and green cars travel in the same "
    "lane they form a platoon and each of them receives an extra {platoon_reward} "
    "on top of its action reward for that step. The game counts as a success when "
    "the red and green cars form a platoon at least once and every car finishes its "
    "trip without any crash. Reach the end of the highway while keeping your "
    "cumulative reward as high as possible. Reply with the one action you pick and "
    "the cell it puts you in.";

// The user message stays free of action names so it carries nothing but the
// agent's private observation; the options live in the system message.
constexpr const char* kSelfTemplate =
    "You are the {color} car. It is time step {time_step}. You are at {position} "
    "and your cumulative reward is {cumulative_reward}.";
constexpr const char* kOtherTemplate = " The {color} car is at {position}.";
constexpr const char* kQuestionTemplate =
    " Which single action do you take now, and which cell will you be in afterwards?";

std::set<std::string> placeholders_in(const std::string& text) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    const auto end = text.find('}', i);
    if (end == std::string::npos) break;
    out.insert(text.substr(i + 1, end - i - 1));
    i = end;
  }
  return out;
}

std::string substitute(const std::string& text, const std::map<std::string, std::string>& values,
                       const std::string& context) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') {
      out += text[i];
      continue;
    }
    const auto end = text.find('}', i);
    if (end == std::string::npos) {
      throw TemplateError("TemplateError: unterminated '{' in " + context);
    }
    const std::string name = text.substr(i + 1, end - i - 1);
    auto it = values.find(name);
    if (it == values.end()) {
      throw TemplateError("TemplateError: unresolved placeholder {" + name + "} in " + context);
    }
    out += it->second;
    i = end;
  }
  return out;
}

}  // namespace

PromptTemplateSet default_templates(ScenarioKind kind) {
  PromptTemplateSet t;
  t.system_template =
      kind == ScenarioKind::Intersection ? kIntersectionSystem : kPlatoonSystem;
  t.self_template = kSelfTemplate;
  t.other_template = kOtherTemplate;
  t.question_template = kQuestionTemplate;
  return t;
}

void validate_templates(const PromptTemplateSet& templates) {
  const std::set<std::string> self_expected = {"color", "position", "cumulative_reward",
                                               "time_step"};
  if (placeholders_in(templates.self_template) != self_expected) {
    throw TemplateError(
        "TemplateError: self template must reference exactly "
        "{color}, {position}, {cumulative_reward}, {time_step}");
  }
  const std::set<std::string> other_expected = {"color", "position"};
  if (placeholders_in(templates.other_template) != other_expected) {
    throw TemplateError("TemplateError: other template must reference exactly {color}, {position}");
  }
  if (!placeholders_in(templates.question_template).empty()) {
    throw TemplateError("TemplateError: question template takes no placeholders");
  }
}

std::string render_system(const ScenarioSpec& spec, const PromptTemplateSet& templates) {
  std::map<std::string, std::string> values = {
      {"rows", std::to_string(spec.rows)},
      {"cols", std::to_string(spec.cols)},
      {"go_reward", std::to_string(spec.reward.go_cost)},
      {"stop_reward", std::to_string(spec.reward.stop_cost)},
      {"crash_reward", std::to_string(spec.reward.crash_penalty)},
  };
  if (spec.reward.lane_change_cost) {
    values["lane_change_reward"] = std::to_string(*spec.reward.lane_change_cost);
  }
  if (spec.reward.platoon_bonus) {
    values["platoon_reward"] = std::to_string(*spec.reward.platoon_bonus);
  }
  return substitute(templates.system_template, values, "system template");
}

std::string render_user(const Observation& obs, const PromptTemplateSet& templates) {
  std::string out = substitute(templates.self_template,
                               {{"color", obs.self_color},
                                {"position", format_cell(obs.self_position)},
                                {"cumulative_reward", std::to_string(obs.self_cumulative_reward)},
                                {"time_step", std::to_string(obs.time_step)}},
                               "self template");
  auto others = obs.others;
  std::sort(others.begin(), others.end());
  for (const auto& [color, position] : others) {
    out += substitute(templates.other_template,
                      {{"color", color}, {"position", format_cell(position)}}, "other template");
  }
  out += substitute(templates.question_template, {}, "question template");
  return out;
}

RenderedPrompt render_prompt(const ScenarioSpec& spec, const Observation& obs,
                             const PromptTemplateSet& templates) {
  RenderedPrompt p;
  p.system_message = render_system(spec, templates);
  p.user_message = render_user(obs, templates);
  p.agent_id = obs.self_id;
  p.time_step = obs.time_step;
  return p;
}

Json templates_to_json(const PromptTemplateSet& t) {
  Json j;
  j["system"] = t.system_template;
  j["self"] = t.self_template;
  j["other"] = t.other_template;
  j["question"] = t.question_template;
  return j;
}

PromptTemplateSet templates_from_json(const Json& j) {
  expect_fields(j, {"system", "self", "other", "question"}, "templates");
  PromptTemplateSet t;
  t.system_template = require(j, "system", "templates").get<std::string>();
  t.self_template = require(j, "self", "templates").get<std::string>();
  t.other_template = require(j, "other", "templates").get<std::string>();
  t.question_template = require(j, "question", "templates").get<std::string>();
  validate_templates(t);
  return t;
}

}  // namespace normsim
