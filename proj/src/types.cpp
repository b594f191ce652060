#include "normsim/types.hpp"

#include "normsim/errors.hpp"

namespace normsim {

std::string to_string(Heading h) {
  return h == Heading::East ? "east" : "south";
}

std::string to_string(Action a) {
  switch (a) {
    case Action::Go: return "Go";
    case Action::Stop: return "Stop";
    case Action::LaneChange: return "LaneChange";
  }
  return "Stop";
}

std::string to_string(Role r) {
  return r == Role::Strategic ? "strategic" : "background";
}

std::string to_string(VehicleStatus s) {
  switch (s) {
    case VehicleStatus::Active: return "Active";
    case VehicleStatus::Completed: return "Completed";
    case VehicleStatus::Crashed: return "Crashed";
  }
  return "Active";
}

std::string to_string(TerminalFlag f) {
  switch (f) {
    case TerminalFlag::Running: return "Running";
    case TerminalFlag::AllCompleted: return "AllCompleted";
    case TerminalFlag::CrashOccurred: return "CrashOccurred";
    case TerminalFlag::TimedOut: return "TimedOut";
  }
  return "Running";
}

std::string to_string(ScenarioKind k) {
  return k == ScenarioKind::Intersection ? "intersection" : "platoon";
}

std::string to_string(DecisionSource s) {
  switch (s) {
    case DecisionSource::Scripted: return "Scripted";
    case DecisionSource::RuleBased: return "RuleBased";
    case DecisionSource::Llm: return "Llm";
    case DecisionSource::Fallback: return "Fallback";
  }
  return "Scripted";
}

std::string to_string(EpisodeOutcome o) {
  switch (o) {
    case EpisodeOutcome::AllCompleted: return "AllCompleted";
    case EpisodeOutcome::CrashOccurred: return "CrashOccurred";
    case EpisodeOutcome::TimedOut: return "TimedOut";
    case EpisodeOutcome::Aborted: return "Aborted";
  }
  return "Aborted";
}

namespace {
[[noreturn]] void bad_value(const char* what, const std::string& s) {
  throw ConfigError(std::string("ConfigError: unknown ") + what + " value '" + s + "'");
}
}  // namespace

Heading heading_from_string(const std::string& s) {
  if (s == "east") return Heading::East;
  if (s == "south") return Heading::South;
  bad_value("heading", s);
}

Action action_from_string(const std::string& s) {
  if (s == "Go") return Action::Go;
  if (s == "Stop") return Action::Stop;
  if (s == "LaneChange") return Action::LaneChange;
  bad_value("action", s);
}

Role role_from_string(const std::string& s) {
  if (s == "strategic") return Role::Strategic;
  if (s == "background") return Role::Background;
  bad_value("role", s);
}

VehicleStatus status_from_string(const std::string& s) {
  if (s == "Active") return VehicleStatus::Active;
  if (s == "Completed") return VehicleStatus::Completed;
  if (s == "Crashed") return VehicleStatus::Crashed;
  bad_value("status", s);
}

TerminalFlag terminal_from_string(const std::string& s) {
  if (s == "Running") return TerminalFlag::Running;
  if (s == "AllCompleted") return TerminalFlag::AllCompleted;
  if (s == "CrashOccurred") return TerminalFlag::CrashOccurred;
  if (s == "TimedOut") return TerminalFlag::TimedOut;
  bad_value("terminal flag", s);
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
  if (s == "intersection") return ScenarioKind::Intersection;
  if (s == "platoon") return ScenarioKind::Platoon;
  bad_value("scenario", s);
}

DecisionSource source_from_string(const std::string& s) {
  if (s == "Scripted") return DecisionSource::Scripted;
  if (s == "RuleBased") return DecisionSource::RuleBased;
  if (s == "Llm") return DecisionSource::Llm;
  if (s == "Fallback") return DecisionSource::Fallback;
  bad_value("decision source", s);
}

EpisodeOutcome outcome_from_string(const std::string& s) {
  if (s == "AllCompleted") return EpisodeOutcome::AllCompleted;
  if (s == "CrashOccurred") return EpisodeOutcome::CrashOccurred;
  if (s == "TimedOut") return EpisodeOutcome::TimedOut;
  if (s == "Aborted") return EpisodeOutcome::Aborted;
  bad_value("episode outcome", s);
}

std::string format_cell(Cell c) {
  return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
}

}  // namespace normsim
