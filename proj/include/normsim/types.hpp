#pragma once

#include <compare>
#include <string>

namespace normsim {

using VehicleId = std::string;

enum class Heading { East, South };
enum class Action { Go, Stop, LaneChange };
enum class Role { Strategic, Background };
enum class VehicleStatus { Active, Completed, Crashed };
enum class TerminalFlag { Running, AllCompleted, CrashOccurred, TimedOut };
enum class ScenarioKind { Intersection, Platoon };
enum class DecisionSource { Scripted, RuleBased, Llm, Fallback };
enum class EpisodeOutcome { AllCompleted, CrashOccurred, TimedOut, Aborted };

/// 1-indexed grid cell. Rows grow southward, columns grow eastward.
struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

std::string to_string(Heading h);
std::string to_string(Action a);
std::string to_string(Role r);
std::string to_string(VehicleStatus s);
std::string to_string(TerminalFlag f);
std::string to_string(ScenarioKind k);
std::string to_string(DecisionSource s);
std::string to_string(EpisodeOutcome o);

Heading heading_from_string(const std::string& s);
Action action_from_string(const std::string& s);
Role role_from_string(const std::string& s);
VehicleStatus status_from_string(const std::string& s);
TerminalFlag terminal_from_string(const std::string& s);
ScenarioKind scenario_kind_from_string(const std::string& s);
DecisionSource source_from_string(const std::string& s);
EpisodeOutcome outcome_from_string(const std::string& s);

/// "(row,col)" — the phrasing used in prompts and rendered frames.
std::string format_cell(Cell c);

}  // namespace normsim
