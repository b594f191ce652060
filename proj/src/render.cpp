#include "normsim/render.hpp"

#include <cctype>
#include <vector>

namespace normsim {

std::string render_frame(const WorldState& state, const ScenarioSpec& spec) {
  std::vector<std::string> grid(static_cast<std::size_t>(spec.rows),
                                std::string(static_cast<std::size_t>(spec.cols), '.'));
  auto put = [&](Cell c, char glyph) {
    if (c.row >= 1 && c.row <= spec.rows && c.col >= 1 && c.col <= spec.cols) {
      grid[static_cast<std::size_t>(c.row - 1)][static_cast<std::size_t>(c.col - 1)] = glyph;
    }
  };

  for (const auto& route : spec.routes) {
    if (route.heading == Heading::East) {
      for (int col = 1; col <= spec.cols; ++col) put(Cell{route.start.row, col}, '-');
    } else {
      const int lane_cols[2] = {route.start.col, route.goal.col};
      for (int col : lane_cols) {
        for (int row = 1; row <= spec.rows; ++row) put(Cell{row, col}, '|');
      }
    }
  }
  for (Cell c : spec.conflict_cells) put(c, '+');

  for (const auto& v : state.vehicles) {
    if (v.status == VehicleStatus::Completed) continue;
    char glyph = v.status == VehicleStatus::Crashed
                     ? 'X'
                     : static_cast<char>(std::toupper(static_cast<unsigned char>(v.color.empty() ? '?' : v.color[0])));
    put(v.position, glyph);
  }

  std::string out = "t=" + std::to_string(state.time_step) + " " + to_string(state.terminal_flag);
  for (const auto& v : state.vehicles) {
    if (v.role == Role::Strategic) {
      out += " " + v.color + "=" + std::to_string(v.cumulative_reward);
    }
  }
  out += '\n';
  for (const auto& row : grid) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ' ';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

}  // namespace normsim
