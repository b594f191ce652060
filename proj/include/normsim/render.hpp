#pragma once

#include <string>

#include "normsim/scenario.hpp"
#include "normsim/world.hpp"

namespace normsim {

/// One ASCII frame: a status line, then the grid. Road cells are drawn as
/// '-' / '|' ('+' where roads cross), vehicles as the uppercase initial of
/// their color, crashed vehicles as 'X'. Completed vehicles are not drawn.
std::string render_frame(const WorldState& state, const ScenarioSpec& spec);

}  // namespace normsim
