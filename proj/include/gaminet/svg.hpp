#pragma once

#include <string>
#include <vector>

#include "gaminet/interpret.hpp"

namespace gaminet {

// Standalone SVG documents for the interpretation outputs: line plots for
// numerical main effects, bar charts for categorical effects and ranked
// tables, color-mapped lattices for interactions.
std::string svg_shape_grid(const ShapeGrid& grid);
std::string svg_importance(const ImportanceTable& table);
std::string svg_local_explanation(const LocalExplanation& explanation);

/// All effect panels side by side (main effects first, then interactions).
std::string svg_panel(const std::vector<ShapeGrid>& grids);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace gaminet
