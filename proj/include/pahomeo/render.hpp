#pragma once

// Standalone SVG figures of a mesh or of its image under the map.

#include "pahomeo/pwa.hpp"

#include <string>
#include <vector>

namespace pahomeo {

struct RenderStyle {
  double stroke_width = 0.4;
  std::vector<std::string> palette{"#e8eef5", "#d5e2ef", "#f2ead8", "#e3efe0"};
  std::string highlight = "#c8553d";
  std::string stroke = "#2f3b4a";
  Rational scale = 480;  // pixels per unit
  Rational margin = 12;
};

enum class RenderMode { Domain, Image, SideBySide };

/// Throws std::invalid_argument for an unknown name.
RenderMode parse_render_mode(const std::string& name);

/// Cells of `highlight` (may be null) are filled with style.highlight, the
/// rest cycle through the palette. Throws std::invalid_argument for a
/// non-positive scale or an empty palette.
std::string render_svg(const PwaMap& f, const CellSet* highlight, RenderMode mode,
                       const RenderStyle& style = {});

}  // namespace pahomeo
