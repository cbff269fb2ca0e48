#pragma once

#include "avsm/grid.hpp"
#include "avsm/vision_features.hpp"

#include <array>
#include <vector>

namespace avsm {

/// Closed polyline in continuous pixel coordinates of the source map.
struct Contour {
    std::vector<std::array<double, 2>> points;
};

/// Marching-squares isolines of `map` at `level`. The map is treated as if
/// surrounded by values below the level, so every contour closes; vertices on
/// the outer ring are pulled back onto the image border.
std::vector<Contour> isocontours(const Grid& map, double level);

/// Copy of `frame` with the isocontours of `map` drawn in red. A map whose
/// size differs from the frame is bilinearly resized to it first.
RgbFrame overlay_isocontours(const RgbFrame& frame, const Grid& map, double level,
                             std::array<double, 3> color = {1.0, 0.0, 0.0});

}  // namespace avsm
