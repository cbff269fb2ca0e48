#pragma once

#include "avsm/grid.hpp"
#include "avsm/vision_features.hpp"

#include <filesystem>

namespace avsm {

/// Reads an 8- or 16-bit PNG (gray, RGB, with or without alpha) or a binary
/// PPM/PGM (P6/P5). Channels come back in [0, 1]. Throws DataError.
RgbFrame read_image(const std::filesystem::path& path);

/// 8-bit RGB PNG; values are clamped to [0, 1].
void write_png(const std::filesystem::path& path, const RgbFrame& frame);
/// 8-bit grayscale PNG of a map, clamped to [0, 1].
void write_png(const std::filesystem::path& path, const Grid& gray);
void write_ppm(const std::filesystem::path& path, const RgbFrame& frame);

/// Float-map binary: "AVSM", then width, height, t as little-endian uint32,
/// then width*height little-endian float32 values in row-major order.
void write_float_map(const std::filesystem::path& path, const Grid& map, int t);

struct FloatMap {
    Grid grid;
    int t = 0;
};
FloatMap read_float_map(const std::filesystem::path& path);

}  // namespace avsm
