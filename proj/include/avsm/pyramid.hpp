#pragma once

#include "avsm/feature_map.hpp"
#include "avsm/grid.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace avsm {

inline constexpr int kPyramidLevels = 10;
inline constexpr int kCommonScale = 8;

/// Scale ratio between consecutive pyramid levels.
enum class DownsampleFactor { HalfOctave, Octave };

inline double factor_value(DownsampleFactor f) {
    return f == DownsampleFactor::HalfOctave ? std::numbers::sqrt2 : 2.0;
}

/// Levels k = 1..10 stored at index k-1. All levels share tag and t.
struct Pyramid {
    std::vector<Grid> levels;
    DownsampleFactor factor = DownsampleFactor::HalfOctave;
    ChannelTag tag;
    int t = 0;

    const Grid& level(int k) const { return levels.at(static_cast<std::size_t>(k - 1)); }
    Grid& level(int k) { return levels.at(static_cast<std::size_t>(k - 1)); }
    int depth() const { return static_cast<int>(levels.size()); }
    FeatureMap feature_map(int k) const { return FeatureMap{level(k), k, t, tag}; }
};

/// Dimension of level k+1 from level k: ceil(n / factor).
int next_level_size(int n, DownsampleFactor factor);

/// Width/height of every level for a given base size.
std::vector<std::pair<int, int>> pyramid_shape(int width, int height, DownsampleFactor factor,
                                               int levels = kPyramidLevels);

/// 5-tap binomial low-pass then bilinear resampling, level by level.
/// Throws DataError("pyramid underflow") if a level that must be reduced
/// further is already 1x1.
Pyramid build_pyramid(const FeatureMap& map, DownsampleFactor factor = DownsampleFactor::HalfOctave);

/// Pyramid with the same geometry as `like`, built level-wise by `fn(k)`.
template <class Fn>
Pyramid map_levels(const Pyramid& like, Fn&& fn) {
    Pyramid out{{}, like.factor, like.tag, like.t};
    out.levels.reserve(like.levels.size());
    for (int k = 1; k <= like.depth(); ++k) out.levels.push_back(fn(k));
    return out;
}

/// Across-scale addition: resample every level to the dimensions of level
/// `common_k` (bilinear) and sum pixel-wise.
FeatureMap across_scale_add(const Pyramid& pyr, int common_k = kCommonScale);

/// Below this range a map is considered constant.
inline constexpr double kNumericFloor = 1e-10;

/// (x - min)/(max - min); constant maps become all zeros.
Grid rescale01(const Grid& g);
inline FeatureMap rescale01(FeatureMap m) {
    m.grid = rescale01(m.grid);
    return m;
}

}  // namespace avsm
