#include "avsm/pyramid.hpp"

#include "avsm/error.hpp"
#include "avsm/filters.hpp"

namespace avsm {

int next_level_size(int n, DownsampleFactor factor) {
    // The epsilon keeps exact multiples (e.g. 256 / sqrt2 * sqrt2) from rounding up.
    return std::max(1, static_cast<int>(std::ceil(n / factor_value(factor) - 1e-9)));
}

std::vector<std::pair<int, int>> pyramid_shape(int width, int height, DownsampleFactor factor, int levels) {
    std::vector<std::pair<int, int>> dims{{width, height}};
    for (int k = 2; k <= levels; ++k) {
        auto [w, h] = dims.back();
        if (w < 2 && h < 2) throw DataError("pyramid underflow");
        dims.emplace_back(next_level_size(w, factor), next_level_size(h, factor));
    }
    return dims;
}

Pyramid build_pyramid(const FeatureMap& map, DownsampleFactor factor) {
    if (map.grid.empty()) throw DataError("pyramid underflow");
    auto dims = pyramid_shape(map.grid.width(), map.grid.height(), factor);
    Pyramid pyr{{}, factor, map.tag, map.t};
    pyr.levels.reserve(dims.size());
    pyr.levels.push_back(map.grid);
    for (std::size_t k = 1; k < dims.size(); ++k) {
        Grid low = binomial_blur(pyr.levels.back());
        pyr.levels.push_back(resize_bilinear(low, dims[k].first, dims[k].second));
    }
    return pyr;
}

FeatureMap across_scale_add(const Pyramid& pyr, int common_k) {
    if (common_k < 1 || common_k > pyr.depth()) throw ConfigError("common scale outside pyramid");
    const Grid& target = pyr.level(common_k);
    Grid sum(target.width(), target.height());
    for (const auto& level : pyr.levels) sum += resize_bilinear(level, target.width(), target.height());
    return FeatureMap{std::move(sum), common_k, pyr.t, pyr.tag};
}

Grid rescale01(const Grid& g) {
    if (g.empty()) return g;
    const double lo = g.min();
    const double hi = g.max();
    Grid out(g.width(), g.height());
    if (hi - lo <= kNumericFloor) return out;
    const double inv = 1.0 / (hi - lo);
    auto src = g.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::clamp((src[i] - lo) * inv, 0.0, 1.0);
    return out;
}

}  // namespace avsm
