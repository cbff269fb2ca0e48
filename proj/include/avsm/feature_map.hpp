#pragma once

#include "avsm/grid.hpp"

#include <string>

namespace avsm {

enum class Channel { Intensity, RG, GR, BY, YB, Orientation, Motion, Audio };

/// Channel identity; `theta` is meaningful only for orientation channels.
struct ChannelTag {
    Channel kind = Channel::Intensity;
    double theta = 0.0;

    friend bool operator==(const ChannelTag&, const ChannelTag&) = default;
};

std::string to_string(const ChannelTag& tag);

/// A 2D feature grid at pyramid scale k (1 = full resolution) and frame t.
struct FeatureMap {
    Grid grid;
    int scale = 1;
    int t = 0;
    ChannelTag tag;
};

}  // namespace avsm
