#pragma once

#include "avsm/grid.hpp"
#include "avsm/proto_object.hpp"
#include "avsm/pyramid.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace avsm {

/// Grouping pyramids of every sub-channel of one frame. Missing entries make
/// conspicuity() fail with "incomplete bundle".
struct ChannelGroupings {
    std::optional<GroupingPyramid> intensity;
    std::array<std::optional<GroupingPyramid>, 4> color;        // RG, GR, BY, YB
    std::array<std::optional<GroupingPyramid>, 4> orientation;  // kOrientations order
    std::optional<GroupingPyramid> motion;
    std::optional<GroupingPyramid> audio;
};

/// Five conspicuity maps at the common scale, each in [0, 1].
struct ConspicuityBundle {
    Grid I, C, O, M, A;
    int t = 0;
};

/// rescale01 of the across-scale sum of per-level normalized groupings,
/// summed over the given sub-channels.
Grid conspicuity_map(const std::vector<const GroupingPyramid*>& subchannels, const IttiParams& itti = {},
                     int common_k = kCommonScale);

ConspicuityBundle conspicuity(const ChannelGroupings& groupings, const IttiParams& itti = {},
                              int common_k = kCommonScale);

enum class MapKind { VSM, ASM, AVSM1, AVSM2, AVSM3 };

std::string to_string(MapKind kind);
/// Accepts "vsm", "asm", "avsm1", "avsm2", "avsm3" (any case); ConfigError otherwise.
MapKind parse_map_kind(const std::string& name);

struct SaliencyMap {
    Grid grid;
    MapKind kind = MapKind::VSM;
    int t = 0;
};

struct VisualWeights {
    double intensity = 0.25;
    double color = 0.25;
    double orientation = 0.25;
    double motion = 0.25;
};

struct AudioVisualWeights {
    double intensity = 0.2;
    double color = 0.2;
    double orientation = 0.2;
    double motion = 0.2;
    double audio = 0.2;
};

SaliencyMap vsm(const ConspicuityBundle& b, const VisualWeights& w = {});
/// Auditory saliency is the rescaled audio conspicuity itself.
SaliencyMap auditory_saliency(const ConspicuityBundle& b);
SaliencyMap avsm1(const ConspicuityBundle& b, const AudioVisualWeights& w = {});
SaliencyMap avsm2(const SaliencyMap& visual, const SaliencyMap& auditory);
/// R(V) + R(A) + R(V)R(A) before the final rescale; values in [0, 3].
Grid avsm3_raw(const SaliencyMap& visual, const SaliencyMap& auditory);
SaliencyMap avsm3(const SaliencyMap& visual, const SaliencyMap& auditory);

struct SalientEvent {
    double cx = 0;  // centroid, pixel coordinates of the map
    double cy = 0;
    int area = 0;
    double peak = 0;
    int t = 0;
    MapKind kind = MapKind::VSM;
};

/// Connected components (4- or 8-connected) of {value > threshold}.
std::vector<SalientEvent> extract_events(const SaliencyMap& map, double threshold = 0.75, int connectivity = 8);

}  // namespace avsm
