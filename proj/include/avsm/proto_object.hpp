#pragma once

#include "avsm/feature_map.hpp"
#include "avsm/pyramid.hpp"
#include "avsm/vision_features.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace avsm {

struct IttiParams {
    double range = 1.0;          // M: maps are scaled to [0, M]
    double peak_fraction = 0.05; // local maxima must exceed peak_fraction * M
};

/// The (M - mean_other_maxima)^2 factor applied after scaling to [0, M].
/// Local maxima are strict 3x3 maxima; the first global maximum is excluded
/// from the mean; with no other maxima the mean is 0.
double itti_multiplier(const Grid& scaled, const IttiParams& params = {});

/// Scale to [0, M] by M / max, then multiply by itti_multiplier. Maps whose
/// maximum is below kNumericFloor come back as zeros.
Grid normalize_itti(const Grid& map, const IttiParams& params = {});
inline FeatureMap normalize_itti(FeatureMap m, const IttiParams& params = {}) {
    m.grid = normalize_itti(m.grid, params);
    return m;
}

struct ProtoObjectParams {
    double dog_sigma_center = 2.0;    // px at every level
    double dog_sigma_surround = 4.0;  // px at every level
    double bo_offset = 3.0;           // px, side-sampling distance across the edge
    double annulus_radius = 6.0;      // px, grouping cell radius at every level
    double annulus_thickness = 2.0;   // px
    IttiParams itti;
    GaborParams gabor;
    DownsampleFactor factor = DownsampleFactor::HalfOctave;
};

/// Rectified center-surround responses: light = strong center on weak
/// surround, dark = weak center on strong surround.
struct CSPyramids {
    Pyramid light;
    Pyramid dark;
};

/// Side of an oriented edge. For orientation theta, Left is the normal
/// (-sin theta, cos theta) in image coordinates (x right, y down); for
/// vertical edges (theta = pi/2) it points to -x. Right is the opposite.
enum class BoSide : std::uint8_t { Left = 0, Right = 1 };

/// Unit vector pointing from an edge at orientation theta toward `side`.
std::array<double, 2> bo_direction(double theta, BoSide side);

struct BoOrientation {
    Pyramid left;    // activity owned by the Left side
    Pyramid right;   // activity owned by the Right side
    Pyramid winner;  // winner-take-all activity
    std::vector<std::vector<BoSide>> winner_side;  // per level, row-major
};

/// Border-ownership activity for the four orientations in kOrientations order.
struct BOPyramid {
    std::array<BoOrientation, 4> orientations;
};

/// Proto-object (grouping) activity; tag names the feature channel.
using GroupingPyramid = Pyramid;

/// The grouping mechanism for one feature channel. Holds the immutable filter
/// banks; every method is a pure function of its arguments.
class ProtoObjectModel {
public:
    explicit ProtoObjectModel(ProtoObjectParams params = {});

    const ProtoObjectParams& params() const { return params_; }
    const GaborBank& gabor() const { return gabor_; }

    /// DoG per level; for orientation channels the even Gabor at the
    /// channel's theta replaces the DoG.
    CSPyramids center_surround(const Pyramid& pyr, const ChannelTag& tag) const;

    /// normalize_itti applied to each level of both pyramids.
    CSPyramids normalize(const CSPyramids& cs) const;

    /// Gabor energy per orientation per level of `pyr`.
    std::array<Pyramid, 4> edge_pyramids(const Pyramid& pyr) const;

    /// Edge activity modulated by the normalized CS activity sampled one
    /// offset away on each side. Light and dark CS are merged across the
    /// current and all coarser scales and summed for polarity invariance,
    /// then the two sides compete pointwise.
    /// Throws DataError on geometry mismatch.
    BOPyramid border_ownership(const std::array<Pyramid, 4>& edges, const CSPyramids& normalized_cs) const;

    /// Annular grouping cells collecting winning BO activity that points
    /// toward the cell center (cosine weighted).
    GroupingPyramid grouping(const BOPyramid& bo) const;

    /// build_pyramid -> center_surround -> normalize -> border_ownership -> grouping.
    GroupingPyramid group_channel(const FeatureMap& feature) const;

private:
    struct AnnulusTap {
        int dx;
        int dy;
    };

    ProtoObjectParams params_;
    GaborBank gabor_;
    std::vector<AnnulusTap> annulus_;
};

/// Sub-pixel peak of a map (3-point parabolic refinement around the argmax),
/// expressed in the coordinates of a base grid of base_width x base_height.
std::array<double, 2> refined_peak(const Grid& map, int base_width, int base_height);

}  // namespace avsm
