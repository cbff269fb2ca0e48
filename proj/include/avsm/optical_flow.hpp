#pragma once

#include "avsm/feature_map.hpp"
#include "avsm/grid.hpp"
#include "avsm/vision_features.hpp"

namespace avsm {

/// Dense velocity field in pixels/frame.
struct FlowField {
    Grid u;
    Grid v;
    int t = 0;
};

/// Estimates dense flow between two grayscale images of equal size.
class FlowEstimator {
public:
    virtual ~FlowEstimator() = default;
    virtual FlowField estimate(const Grid& prev, const Grid& next) const = 0;
};

struct HornSchunckParams {
    double alpha = 10.0;           // smoothness weight (intensity units of 0..255)
    int iterations = 100;          // Jacobi iterations per pyramid level
    int levels = 4;                // coarse-to-fine levels (factor 2)
    double presmooth_sigma = 0.0;  // px; 0 disables
    double intensity_scale = 255.0;
    int min_level_size = 16;
};

/// Brightness constancy plus quadratic smoothness, solved by Jacobi
/// iteration, coarse-to-fine with bilinear warping between levels.
class HornSchunck final : public FlowEstimator {
public:
    explicit HornSchunck(HornSchunckParams params = {});
    FlowField estimate(const Grid& prev, const Grid& next) const override;
    const HornSchunckParams& params() const { return params_; }

private:
    void refine(const Grid& i0, const Grid& i1, Grid& u, Grid& v) const;
    HornSchunckParams params_;
};

/// Flow between the intensity maps of two frames.
/// Throws DataError("frame size mismatch") when the frames differ in size.
FlowField optical_flow(const RgbFrame& prev, const RgbFrame& next, const FlowEstimator& estimator);

/// sqrt(u^2 + v^2) pointwise.
FeatureMap motion_magnitude(const FlowField& flow);

}  // namespace avsm
