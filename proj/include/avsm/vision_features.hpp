#pragma once

#include "avsm/feature_map.hpp"
#include "avsm/filters.hpp"
#include "avsm/grid.hpp"

#include <array>
#include <numbers>

namespace avsm {

/// RGB panorama frame with planes in [0,1].
struct RgbFrame {
    Grid r;
    Grid g;
    Grid b;
    int t = 0;

    int width() const { return r.width(); }
    int height() const { return r.height(); }
    bool valid() const;

    static RgbFrame filled(int width, int height, double red, double green, double blue, int t = 0);
};

inline constexpr std::array<double, 4> kOrientations = {0.0, std::numbers::pi / 4, std::numbers::pi / 2,
                                                        3 * std::numbers::pi / 4};

struct GaborParams {
    double wavelength = 7.0;  // px
    double sigma = 2.8;       // px, across the edge
    double aspect = 0.8;      // envelope is sigma/aspect along the edge
};

/// Quadrature Gabor kernel for edges running along direction theta
/// (theta = 0: horizontal edges, theta = pi/2: vertical edges). Real part is
/// the even filter made exactly DC-free, imaginary part the odd filter.
ComplexKernel make_gabor_kernel(double theta, const GaborParams& params);

/// The four-orientation quadrature Gabor bank, FFT-backed.
class GaborBank {
public:
    explicit GaborBank(const GaborParams& params = {});

    const GaborParams& params() const { return params_; }

    /// Even + i*odd response per orientation in kOrientations order.
    std::array<ComplexResponse, 4> responses(const Grid& image) const;
    /// Even-symmetric response at orientation index i only.
    Grid even_response(const Grid& image, std::size_t i) const;
    /// Complex-cell energy sqrt(even^2 + odd^2) per orientation.
    std::array<Grid, 4> energies(const Grid& image) const;

private:
    GaborParams params_;
    SpectralFilterBank bank_;
};

/// Luminance gate below which color opponency is zeroed.
inline constexpr double kColorLuminanceGate = 0.1;

FeatureMap intensity_map(const RgbFrame& frame);

/// RG, GR, BY, YB in that order.
std::array<FeatureMap, 4> color_opponency_maps(const RgbFrame& frame, double luminance_gate = kColorLuminanceGate);

/// Gabor energy maps of the intensity map for kOrientations.
std::array<FeatureMap, 4> orientation_maps(const FeatureMap& intensity, const GaborBank& bank);

}  // namespace avsm
