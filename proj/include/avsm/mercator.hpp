#pragma once

#include <array>
#include <numbers>

namespace avsm {

/// A direction on the sphere. `el` is the polar angle from the zenith
/// (0 = up, pi/2 = horizon, pi = down); `az` in [0, 2pi).
struct Direction {
    double az = 0.0;
    double el = std::numbers::pi / 2;

    std::array<double, 3> unit() const;
    static Direction from_unit(const std::array<double, 3>& v);
};

/// Mercator panorama register shared by video and audio. Columns are linear
/// in azimuth (column x has az = 2 pi x / width); rows are linear in the
/// Mercator ordinate ln(tan(pi/4 + lat/2)) over the clamped latitude band,
/// top row = highest latitude.
class MercatorPanorama {
public:
    static constexpr double kMinElevation = std::numbers::pi / 12;
    static constexpr double kMaxElevation = 11 * std::numbers::pi / 12;

    MercatorPanorama(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }

    /// Continuous pixel coordinates; elevation is clamped to the band first.
    std::array<double, 2> to_pixel(const Direction& d) const;
    Direction to_direction(double x, double y) const;

private:
    int width_;
    int height_;
    double ordinate_max_;
};

}  // namespace avsm
