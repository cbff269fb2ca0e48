#include "avsm/mercator.hpp"

#include "avsm/error.hpp"

#include <algorithm>
#include <cmath>

namespace avsm {

namespace {
constexpr double kPi = std::numbers::pi;

double mercator_ordinate(double latitude) { return std::log(std::tan(kPi / 4 + latitude / 2)); }
}  // namespace

std::array<double, 3> Direction::unit() const {
    return {std::sin(el) * std::cos(az), std::sin(el) * std::sin(az), std::cos(el)};
}

Direction Direction::from_unit(const std::array<double, 3>& v) {
    double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    double el = std::acos(std::clamp(v[2] / n, -1.0, 1.0));
    double az = std::atan2(v[1], v[0]);
    if (az < 0) az += 2 * kPi;
    return {az, el};
}

MercatorPanorama::MercatorPanorama(int width, int height)
    : width_(width), height_(height), ordinate_max_(mercator_ordinate(kPi / 2 - kMinElevation)) {
    if (width <= 0 || height <= 0) throw DataError("zero-size panorama");
}

std::array<double, 2> MercatorPanorama::to_pixel(const Direction& d) const {
    double az = std::fmod(d.az, 2 * kPi);
    if (az < 0) az += 2 * kPi;
    double el = std::clamp(d.el, kMinElevation, kMaxElevation);
    double m = mercator_ordinate(kPi / 2 - el);
    double x = az * width_ / (2 * kPi);
    double y = (ordinate_max_ - m) / (2 * ordinate_max_) * height_ - 0.5;
    return {x, y};
}

Direction MercatorPanorama::to_direction(double x, double y) const {
    double az = std::fmod(x * 2 * kPi / width_, 2 * kPi);
    if (az < 0) az += 2 * kPi;
    double m = ordinate_max_ - (y + 0.5) / height_ * 2 * ordinate_max_;
    double lat = 2 * std::atan(std::exp(m)) - kPi / 2;
    return {az, kPi / 2 - lat};
}

}  // namespace avsm
