#pragma once

// Frequency-domain delay-and-sum steered power, written independently of the
// spherical-harmonic beamformer: it shares only the direction convention.

#include "avsm/audio_map.hpp"

#include <cmath>
#include <complex>
#include <algorithm>
#include <numbers>
#include <vector>

namespace oracle {

inline avsm::Grid das_power(const avsm::AudioFrame& frame, const avsm::MicArrayGeometry& geom,
                            const avsm::SteeringGrid& grid, double f_lo = 300, double f_hi = 6500,
                            double c = 343.0) {
    const double pi = std::numbers::pi;
    const int len = static_cast<int>(frame.channels.front().size());
    const int mics = static_cast<int>(frame.channels.size());
    const double bin_hz = static_cast<double>(frame.sample_rate) / len;
    const int lo = static_cast<int>(std::lround(f_lo / bin_hz));
    const int hi = static_cast<int>(std::lround(f_hi / bin_hz));

    // Plain DFT of the Hann-windowed channels over the band.
    std::vector<std::vector<std::complex<double>>> x(static_cast<std::size_t>(mics));
    std::vector<double> win(static_cast<std::size_t>(len));
    for (int n = 0; n < len; ++n) win[static_cast<std::size_t>(n)] = 0.5 - 0.5 * std::cos(2 * pi * n / (len - 1));
    // Split real/imaginary accumulation: std::complex products go through the
    // slow NaN-checking path without -ffast-math.
    for (int m = 0; m < mics; ++m) {
        auto& xm = x[static_cast<std::size_t>(m)];
        const auto& ch = frame.channels[static_cast<std::size_t>(m)];
        for (int b = lo; b <= hi; ++b) {
            double re = 0, im = 0;
            // Recurrence for e^{-i 2 pi b n / len}.
            const double sr = std::cos(2 * pi * b / len), si = -std::sin(2 * pi * b / len);
            double pr = 1, pi_ = 0;
            for (int n = 0; n < len; ++n) {
                const double v = win[static_cast<std::size_t>(n)] * static_cast<double>(ch[static_cast<std::size_t>(n)]);
                re += v * pr;
                im += v * pi_;
                const double t = pr * sr - pi_ * si;
                pi_ = pr * si + pi_ * sr;
                pr = t;
                if ((n & 255) == 255) {
                    const double a = std::hypot(pr, pi_);
                    pr /= a;
                    pi_ /= a;
                }
            }
            xm.emplace_back(re, im);
        }
    }

    avsm::Grid power(grid.width(), grid.height());
    const int nb = hi - lo + 1;
    std::vector<double> yr(static_cast<std::size_t>(nb)), yi(static_cast<std::size_t>(nb));
    for (int j = 0; j < grid.height(); ++j) {
        for (int i = 0; i < grid.width(); ++i) {
            auto d = avsm::Direction{grid.azimuths[static_cast<std::size_t>(i)], grid.elevations[static_cast<std::size_t>(j)]}.unit();
            std::fill(yr.begin(), yr.end(), 0.0);
            std::fill(yi.begin(), yi.end(), 0.0);
            for (int m = 0; m < mics; ++m) {
                auto u = geom.positions[static_cast<std::size_t>(m)].unit();
                double proj = u[0] * d[0] + u[1] * d[1] + u[2] * d[2];
                // A wave from d reaches mic m early by r (u.d) / c; undo that phase lead.
                double dphi = -2 * pi * bin_hz / c * geom.radius * proj;
                const double sr = std::cos(dphi), si = std::sin(dphi);
                double pr = std::cos(dphi * lo), pi_ = std::sin(dphi * lo);
                const auto& xm = x[static_cast<std::size_t>(m)];
                for (int b = 0; b < nb; ++b) {
                    const double xr = xm[static_cast<std::size_t>(b)].real(), xi = xm[static_cast<std::size_t>(b)].imag();
                    yr[static_cast<std::size_t>(b)] += pr * xr - pi_ * xi;
                    yi[static_cast<std::size_t>(b)] += pr * xi + pi_ * xr;
                    const double t = pr * sr - pi_ * si;
                    pi_ = pr * si + pi_ * sr;
                    pr = t;
                }
            }
            double p = 0;
            for (int b = 0; b < nb; ++b) p += yr[static_cast<std::size_t>(b)] * yr[static_cast<std::size_t>(b)] + yi[static_cast<std::size_t>(b)] * yi[static_cast<std::size_t>(b)];
            power(i, j) = p;
        }
    }
    return power;
}

}  // namespace oracle
