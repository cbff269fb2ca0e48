#include "doctest.h"

#include "avsm/vision_features.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace avsm;

namespace {

RgbFrame mirror(const RgbFrame& f) { return {mirror_x(f.r), mirror_x(f.g), mirror_x(f.b), f.t}; }

RgbFrame random_frame(std::mt19937_64& rng, int w, int h) {
    return {oracle::random_grid(rng, w, h), oracle::random_grid(rng, w, h), oracle::random_grid(rng, w, h), 0};
}

double mean_abs(const Grid& g, int x0, int x1, int y0, int y1) {
    double s = 0;
    int n = 0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            s += std::abs(g(x, y));
            ++n;
        }
    return s / n;
}

}  // namespace

TEST_CASE("intensity examples") {
    CHECK(intensity_map(RgbFrame::filled(4, 3, 1, 1, 1)).grid(2, 1) == doctest::Approx(1.0));
    CHECK(intensity_map(RgbFrame::filled(4, 3, 1, 0, 0)).grid(0, 0) == doctest::Approx(1.0 / 3));
    auto half = intensity_map(RgbFrame::filled(4, 3, 0.5, 0.5, 0.5));
    for (double v : half.grid.values()) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("color opponency examples") {
    auto red = color_opponency_maps(RgbFrame::filled(3, 3, 1, 0, 0));
    CHECK(red[0].grid(1, 1) > 0);
    CHECK(red[1].grid(1, 1) == 0.0);
    auto blue = color_opponency_maps(RgbFrame::filled(3, 3, 0, 0, 1));
    CHECK(blue[2].grid(1, 1) > 0);
    CHECK(blue[3].grid(1, 1) == 0.0);
    auto gray = color_opponency_maps(RgbFrame::filled(3, 3, 0.5, 0.5, 0.5));
    for (const auto& m : gray) CHECK(m.grid.max() == 0.0);
    CHECK(red[0].tag.kind == Channel::RG);
    CHECK(blue[3].tag.kind == Channel::YB);
}

TEST_CASE("luminance gate zeroes dark pixels") {
    auto dark = color_opponency_maps(RgbFrame::filled(3, 3, 0.25, 0, 0));
    CHECK(dark[0].grid.max() == 0.0);
    auto open = color_opponency_maps(RgbFrame::filled(3, 3, 0.25, 0, 0), 0.0);
    CHECK(open[0].grid.max() > 0.0);
}

TEST_CASE("intensity and color commute with mirroring") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        RgbFrame f = random_frame(rng, 31, 12);
        CHECK(intensity_map(mirror(f)).grid == mirror_x(intensity_map(f).grid));
        auto a = color_opponency_maps(mirror(f));
        auto b = color_opponency_maps(f);
        for (std::size_t i = 0; i < 4; ++i) CHECK(a[i].grid == mirror_x(b[i].grid));
    }
}

TEST_CASE("FFT Gabor bank matches direct convolution") {
    std::mt19937_64 rng(4);
    Grid img = oracle::random_grid(rng, 37, 29);
    GaborBank bank;
    auto fft = bank.responses(img);
    for (std::size_t i = 0; i < 4; ++i) {
        ComplexKernel k = make_gabor_kernel(kOrientations[i], bank.params());
        auto ref = oracle::convolve(img, k.taps, k.radius);
        double err = 0, norm = 0;
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x) {
                std::complex<double> got(fft[i].re(x, y), fft[i].im(x, y));
                auto want = ref[static_cast<std::size_t>(y) * img.width() + x];
                err += std::norm(got - want);
                norm += std::norm(want);
            }
        CHECK(std::sqrt(err / norm) < 1e-9);
    }
}

TEST_CASE("even Gabor is DC-free and the bank is silent on constants") {
    for (double theta : kOrientations) {
        auto k = make_gabor_kernel(theta, {});
        double dc = 0;
        for (auto c : k.taps) dc += c.real();
        CHECK(std::abs(dc) < 1e-12);
    }
    GaborBank bank;
    auto maps = orientation_maps(intensity_map(RgbFrame::filled(64, 48, 0.6, 0.6, 0.6)), bank);
    for (const auto& m : maps) CHECK(m.grid.max() < 1e-9);
}

TEST_CASE("vertical step edge prefers pi/2") {
    Grid img(64, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 32; x < 64; ++x) img(x, y) = 1.0;
    FeatureMap f{img, 1, 0, {Channel::Intensity}};
    auto maps = orientation_maps(f, GaborBank{});
    double vertical = maps[2].grid(32, 32) + maps[2].grid(31, 32);
    double horizontal = maps[0].grid(32, 32) + maps[0].grid(31, 32);
    CHECK(vertical > 5 * horizontal);
    CHECK(maps[2].tag.kind == Channel::Orientation);
    CHECK(maps[2].tag.theta == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("diagonal grating at the preferred wavelength selects pi/4") {
    const double theta = std::numbers::pi / 4;
    const double lambda = GaborParams{}.wavelength;
    Grid img(96, 96);
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x) {
            double across = -x * std::sin(theta) + y * std::cos(theta);
            img(x, y) = 0.5 + 0.5 * std::cos(2 * std::numbers::pi * across / lambda);
        }
    auto maps = orientation_maps({img, 1, 0, {Channel::Intensity}}, GaborBank{});
    std::size_t best = 0;
    double best_v = -1;
    for (std::size_t i = 0; i < 4; ++i) {
        double v = mean_abs(maps[i].grid, 24, 72, 24, 72);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    CHECK(best == 1);
}

TEST_CASE("rotating the image swaps the 0 and pi/2 channels") {
    std::mt19937_64 rng(8);
    Grid img = gaussian_blur(oracle::random_grid(rng, 60, 44), 1.5);
    GaborBank bank;
    auto base = orientation_maps({img, 1, 0, {}}, bank);
    auto rot = orientation_maps({rotate90(img), 1, 0, {}}, bank);
    CHECK(relative_l2(rot[2].grid, rotate90(base[0].grid)) < 0.05);
    CHECK(relative_l2(rot[0].grid, rotate90(base[2].grid)) < 0.05);
}

TEST_CASE("features stay finite on random frames") {
    std::mt19937_64 rng(99);
    GaborBank bank;
    for (int trial = 0; trial < 3; ++trial) {
        RgbFrame f = random_frame(rng, 40, 30);
        auto i = intensity_map(f);
        CHECK(i.grid.all_finite());
        for (const auto& m : color_opponency_maps(f)) CHECK(m.grid.all_finite());
        for (const auto& m : orientation_maps(i, bank)) CHECK(m.grid.all_finite());
    }
}
