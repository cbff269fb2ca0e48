#include "doctest.h"

#include "avsm/audio_map.hpp"
#include "avsm/error.hpp"
#include "avsm/mercator.hpp"
#include "avsm/synth_scene.hpp"
#include "support/das_oracle.hpp"
#include "support/scenes.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace avsm;

namespace {

constexpr double kPi = std::numbers::pi;

const MicArrayGeometry& geometry() {
    static const MicArrayGeometry g = MicArrayGeometry::fibonacci();
    return g;
}

const ShBeamformer& beamformer() {
    static const ShBeamformer bf(geometry(), SteeringGrid::standard());
    return bf;
}

AudioFrame render(const SceneScript& s) { return frame_audio(render_audio(s, geometry()), 0); }

// Wrapped bin distance on the steering grid.
double bin_distance(std::pair<int, int> a, std::pair<int, int> b, int width = kSteeringAzimuths) {
    int dx = std::abs(a.first - b.first);
    dx = std::min(dx, width - dx);
    return std::max(dx, std::abs(a.second - b.second));
}

std::pair<int, int> truth_bin(const Direction& d) {
    auto c = steering_coordinates(SteeringGrid::standard(), d);
    return {static_cast<int>(std::lround(c[0])) % kSteeringAzimuths, static_cast<int>(std::lround(c[1]))};
}

}  // namespace

TEST_CASE("audio framing") {
    MultichannelPcm pcm;
    pcm.channels.assign(1, std::vector<float>(60 * 44100));
    CHECK(audio_frame_count(pcm) == 600);

    MultichannelPcm small;
    small.channels.assign(64, std::vector<float>(44100));
    for (std::size_t i = 0; i < 44100; ++i) small.channels[3][i] = static_cast<float>(i);
    auto f0 = frame_audio(small, 0);
    REQUIRE(f0.channels.size() == 64);
    CHECK(f0.channels[3].size() == 4410);
    CHECK(f0.channels[3][4409] == 4409.0f);
    auto f9 = frame_audio(small, 9);
    CHECK(f9.channels[3][0] == 39690.0f);
    CHECK(f9.t == 9);
    CHECK_THROWS_AS(frame_audio(small, 10), DataError);
}

TEST_CASE("Fibonacci geometry round-trips through the text format") {
    auto path = std::filesystem::temp_directory_path() / "avsm_geom_test.txt";
    geometry().save(path);
    auto g = MicArrayGeometry::load(path, 0.1016);
    REQUIRE(g.positions.size() == 64);
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK(g.positions[i].az == doctest::Approx(geometry().positions[i].az).epsilon(1e-15));
        CHECK(g.positions[i].el == doctest::Approx(geometry().positions[i].el).epsilon(1e-15));
    }
    std::ofstream(path) << "# header\n0.1 0.2\noops\n";
    CHECK_THROWS_WITH_AS(MicArrayGeometry::load(path), "malformed geometry line 3", DataError);
    std::ofstream(path) << "0.1 0.2\n";
    CHECK_THROWS_AS(MicArrayGeometry::load(path), DataError);
    std::filesystem::remove(path);
}

TEST_CASE("degenerate arrays are rejected") {
    auto g = geometry();
    g.positions[5] = g.positions[6];
    CHECK_THROWS_WITH_AS(ShBeamformer(g, SteeringGrid::standard()), "ill-conditioned array", DataError);
    auto ring = geometry();
    for (int i = 0; i < 64; ++i) ring.positions[static_cast<std::size_t>(i)] = {2 * kPi * i / 64, kPi / 2};
    CHECK_THROWS_WITH_AS(ShBeamformer(ring, SteeringGrid::standard()), "ill-conditioned array", DataError);
    BeamformerParams p;
    p.order = 8;
    CHECK_THROWS_AS(ShBeamformer(geometry(), SteeringGrid::standard(), p), ConfigError);
}

TEST_CASE("real spherical harmonics are orthonormal") {
    // Gauss-Legendre in cos(el) times a uniform azimuth rule is exact for these degrees.
    const int order = 4, nt = 24, np = 48;
    std::vector<double> nodes, weights;
    for (int i = 0; i < nt; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (nt + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= nt; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = nt * (x * p1 - p0) / (x * x - 1);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                nodes.push_back(x);
                weights.push_back(2 / ((1 - x * x) * dp * dp));
                break;
            }
        }
    }
    REQUIRE(nodes.size() == static_cast<std::size_t>(nt));
    const int nc = (order + 1) * (order + 1);
    std::vector<double> gram(static_cast<std::size_t>(nc * nc));
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < np; ++j) {
            auto y = real_spherical_harmonics(order, {2 * kPi * j / np, std::acos(nodes[static_cast<std::size_t>(i)])});
            double w = weights[static_cast<std::size_t>(i)] * 2 * kPi / np;
            for (int a = 0; a < nc; ++a)
                for (int b = 0; b < nc; ++b) gram[static_cast<std::size_t>(a * nc + b)] += w * y[static_cast<std::size_t>(a)] * y[static_cast<std::size_t>(b)];
        }
    for (int a = 0; a < nc; ++a)
        for (int b = 0; b < nc; ++b) CHECK(gram[static_cast<std::size_t>(a * nc + b)] == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-10));

    auto y = real_spherical_harmonics(1, {0.3, 0.4});
    CHECK(y[0] == doctest::Approx(1 / std::sqrt(4 * kPi)));
    CHECK(std::abs(y[2]) == doctest::Approx(std::sqrt(3 / (4 * kPi)) * std::cos(0.4)));
}

TEST_CASE("open-sphere mode strength") {
    CHECK(std::abs(mode_strength(0, 0.0, SphereModel::Open) - std::complex<double>(4 * kPi, 0)) < 1e-12);
    CHECK(std::abs(mode_strength(2, 1.3, SphereModel::Open)) == doctest::Approx(4 * kPi * std::abs(std::sph_bessel(2, 1.3))));
    CHECK(std::abs(mode_strength(2, 1.3, SphereModel::Rigid)) > std::abs(mode_strength(2, 1.3, SphereModel::Open)));
}

TEST_CASE("digital silence gives an all-zero map") {
    AudioFrame silent;
    silent.channels.assign(64, std::vector<float>(4410, 0.0f));
    Grid p = beamformer().steered_power(silent);
    CHECK(p.max() == 0.0);
    CHECK(p.sum() == 0.0);
    auto m = beamformer().beamform(silent, 512, 256);
    CHECK(m.panorama.grid.max() == 0.0);
    CHECK(m.panorama.tag.kind == Channel::Audio);
}

TEST_CASE("malformed audio frames are rejected") {
    AudioFrame short_frame;
    short_frame.channels.assign(63, std::vector<float>(4410));
    CHECK_THROWS_AS(beamformer().steered_power(short_frame), DataError);
    AudioFrame ragged;
    ragged.channels.assign(64, std::vector<float>(4410));
    ragged.channels[7].pop_back();
    CHECK_THROWS_AS(beamformer().steered_power(ragged), DataError);
    AudioFrame nan;
    nan.channels.assign(64, std::vector<float>(4410));
    nan.channels[1][3] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(beamformer().steered_power(nan), DataError);
}

TEST_CASE("1 kHz plane wave from az 90, el 90 localizes to bin (32, 32)") {
    auto frame = render(scenes::plane_wave(scenes::degrees(90, 90), WaveformType::Tone, 1000));
    Grid p = beamformer().steered_power(frame);
    CHECK(bin_distance(p.argmax(), {32, 32}) <= 1);
    Grid das = oracle::das_power(frame, geometry(), SteeringGrid::standard());
    CHECK(bin_distance(das.argmax(), {32, 32}) <= 1);
    CHECK(bin_distance(p.argmax(), das.argmax()) <= 1);
    CHECK(p.min() >= 0.0);
}

TEST_CASE("two sources 90 degrees apart give two local maxima") {
    auto s = scenes::plane_wave(scenes::degrees(60, 90), WaveformType::Noise, 0, 0.5, 3);
    auto second = s.audio_actors[0];
    second.name = "second";
    second.path[0].dir = scenes::degrees(150, 90);
    s.audio_actors.push_back(second);
    auto frame = render(s);
    Grid p = beamformer().steered_power(frame);
    Grid das = oracle::das_power(frame, geometry(), SteeringGrid::standard());
    for (double az : {60.0, 150.0}) {
        auto truth = truth_bin(scenes::degrees(az, 90));
        for (const Grid* g : {&p, &das}) {
            // strongest point within 4 bins must be a local maximum within 1 bin of truth
            std::pair<int, int> best{-1, -1};
            double bv = -1;
            for (int j = 0; j < g->height(); ++j)
                for (int i = 0; i < g->width(); ++i)
                    if (bin_distance({i, j}, truth) <= 4 && (*g)(i, j) > bv) {
                        bv = (*g)(i, j);
                        best = {i, j};
                    }
            CHECK(bin_distance(best, truth) <= 1);
            bool local = true;
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di) {
                    int j = best.second + dj;
                    if ((!di && !dj) || j < 0 || j >= g->height()) continue;
                    int i = (best.first + di + kSteeringAzimuths) % kSteeringAzimuths;
                    if ((*g)(i, j) > bv) local = false;
                }
            CHECK(local);
        }
    }
}

TEST_CASE("beamformer invariants") {
    const Direction on_grid{2 * kPi * 40 / 128, (31 + 0.5) * kPi / 64};
    auto frame = render(scenes::plane_wave(on_grid, WaveformType::Noise, 0, 0.25, 5));
    Grid p = beamformer().steered_power(frame);
    CHECK(p.argmax() == std::pair{40, 31});

    AudioFrame loud = frame;
    for (auto& ch : loud.channels)
        for (float& v : ch) v *= 2.0f;
    Grid pl = beamformer().steered_power(loud);
    CHECK(pl.argmax() == p.argmax());
    CHECK(pl.max() >= 4.0 * p.max() * 0.95);
    CHECK(pl.max() == doctest::Approx(4.0 * p.max()).epsilon(1e-5));

    auto doubled = render(scenes::plane_wave(on_grid, WaveformType::Noise, 0, 0.5, 5));
    CHECK(beamformer().steered_power(doubled).max() >= 4.0 * p.max() * 0.95);

    const Direction next{2 * kPi * 41 / 128, on_grid.el};
    Grid pn = beamformer().steered_power(render(scenes::plane_wave(next, WaveformType::Noise, 0, 0.25, 5)));
    CHECK(pn.argmax().first == p.argmax().first + 1);
    CHECK(pn.argmax().second == p.argmax().second);

    CHECK(std::isfinite(p.sum()));
    CHECK(p.sum() > 0);
}

TEST_CASE("Mercator projection") {
    MercatorPanorama pan(512, 256);
    auto eq = pan.to_pixel({1.0, kPi / 2});
    CHECK(eq[1] == doctest::Approx(127.5));
    auto a0 = pan.to_pixel({0.0, kPi / 2});
    auto api = pan.to_pixel({kPi, kPi / 2});
    CHECK(api[0] - a0[0] == doctest::Approx(256.0));
    auto up = pan.to_pixel({0.5, kPi / 2 - 0.4});
    auto down = pan.to_pixel({0.5, kPi / 2 + 0.4});
    CHECK(up[1] + down[1] == doctest::Approx(255.0));
    CHECK(up[1] < down[1]);
    CHECK(pan.to_pixel({0.5, 0.01})[1] == doctest::Approx(pan.to_pixel({0.5, MercatorPanorama::kMinElevation})[1]));
    CHECK(pan.to_pixel({0.5, MercatorPanorama::kMinElevation})[1] == doctest::Approx(-0.5));
    for (double x : {0.0, 13.5, 300.0, 511.0})
        for (double y : {0.0, 64.0, 200.25, 255.0}) {
            auto d = pan.to_direction(x, y);
            auto back = pan.to_pixel(d);
            CHECK(back[0] == doctest::Approx(x).epsilon(1e-9));
            CHECK(back[1] == doctest::Approx(y).epsilon(1e-9));
        }
    auto u = Direction{1.2, 0.7}.unit();
    auto d = Direction::from_unit(u);
    CHECK(d.az == doctest::Approx(1.2));
    CHECK(d.el == doctest::Approx(0.7));
    CHECK_THROWS_AS(MercatorPanorama(0, 10), DataError);
}

TEST_CASE("projection onto the panorama") {
    const auto grid = SteeringGrid::standard();
    auto peak_of = [&](const Direction& d) {
        Grid p(grid.width(), grid.height());
        auto c = truth_bin(d);
        p(c.first, c.second) = 1.0;
        return project_to_panorama(p, grid, 512, 256).grid;
    };
    auto horizon = peak_of({kPi / 3, (31 + 0.5) * kPi / 64});
    auto below = peak_of({kPi / 3, (32 + 0.5) * kPi / 64});
    // the two steering rows either side of the horizon straddle the center row
    CHECK(std::abs(horizon.argmax().second - 127.5) <= 1.5);
    CHECK(std::abs(below.argmax().second - 127.5) <= 1.5);
    auto z = peak_of({0.0, (31 + 0.5) * kPi / 64});
    auto h = peak_of({kPi, (31 + 0.5) * kPi / 64});
    int dx = std::abs(h.argmax().first - z.argmax().first);
    CHECK(std::abs(std::min(dx, 512 - dx) - 256) <= 1);

    auto flat = project_to_panorama(Grid(grid.width(), grid.height(), 2.0), grid, 512, 256);
    CHECK(flat.grid.max() / flat.grid.min() < 1.2);
    CHECK(flat.tag.kind == Channel::Audio);
    CHECK_THROWS_AS(project_to_panorama(Grid(10, 10), grid, 512, 256), DataError);
}

TEST_CASE("beamformed maps follow source azimuth on the panorama") {
    auto f0 = render(scenes::plane_wave(scenes::degrees(0, 90), WaveformType::Noise, 0, 0.5, 9));
    auto f1 = render(scenes::plane_wave(scenes::degrees(180, 90), WaveformType::Noise, 0, 0.5, 9));
    auto m0 = beamformer().beamform(f0, 512, 256).panorama.grid;
    auto m1 = beamformer().beamform(f1, 512, 256).panorama.grid;
    int dx = std::abs(m1.argmax().first - m0.argmax().first);
    CHECK(std::abs(std::min(dx, 512 - dx) - 256) <= 4);
    CHECK(std::abs(m0.argmax().second - 127.5) <= 4);
}
