#include "doctest.h"

#include "avsm/error.hpp"
#include "avsm/filters.hpp"
#include "avsm/optical_flow.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace avsm;

namespace {

RgbFrame gray(const Grid& g, int t = 0) { return {g, g, g, t}; }

Grid square_at(int w, int h, int x0, int y0, int side) {
    Grid g(w, h);
    for (int y = y0; y < y0 + side; ++y)
        for (int x = x0; x < x0 + side; ++x) g(x, y) = 1.0;
    return g;
}

double median(std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
    return v[v.size() / 2];
}

}  // namespace

TEST_CASE("identical frames give zero flow") {
    std::mt19937_64 rng(1);
    RgbFrame f = gray(gaussian_blur(oracle::random_grid(rng, 64, 48), 2.0));
    auto flow = optical_flow(f, f, HornSchunck{});
    CHECK(std::max(std::abs(flow.u.max()), std::abs(flow.u.min())) < 1e-6);
    CHECK(std::max(std::abs(flow.v.max()), std::abs(flow.v.min())) < 1e-6);
}

TEST_CASE("translated square") {
    Grid a = square_at(96, 64, 30, 22, 20);
    Grid b = square_at(96, 64, 32, 22, 20);
    auto flow = optical_flow(gray(a), gray(b, 1), HornSchunck{});
    double su = 0, sv = 0;
    int n = 0;
    for (int y = 22; y < 42; ++y)
        for (int x = 32; x < 50; ++x) {
            su += flow.u(x, y);
            sv += flow.v(x, y);
            ++n;
        }
    CHECK(su / n >= 1.5);
    CHECK(su / n <= 2.5);
    CHECK(std::abs(sv / n) <= 0.5);
}

TEST_CASE("global shift of a texture") {
    std::mt19937_64 rng(2);
    Grid tex = gaussian_blur(oracle::random_grid(rng, 100, 80), 2.0);
    Grid shifted(100, 80);
    for (int y = 0; y < 80; ++y)
        for (int x = 0; x < 100; ++x) shifted(x, y) = tex.clamped(x - 1, y - 1);
    auto flow = optical_flow(gray(tex), gray(shifted, 1), HornSchunck{});
    std::vector<double> us, vs;
    for (int y = 10; y < 70; ++y)
        for (int x = 10; x < 90; ++x) {
            us.push_back(flow.u(x, y));
            vs.push_back(flow.v(x, y));
        }
    CHECK(std::abs(median(vs) - 1.0) <= 0.3);
    CHECK(std::abs(median(us) - 1.0) <= 0.3);
}

TEST_CASE("motion magnitude examples and sign invariance") {
    FlowField f{Grid(3, 1), Grid(3, 1), 4};
    f.u(0, 0) = 3;
    f.v(0, 0) = 4;
    f.u(2, 0) = -1;
    f.v(2, 0) = 1;
    auto m = motion_magnitude(f);
    CHECK(m.grid(0, 0) == doctest::Approx(5.0));
    CHECK(m.grid(1, 0) == 0.0);
    CHECK(m.grid(2, 0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(m.tag.kind == Channel::Motion);
    CHECK(m.t == 4);

    std::mt19937_64 rng(6);
    FlowField r{oracle::random_grid(rng, 20, 10, -5, 5), oracle::random_grid(rng, 20, 10, -5, 5), 0};
    FlowField neg{r.u * -1.0, r.v * -1.0, 0};
    CHECK(motion_magnitude(r).grid == motion_magnitude(neg).grid);
}

TEST_CASE("flow rejects size mismatch") {
    CHECK_THROWS_AS(optical_flow(gray(Grid(32, 32)), gray(Grid(30, 32)), HornSchunck{}), DataError);
}
