#include "avsm/optical_flow.hpp"

#include "avsm/error.hpp"
#include "avsm/filters.hpp"

#include <cmath>
#include <vector>

namespace avsm {

namespace {

Grid downsample2(const Grid& g) {
    Grid blurred = gaussian_blur(g, 1.0);
    int w = (g.width() + 1) / 2;
    int h = (g.height() + 1) / 2;
    Grid out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out(x, y) = blurred.clamped(2 * x, 2 * y);
    return out;
}

// Flow values are in pixels of the source level, so scale with the resize.
Grid upsample_flow(const Grid& f, int width, int height, double factor) {
    Grid out(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) out(x, y) = factor * sample_bilinear(f, x / factor, y / factor);
    return out;
}

Grid warp(const Grid& img, const Grid& u, const Grid& v) {
    Grid out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out(x, y) = sample_bilinear(img, x + u(x, y), y + v(x, y));
    return out;
}

Grid gradient_x(const Grid& g) {
    Grid out(g.width(), g.height());
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) out(x, y) = 0.5 * (g.clamped(x + 1, y) - g.clamped(x - 1, y));
    return out;
}

Grid gradient_y(const Grid& g) {
    Grid out(g.width(), g.height());
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) out(x, y) = 0.5 * (g.clamped(x, y + 1) - g.clamped(x, y - 1));
    return out;
}

// Horn-Schunck neighbourhood average: 1/6 edge neighbours, 1/12 corners.
double hs_average(const Grid& g, int x, int y) {
    return (g.clamped(x - 1, y) + g.clamped(x + 1, y) + g.clamped(x, y - 1) + g.clamped(x, y + 1)) / 6.0 +
           (g.clamped(x - 1, y - 1) + g.clamped(x + 1, y - 1) + g.clamped(x - 1, y + 1) + g.clamped(x + 1, y + 1)) /
               12.0;
}

}  // namespace

HornSchunck::HornSchunck(HornSchunckParams params) : params_(params) {
    if (params_.iterations < 0 || params_.levels < 1 || params_.alpha < 0)
        throw ConfigError("invalid Horn-Schunck parameters");
}

void HornSchunck::refine(const Grid& i0, const Grid& i1, Grid& u, Grid& v) const {
    Grid i1w = warp(i1, u, v);
    Grid ix = gradient_x(i0);
    ix += gradient_x(i1w);
    ix *= 0.5;
    Grid iy = gradient_y(i0);
    iy += gradient_y(i1w);
    iy *= 0.5;
    Grid it = i1w - i0;

    const int w = i0.width();
    const int h = i0.height();
    const double a2 = params_.alpha * params_.alpha;
    // Increments du, dv around the warped flow; smoothness acts on u + du.
    Grid du(w, h), dv(w, h), nu(w, h), nv(w, h);
    Grid uu = u, vv = v;
    for (int iter = 0; iter < params_.iterations; ++iter) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double ua = hs_average(uu, x, y) - u(x, y);
                double va = hs_average(vv, x, y) - v(x, y);
                double gx = ix(x, y), gy = iy(x, y);
                double tval = (gx * ua + gy * va + it(x, y)) / (a2 + gx * gx + gy * gy);
                nu(x, y) = ua - gx * tval;
                nv(x, y) = va - gy * tval;
            }
        }
        std::swap(du, nu);
        std::swap(dv, nv);
        uu = u + du;
        vv = v + dv;
    }
    u = std::move(uu);
    v = std::move(vv);
}

FlowField HornSchunck::estimate(const Grid& prev, const Grid& next) const {
    if (!prev.same_shape(next)) throw DataError("frame size mismatch");
    Grid a = prev * params_.intensity_scale;
    Grid b = next * params_.intensity_scale;
    if (params_.presmooth_sigma > 0) {
        a = gaussian_blur(a, params_.presmooth_sigma);
        b = gaussian_blur(b, params_.presmooth_sigma);
    }
    std::vector<std::pair<Grid, Grid>> pyr{{std::move(a), std::move(b)}};
    while (static_cast<int>(pyr.size()) < params_.levels) {
        const auto& [pa, pb] = pyr.back();
        if (std::min(pa.width(), pa.height()) / 2 < params_.min_level_size) break;
        pyr.emplace_back(downsample2(pa), downsample2(pb));
    }

    Grid u(pyr.back().first.width(), pyr.back().first.height());
    Grid v = u;
    for (auto level = pyr.size(); level-- > 0;) {
        const auto& [i0, i1] = pyr[level];
        if (!u.same_shape(i0)) {
            u = upsample_flow(u, i0.width(), i0.height(), 2.0);
            v = upsample_flow(v, i0.width(), i0.height(), 2.0);
        }
        refine(i0, i1, u, v);
    }
    return FlowField{std::move(u), std::move(v), 0};
}

FlowField optical_flow(const RgbFrame& prev, const RgbFrame& next, const FlowEstimator& estimator) {
    if (prev.width() != next.width() || prev.height() != next.height()) throw DataError("frame size mismatch");
    FlowField f = estimator.estimate(intensity_map(prev).grid, intensity_map(next).grid);
    f.t = prev.t;
    return f;
}

FeatureMap motion_magnitude(const FlowField& flow) {
    Grid m(flow.u.width(), flow.u.height());
    auto u = flow.u.values();
    auto v = flow.v.values();
    auto o = m.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::sqrt(u[i] * u[i] + v[i] * v[i]);
    return FeatureMap{std::move(m), 1, flow.t, {Channel::Motion}};
}

}  // namespace avsm
