#include "avsm/vision_features.hpp"

#include <cmath>

namespace avsm {

bool RgbFrame::valid() const {
    if (r.empty() || !r.same_shape(g) || !r.same_shape(b)) return false;
    for (const Grid* p : {&r, &g, &b})
        for (double v : p->values())
            if (!(v >= 0.0 && v <= 1.0)) return false;
    return true;
}

RgbFrame RgbFrame::filled(int width, int height, double red, double green, double blue, int t) {
    return RgbFrame{Grid(width, height, red), Grid(width, height, green), Grid(width, height, blue), t};
}

ComplexKernel make_gabor_kernel(double theta, const GaborParams& p) {
    const double phi = theta + std::numbers::pi / 2;  // carrier runs across the edge
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const int radius = static_cast<int>(std::ceil(3.0 * p.sigma / p.aspect));
    const int side = 2 * radius + 1;

    std::vector<double> env(static_cast<std::size_t>(side * side));
    std::vector<double> carrier_cos(env.size());
    std::vector<double> carrier_sin(env.size());
    double env_sum = 0.0;
    double even_sum = 0.0;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            auto i = static_cast<std::size_t>((dy + radius) * side + (dx + radius));
            double across = dx * c + dy * s;
            double along = -dx * s + dy * c;
            double e = std::exp(-(across * across + p.aspect * p.aspect * along * along) / (2 * p.sigma * p.sigma));
            double arg = 2 * std::numbers::pi * across / p.wavelength;
            env[i] = e;
            carrier_cos[i] = std::cos(arg);
            carrier_sin[i] = std::sin(arg);
            env_sum += e;
            even_sum += e * carrier_cos[i];
        }
    }
    const double dc = even_sum / env_sum;
    const double norm = 2.0 / env_sum;

    ComplexKernel k;
    k.radius = radius;
    k.taps.resize(env.size());
    for (std::size_t i = 0; i < env.size(); ++i)
        k.taps[i] = {norm * env[i] * (carrier_cos[i] - dc), norm * env[i] * carrier_sin[i]};
    return k;
}

namespace {
std::vector<ComplexKernel> gabor_kernels(const GaborParams& p) {
    std::vector<ComplexKernel> ks;
    for (double th : kOrientations) ks.push_back(make_gabor_kernel(th, p));
    return ks;
}
}  // namespace

GaborBank::GaborBank(const GaborParams& params) : params_(params), bank_(gabor_kernels(params)) {}

std::array<ComplexResponse, 4> GaborBank::responses(const Grid& image) const {
    auto all = bank_.apply(image);
    return {std::move(all[0]), std::move(all[1]), std::move(all[2]), std::move(all[3])};
}

Grid GaborBank::even_response(const Grid& image, std::size_t i) const {
    std::size_t which[] = {i};
    return std::move(bank_.apply(image, which)[0].re);
}

std::array<Grid, 4> GaborBank::energies(const Grid& image) const {
    auto resp = responses(image);
    std::array<Grid, 4> out;
    for (std::size_t k = 0; k < 4; ++k) {
        Grid e(image.width(), image.height());
        auto re = resp[k].re.values();
        auto im = resp[k].im.values();
        auto ev = e.values();
        for (std::size_t i = 0; i < ev.size(); ++i) ev[i] = std::hypot(re[i], im[i]);
        out[k] = std::move(e);
    }
    return out;
}

FeatureMap intensity_map(const RgbFrame& frame) {
    Grid out(frame.width(), frame.height());
    auto r = frame.r.values();
    auto g = frame.g.values();
    auto b = frame.b.values();
    auto o = out.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = (r[i] + g[i] + b[i]) / 3.0;
    return FeatureMap{std::move(out), 1, frame.t, {Channel::Intensity}};
}

std::array<FeatureMap, 4> color_opponency_maps(const RgbFrame& frame, double luminance_gate) {
    const int w = frame.width();
    const int h = frame.height();
    Grid rg(w, h), gr(w, h), by(w, h), yb(w, h);
    auto R = frame.r.values();
    auto G = frame.g.values();
    auto B = frame.b.values();
    for (std::size_t i = 0; i < R.size(); ++i) {
        if ((R[i] + G[i] + B[i]) / 3.0 < luminance_gate) continue;
        double r = R[i] - (G[i] + B[i]) / 2;
        double g = G[i] - (R[i] + B[i]) / 2;
        double b = B[i] - (R[i] + G[i]) / 2;
        double y = (R[i] + G[i]) / 2 - std::abs(R[i] - G[i]) / 2 - B[i];
        rg.values()[i] = std::max(0.0, r - g);
        gr.values()[i] = std::max(0.0, g - r);
        by.values()[i] = std::max(0.0, b - y);
        yb.values()[i] = std::max(0.0, y - b);
    }
    return {FeatureMap{std::move(rg), 1, frame.t, {Channel::RG}}, FeatureMap{std::move(gr), 1, frame.t, {Channel::GR}},
            FeatureMap{std::move(by), 1, frame.t, {Channel::BY}}, FeatureMap{std::move(yb), 1, frame.t, {Channel::YB}}};
}

std::array<FeatureMap, 4> orientation_maps(const FeatureMap& intensity, const GaborBank& bank) {
    auto e = bank.energies(intensity.grid);
    std::array<FeatureMap, 4> out;
    for (std::size_t k = 0; k < 4; ++k)
        out[k] = FeatureMap{std::move(e[k]), 1, intensity.t, {Channel::Orientation, kOrientations[k]}};
    return out;
}

std::string to_string(const ChannelTag& tag) {
    switch (tag.kind) {
        case Channel::Intensity: return "intensity";
        case Channel::RG: return "RG";
        case Channel::GR: return "GR";
        case Channel::BY: return "BY";
        case Channel::YB: return "YB";
        case Channel::Motion: return "motion";
        case Channel::Audio: return "audio";
        case Channel::Orientation: {
            int deg = static_cast<int>(std::lround(tag.theta * 180.0 / std::numbers::pi));
            return "orientation(" + std::to_string(deg) + ")";
        }
    }
    return "unknown";
}

}  // namespace avsm
