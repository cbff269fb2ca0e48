#include "avsm/saliency_fusion.hpp"

#include "avsm/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace avsm {

namespace {

void check_same_shape(const Grid& a, const Grid& b) {
    if (!a.same_shape(b)) throw DataError("saliency map dimension mismatch");
}

void check_weight(double w) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("fusion weights must be finite and non-negative");
}

}  // namespace

Grid conspicuity_map(const std::vector<const GroupingPyramid*>& subchannels, const IttiParams& itti, int common_k) {
    if (subchannels.empty()) throw DataError("incomplete bundle");
    Grid acc;
    for (const GroupingPyramid* g : subchannels) {
        if (!g) throw DataError("incomplete bundle");
        Pyramid normalized = map_levels(*g, [&](int k) { return normalize_itti(g->level(k), itti); });
        Grid collapsed = across_scale_add(normalized, common_k).grid;
        if (acc.empty()) {
            acc = std::move(collapsed);
        } else {
            if (!acc.same_shape(collapsed)) throw DataError("sub-channel pyramids disagree in shape");
            acc += collapsed;
        }
    }
    return rescale01(acc);
}

ConspicuityBundle conspicuity(const ChannelGroupings& g, const IttiParams& itti, int common_k) {
    auto need = [](const std::optional<GroupingPyramid>& p) {
        if (!p) throw DataError("incomplete bundle");
        return &*p;
    };
    ConspicuityBundle b;
    b.I = conspicuity_map({need(g.intensity)}, itti, common_k);
    std::vector<const GroupingPyramid*> color, orient;
    for (const auto& p : g.color) color.push_back(need(p));
    for (const auto& p : g.orientation) orient.push_back(need(p));
    b.C = conspicuity_map(color, itti, common_k);
    b.O = conspicuity_map(orient, itti, common_k);
    b.M = conspicuity_map({need(g.motion)}, itti, common_k);
    b.A = conspicuity_map({need(g.audio)}, itti, common_k);
    for (const Grid* m : {&b.C, &b.O, &b.M, &b.A})
        if (!m->same_shape(b.I)) throw DataError("conspicuity maps disagree in shape");
    b.t = g.intensity->t;
    return b;
}

std::string to_string(MapKind kind) {
    switch (kind) {
        case MapKind::VSM: return "vsm";
        case MapKind::ASM: return "asm";
        case MapKind::AVSM1: return "avsm1";
        case MapKind::AVSM2: return "avsm2";
        case MapKind::AVSM3: return "avsm3";
    }
    return "?";
}

MapKind parse_map_kind(const std::string& name) {
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    for (MapKind k : {MapKind::VSM, MapKind::ASM, MapKind::AVSM1, MapKind::AVSM2, MapKind::AVSM3})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown map kind '" + name + "'");
}

SaliencyMap vsm(const ConspicuityBundle& b, const VisualWeights& w) {
    for (double v : {w.intensity, w.color, w.orientation, w.motion}) check_weight(v);
    Grid out = rescale01(b.I) * w.intensity;
    out.add_scaled(rescale01(b.C), w.color);
    out.add_scaled(rescale01(b.O), w.orientation);
    out.add_scaled(rescale01(b.M), w.motion);
    return {std::move(out), MapKind::VSM, b.t};
}

SaliencyMap auditory_saliency(const ConspicuityBundle& b) { return {rescale01(b.A), MapKind::ASM, b.t}; }

SaliencyMap avsm1(const ConspicuityBundle& b, const AudioVisualWeights& w) {
    const double sum = w.intensity + w.color + w.orientation + w.motion + w.audio;
    for (double v : {w.intensity, w.color, w.orientation, w.motion, w.audio}) check_weight(v);
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("audiovisual weights must sum to 1");
    Grid out = rescale01(b.I) * w.intensity;
    out.add_scaled(rescale01(b.C), w.color);
    out.add_scaled(rescale01(b.O), w.orientation);
    out.add_scaled(rescale01(b.M), w.motion);
    out.add_scaled(rescale01(b.A), w.audio);
    return {std::move(out), MapKind::AVSM1, b.t};
}

SaliencyMap avsm2(const SaliencyMap& visual, const SaliencyMap& auditory) {
    check_same_shape(visual.grid, auditory.grid);
    Grid out = rescale01(visual.grid);
    out += rescale01(auditory.grid);
    out *= 0.5;
    return {std::move(out), MapKind::AVSM2, visual.t};
}

Grid avsm3_raw(const SaliencyMap& visual, const SaliencyMap& auditory) {
    check_same_shape(visual.grid, auditory.grid);
    Grid v = rescale01(visual.grid);
    Grid a = rescale01(auditory.grid);
    Grid out = hadamard(v, a);
    out += v;
    out += a;
    return out;
}

SaliencyMap avsm3(const SaliencyMap& visual, const SaliencyMap& auditory) {
    return {rescale01(avsm3_raw(visual, auditory)), MapKind::AVSM3, visual.t};
}

std::vector<SalientEvent> extract_events(const SaliencyMap& map, double threshold, int connectivity) {
    if (connectivity != 4 && connectivity != 8) throw ConfigError("connectivity must be 4 or 8");
    const Grid& g = map.grid;
    const int w = g.width(), h = g.height();
    std::vector<char> seen(g.values().size(), 0);
    std::vector<SalientEvent> events;
    std::vector<std::pair<int, int>> stack;
    for (int y0 = 0; y0 < h; ++y0) {
        for (int x0 = 0; x0 < w; ++x0) {
            auto idx0 = static_cast<std::size_t>(y0) * w + x0;
            if (seen[idx0] || !(g(x0, y0) > threshold)) continue;
            SalientEvent ev;
            ev.t = map.t;
            ev.kind = map.kind;
            double sx = 0, sy = 0;
            seen[idx0] = 1;
            stack.assign(1, {x0, y0});
            while (!stack.empty()) {
                auto [x, y] = stack.back();
                stack.pop_back();
                ++ev.area;
                sx += x;
                sy += y;
                ev.peak = std::max(ev.peak, g(x, y));
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if ((dx == 0 && dy == 0) || (connectivity == 4 && dx != 0 && dy != 0)) continue;
                        int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        auto idx = static_cast<std::size_t>(ny) * w + nx;
                        if (seen[idx] || !(g(nx, ny) > threshold)) continue;
                        seen[idx] = 1;
                        stack.push_back({nx, ny});
                    }
                }
            }
            ev.cx = sx / ev.area;
            ev.cy = sy / ev.area;
            events.push_back(ev);
        }
    }
    return events;
}

}  // namespace avsm
