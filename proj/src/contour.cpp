#include "avsm/contour.hpp"

#include "avsm/error.hpp"
#include "avsm/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace avsm {

namespace {

enum Edge { Top, Right, Bottom, Left };

// Segments per marching-squares case; corners a=8 (top-left), b=4, c=2, d=1.
// Saddles (5, 10) are resolved separately.
constexpr int kSegments[16][4] = {
    {-1, -1, -1, -1}, {Left, Bottom, -1, -1}, {Bottom, Right, -1, -1}, {Left, Right, -1, -1},
    {Top, Right, -1, -1}, {-1, -1, -1, -1},    {Top, Bottom, -1, -1},  {Left, Top, -1, -1},
    {Left, Top, -1, -1},  {Top, Bottom, -1, -1}, {-1, -1, -1, -1},    {Top, Right, -1, -1},
    {Left, Right, -1, -1}, {Bottom, Right, -1, -1}, {Left, Bottom, -1, -1}, {-1, -1, -1, -1},
};

}  // namespace

std::vector<Contour> isocontours(const Grid& map, double level) {
    if (map.empty()) return {};
    const int w = map.width(), h = map.height();
    const int pw = w + 2, ph = h + 2;
    const double outside = level - 1.0;
    auto P = [&](int i, int j) {
        if (i < 1 || j < 1 || i > w || j > h) return outside;
        return map(i - 1, j - 1);
    };
    // Edge keys: horizontal edge (i,j)-(i+1,j) -> 2*(j*pw+i), vertical (i,j)-(i,j+1) -> 2*(j*pw+i)+1.
    auto hkey = [&](int i, int j) { return 2L * (static_cast<long>(j) * pw + i); };
    auto vkey = [&](int i, int j) { return 2L * (static_cast<long>(j) * pw + i) + 1; };

    std::unordered_map<long, std::vector<long>> links;
    auto connect = [&](long a, long b) {
        links[a].push_back(b);
        links[b].push_back(a);
    };

    for (int j = 0; j + 1 < ph; ++j) {
        for (int i = 0; i + 1 < pw; ++i) {
            const double a = P(i, j), b = P(i + 1, j), c = P(i + 1, j + 1), d = P(i, j + 1);
            int code = (a > level ? 8 : 0) | (b > level ? 4 : 0) | (c > level ? 2 : 0) | (d > level ? 1 : 0);
            const long edge[4] = {hkey(i, j), vkey(i + 1, j), hkey(i, j + 1), vkey(i, j)};
            if (code == 5 || code == 10) {
                bool center_above = (a + b + c + d) / 4 > level;
                // The above-level corners join through the center when it is above.
                bool cut_a_c = (code == 5) == center_above;
                if (cut_a_c) {
                    connect(edge[Left], edge[Top]);
                    connect(edge[Bottom], edge[Right]);
                } else {
                    connect(edge[Top], edge[Right]);
                    connect(edge[Left], edge[Bottom]);
                }
                continue;
            }
            const int* seg = kSegments[code];
            if (seg[0] >= 0) connect(edge[seg[0]], edge[seg[1]]);
        }
    }

    auto position = [&](long key) -> std::array<double, 2> {
        long cell = key / 2;
        int i = static_cast<int>(cell % pw), j = static_cast<int>(cell / pw);
        double x, y;
        if (key % 2 == 0) {
            double v0 = P(i, j), v1 = P(i + 1, j);
            x = i + (level - v0) / (v1 - v0);
            y = j;
        } else {
            double v0 = P(i, j), v1 = P(i, j + 1);
            x = i;
            y = j + (level - v0) / (v1 - v0);
        }
        return {std::clamp(x - 1.0, 0.0, w - 1.0), std::clamp(y - 1.0, 0.0, h - 1.0)};
    };

    // Deterministic traversal order: ascending edge key.
    std::vector<long> keys;
    keys.reserve(links.size());
    for (const auto& kv : links) keys.push_back(kv.first);
    std::sort(keys.begin(), keys.end());

    std::unordered_map<long, bool> used;
    std::vector<Contour> out;
    for (long start : keys) {
        if (used[start]) continue;
        Contour c;
        long prev = -1, cur = start;
        while (!used[cur]) {
            used[cur] = true;
            c.points.push_back(position(cur));
            const auto& nb = links[cur];
            long next = -1;
            for (long n : nb)
                if (n != prev && !used[n]) {
                    next = n;
                    break;
                }
            if (next < 0) break;
            prev = cur;
            cur = next;
        }
        if (c.points.size() >= 2) out.push_back(std::move(c));
    }
    return out;
}

RgbFrame overlay_isocontours(const RgbFrame& frame, const Grid& map, double level, std::array<double, 3> color) {
    if (!frame.valid()) throw DataError("invalid frame for overlay");
    Grid m = map.same_shape(frame.r) ? map : resize_bilinear(map, frame.width(), frame.height());
    RgbFrame out = frame;
    // Of the four pixels around a contour sample, paint the one whose value is
    // closest to the level.
    auto plot = [&](double x, double y) {
        int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
        int bx = -1, by = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int yi : {y0, y0 + 1}) {
            for (int xi : {x0, x0 + 1}) {
                if (xi < 0 || yi < 0 || xi >= out.width() || yi >= out.height()) continue;
                double d = std::abs(m(xi, yi) - level);
                if (d < best) {
                    best = d;
                    bx = xi;
                    by = yi;
                }
            }
        }
        if (bx < 0) return;
        out.r(bx, by) = color[0];
        out.g(bx, by) = color[1];
        out.b(bx, by) = color[2];
    };
    for (const Contour& c : isocontours(m, level)) {
        const std::size_t n = c.points.size();
        for (std::size_t k = 0; k < n; ++k) {
            auto p = c.points[k];
            auto q = c.points[(k + 1) % n];
            double len = std::hypot(q[0] - p[0], q[1] - p[1]);
            int steps = std::max(1, static_cast<int>(std::ceil(len * 2)));
            for (int s = 0; s <= steps; ++s) {
                double f = static_cast<double>(s) / steps;
                plot(p[0] + f * (q[0] - p[0]), p[1] + f * (q[1] - p[1]));
            }
        }
    }
    return out;
}

}  // namespace avsm
