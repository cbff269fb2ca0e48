#include "avsm/proto_object.hpp"

#include "avsm/error.hpp"
#include "avsm/filters.hpp"

#include <cmath>
#include <limits>

namespace avsm {

namespace {

std::size_t orientation_index(double theta) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kOrientations.size(); ++i) {
        double d = std::abs(std::remainder(theta - kOrientations[i], std::numbers::pi));
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

bool is_strict_local_max(const Grid& g, int x, int y) {
    const double v = g(x, y);
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= g.width() || ny >= g.height()) continue;
            if (g(nx, ny) >= v) return false;
        }
    }
    return true;
}

void check_same_geometry(const Pyramid& a, const Pyramid& b) {
    if (a.depth() != b.depth()) throw DataError("pyramid geometry mismatch");
    for (int k = 1; k <= a.depth(); ++k)
        if (!a.level(k).same_shape(b.level(k))) throw DataError("pyramid geometry mismatch");
}

// Sum over j >= k of level j resampled to level k.
Pyramid merge_coarser(const Pyramid& p) {
    return map_levels(p, [&](int k) {
        const Grid& base = p.level(k);
        Grid acc = base;
        for (int j = k + 1; j <= p.depth(); ++j) acc += resize_bilinear(p.level(j), base.width(), base.height());
        return acc;
    });
}

}  // namespace

double itti_multiplier(const Grid& scaled, const IttiParams& params) {
    const double m_range = params.range;
    const double floor = params.peak_fraction * m_range;
    auto [gx, gy] = scaled.argmax();
    double sum = 0.0;
    int count = 0;
    bool excluded_global = false;
    for (int y = 0; y < scaled.height(); ++y) {
        for (int x = 0; x < scaled.width(); ++x) {
            double v = scaled(x, y);
            if (v <= floor || !is_strict_local_max(scaled, x, y)) continue;
            if (!excluded_global && x == gx && y == gy) {
                excluded_global = true;
                continue;
            }
            sum += v;
            ++count;
        }
    }
    double mean = count > 0 ? sum / count : 0.0;
    return (m_range - mean) * (m_range - mean);
}

Grid normalize_itti(const Grid& map, const IttiParams& params) {
    Grid out(map.width(), map.height());
    const double hi = map.max();
    if (!(hi > kNumericFloor)) return out;
    out = map * (params.range / hi);
    out *= itti_multiplier(out, params);
    return out;
}

std::array<double, 2> bo_direction(double theta, BoSide side) {
    double s = side == BoSide::Left ? 1.0 : -1.0;
    return {-s * std::sin(theta), s * std::cos(theta)};
}

ProtoObjectModel::ProtoObjectModel(ProtoObjectParams params) : params_(params), gabor_(params.gabor) {
    if (params_.dog_sigma_center <= 0 || params_.dog_sigma_surround <= params_.dog_sigma_center)
        throw ConfigError("DoG requires 0 < sigma_center < sigma_surround");
    if (params_.annulus_radius <= 0 || params_.annulus_thickness <= 0) throw ConfigError("invalid annulus");
    const double r_in = params_.annulus_radius - params_.annulus_thickness / 2;
    const double r_out = params_.annulus_radius + params_.annulus_thickness / 2;
    const int reach = static_cast<int>(std::ceil(r_out));
    for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
            double d = std::hypot(dx, dy);
            if (d >= r_in && d <= r_out && d > 0) annulus_.push_back({dx, dy});
        }
    }
}

CSPyramids ProtoObjectModel::center_surround(const Pyramid& pyr, const ChannelTag& tag) const {
    CSPyramids cs{{{}, pyr.factor, pyr.tag, pyr.t}, {{}, pyr.factor, pyr.tag, pyr.t}};
    const bool oriented = tag.kind == Channel::Orientation;
    const std::size_t theta_idx = oriented ? orientation_index(tag.theta) : 0;
    const auto kc = gaussian_kernel(params_.dog_sigma_center);
    const auto ks = gaussian_kernel(params_.dog_sigma_surround);
    for (const Grid& level : pyr.levels) {
        Grid response;
        if (oriented) {
            response = gabor_.even_response(level, theta_idx);
        } else {
            response = convolve_separable(level, kc, kc);
            response -= convolve_separable(level, ks, ks);
        }
        cs.dark.levels.push_back(rectify(response * -1.0));
        cs.light.levels.push_back(rectify(std::move(response)));
    }
    return cs;
}

CSPyramids ProtoObjectModel::normalize(const CSPyramids& cs) const {
    auto norm = [&](const Pyramid& p) {
        return map_levels(p, [&](int k) { return normalize_itti(p.level(k), params_.itti); });
    };
    return {norm(cs.light), norm(cs.dark)};
}

std::array<Pyramid, 4> ProtoObjectModel::edge_pyramids(const Pyramid& pyr) const {
    std::array<Pyramid, 4> edges;
    for (auto& e : edges) e = Pyramid{{}, pyr.factor, pyr.tag, pyr.t};
    for (const Grid& level : pyr.levels) {
        auto en = gabor_.energies(level);
        for (std::size_t i = 0; i < 4; ++i) edges[i].levels.push_back(std::move(en[i]));
    }
    return edges;
}

BOPyramid ProtoObjectModel::border_ownership(const std::array<Pyramid, 4>& edges,
                                             const CSPyramids& normalized_cs) const {
    check_same_geometry(normalized_cs.light, normalized_cs.dark);
    for (const auto& e : edges) check_same_geometry(e, normalized_cs.light);

    // Combined side evidence: merged light plus merged dark activity.
    Pyramid light = merge_coarser(normalized_cs.light);
    Pyramid dark = merge_coarser(normalized_cs.dark);
    Pyramid evidence = map_levels(light, [&](int k) { return light.level(k) + dark.level(k); });

    const double d = params_.bo_offset;
    BOPyramid bo;
    for (std::size_t ti = 0; ti < 4; ++ti) {
        const double theta = kOrientations[ti];
        const auto nl = bo_direction(theta, BoSide::Left);
        const Pyramid& edge = edges[ti];
        BoOrientation& out = bo.orientations[ti];
        out.left = out.right = out.winner = Pyramid{{}, edge.factor, edge.tag, edge.t};

        for (int k = 1; k <= edge.depth(); ++k) {
            const Grid& e = edge.level(k);
            const Grid& ev = evidence.level(k);
            const int w = e.width(), h = e.height();
            Grid left(w, h), right(w, h), win(w, h);
            std::vector<BoSide> side(static_cast<std::size_t>(w) * h, BoSide::Left);
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const double edge_v = e(x, y);
                    // light BO (1 + L) plus dark BO (1 + D) share the edge factor
                    double bl = edge_v * (2.0 + sample_bilinear(ev, x + d * nl[0], y + d * nl[1]));
                    double br = edge_v * (2.0 + sample_bilinear(ev, x - d * nl[0], y - d * nl[1]));
                    left(x, y) = bl;
                    right(x, y) = br;
                    BoSide s;
                    if (std::abs(bl - br) > 1e-12 * (std::abs(bl) + std::abs(br))) {
                        s = bl > br ? BoSide::Left : BoSide::Right;
                    } else {
                        // Tie: compare evidence integrated over each half annulus.
                        double al = 0.0, ar = 0.0;
                        for (const auto& tap : annulus_) {
                            double proj = tap.dx * nl[0] + tap.dy * nl[1];
                            double v = ev.clamped(x + tap.dx, y + tap.dy);
                            if (proj > 0) al += v;
                            else if (proj < 0) ar += v;
                        }
                        s = ar > al ? BoSide::Right : BoSide::Left;
                    }
                    side[static_cast<std::size_t>(y) * w + x] = s;
                    win(x, y) = s == BoSide::Left ? bl : br;
                }
            }
            out.left.levels.push_back(std::move(left));
            out.right.levels.push_back(std::move(right));
            out.winner.levels.push_back(std::move(win));
            out.winner_side.push_back(std::move(side));
        }
    }
    return bo;
}

GroupingPyramid ProtoObjectModel::grouping(const BOPyramid& bo) const {
    const Pyramid& geom = bo.orientations[0].winner;
    GroupingPyramid g{{}, geom.factor, geom.tag, geom.t};
    const double weight = annulus_.empty() ? 0.0 : 1.0 / static_cast<double>(annulus_.size());

    for (int k = 1; k <= geom.depth(); ++k) {
        const int w = geom.level(k).width();
        const int h = geom.level(k).height();
        Grid acc(w, h);
        for (std::size_t ti = 0; ti < 4; ++ti) {
            const auto& ori = bo.orientations[ti];
            const Grid& win = ori.winner.level(k);
            const auto& sides = ori.winner_side[static_cast<std::size_t>(k - 1)];
            for (BoSide s : {BoSide::Left, BoSide::Right}) {
                // Activity owned by side s only.
                Grid owned(w, h);
                for (std::size_t i = 0; i < sides.size(); ++i)
                    if (sides[i] == s) owned.values()[i] = win.values()[i];
                const auto n = bo_direction(kOrientations[ti], s);
                for (const auto& tap : annulus_) {
                    // Cell at x collects BO at p = x + o whose direction points back toward x.
                    double len = std::hypot(tap.dx, tap.dy);
                    double c = -(n[0] * tap.dx + n[1] * tap.dy) / len;
                    if (c <= 0) continue;
                    const double coef = weight * c;
                    const int x0 = std::max(0, -tap.dx), x1 = std::min(w, w - tap.dx);
                    const int y0 = std::max(0, -tap.dy), y1 = std::min(h, h - tap.dy);
                    for (int y = y0; y < y1; ++y) {
                        const double* src = owned.row(y + tap.dy) + tap.dx;
                        double* dst = acc.row(y);
                        for (int x = x0; x < x1; ++x) dst[x] += coef * src[x];
                    }
                }
            }
        }
        g.levels.push_back(std::move(acc));
    }
    return g;
}

GroupingPyramid ProtoObjectModel::group_channel(const FeatureMap& feature) const {
    Pyramid pyr = build_pyramid(feature, params_.factor);
    CSPyramids cs = normalize(center_surround(pyr, feature.tag));
    auto edges = edge_pyramids(pyr);
    return grouping(border_ownership(edges, cs));
}

std::array<double, 2> refined_peak(const Grid& map, int base_width, int base_height) {
    auto [x, y] = map.argmax();
    auto refine = [](double fm, double f0, double fp) {
        double denom = fm - 2 * f0 + fp;
        if (denom >= 0) return 0.0;
        return std::clamp(0.5 * (fm - fp) / denom, -0.5, 0.5);
    };
    double fx = x, fy = y;
    if (x > 0 && x + 1 < map.width()) fx += refine(map(x - 1, y), map(x, y), map(x + 1, y));
    if (y > 0 && y + 1 < map.height()) fy += refine(map(x, y - 1), map(x, y), map(x, y + 1));
    return {rescale_coordinate(fx, map.width(), base_width), rescale_coordinate(fy, map.height(), base_height)};
}

}  // namespace avsm
