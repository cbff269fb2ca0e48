#include "avsm/grid.hpp"

#include <cmath>
#include <numeric>

namespace avsm {

double Grid::min() const {
    if (data_.empty()) return 0.0;
    return *std::min_element(data_.begin(), data_.end());
}

double Grid::max() const {
    if (data_.empty()) return 0.0;
    return *std::max_element(data_.begin(), data_.end());
}

double Grid::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

std::pair<int, int> Grid::argmax() const {
    if (data_.empty()) return {0, 0};
    auto it = std::max_element(data_.begin(), data_.end());
    auto i = static_cast<int>(it - data_.begin());
    return {i % width_, i / width_};
}

bool Grid::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Grid& Grid::operator+=(const Grid& o) {
    if (!same_shape(o)) throw std::invalid_argument("grid shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

Grid& Grid::operator-=(const Grid& o) {
    if (!same_shape(o)) throw std::invalid_argument("grid shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

Grid& Grid::operator*=(double s) {
    for (auto& v : data_) v *= s;
    return *this;
}

Grid& Grid::add_scaled(const Grid& o, double s) {
    if (!same_shape(o)) throw std::invalid_argument("grid shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
    return *this;
}

Grid hadamard(const Grid& a, const Grid& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("grid shape mismatch");
    Grid out(a.width(), a.height());
    auto av = a.values();
    auto bv = b.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
    return out;
}

Grid rectify(Grid g) {
    for (auto& v : g.values()) v = std::max(0.0, v);
    return g;
}

Grid mirror_x(const Grid& g) {
    Grid out(g.width(), g.height());
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) out(g.width() - 1 - x, y) = g(x, y);
    return out;
}

Grid rotate90(const Grid& g) {
    // (x, y) -> (H-1-y, x)
    Grid out(g.height(), g.width());
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) out(g.height() - 1 - y, x) = g(x, y);
    return out;
}

double relative_l2(const Grid& a, const Grid& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("grid shape mismatch");
    double d = 0.0, na = 0.0, nb = 0.0;
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) {
        d += (av[i] - bv[i]) * (av[i] - bv[i]);
        na += av[i] * av[i];
        nb += bv[i] * bv[i];
    }
    double denom = std::sqrt(std::max(na, nb));
    return denom == 0.0 ? 0.0 : std::sqrt(d) / denom;
}

}  // namespace avsm
