#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace avsm {

/// Dense row-major 2D array of doubles. Row 0 is the top of the image.
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, double fill = 0.0)
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(checked(width) * checked(height)), fill) {}

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(int x, int y) { return data_[index(x, y)]; }
    double operator()(int x, int y) const { return data_[index(x, y)]; }

    /// Replicate-edge access.
    double clamped(int x, int y) const {
        x = std::clamp(x, 0, width_ - 1);
        y = std::clamp(y, 0, height_ - 1);
        return data_[index(x, y)];
    }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    double* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_; }
    const double* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_; }

    bool same_shape(const Grid& o) const { return width_ == o.width_ && height_ == o.height_; }

    double min() const;
    double max() const;
    double sum() const;
    double mean() const { return data_.empty() ? 0.0 : sum() / static_cast<double>(data_.size()); }
    /// Location of the first maximum in row-major order.
    std::pair<int, int> argmax() const;
    bool all_finite() const;

    Grid& operator+=(const Grid& o);
    Grid& operator-=(const Grid& o);
    Grid& operator*=(double s);
    Grid& add_scaled(const Grid& o, double s);

    friend Grid operator+(Grid a, const Grid& b) { return a += b; }
    friend Grid operator-(Grid a, const Grid& b) { return a -= b; }
    friend Grid operator*(Grid a, double s) { return a *= s; }
    friend Grid operator*(double s, Grid a) { return a *= s; }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
    }

private:
    static int checked(int n) {
        if (n < 0) throw std::invalid_argument("negative grid dimension");
        return n;
    }
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// Pointwise product.
Grid hadamard(const Grid& a, const Grid& b);
/// max(0, x) pointwise.
Grid rectify(Grid g);
/// Mirror left-right.
Grid mirror_x(const Grid& g);
/// Rotate 90 degrees clockwise (output width = input height).
Grid rotate90(const Grid& g);
/// Relative L2 difference ||a-b|| / max(||a||, ||b||); 0 when both are zero.
double relative_l2(const Grid& a, const Grid& b);

}  // namespace avsm
