#pragma once

#include "avsm/grid.hpp"

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace avsm {

// All convolutions in this library use replicate-edge padding.

/// FFTW plan creation and destruction must hold this lock.
std::mutex& fftw_planner_mutex();

/// Normalized sampled Gaussian with radius ceil(3 sigma) unless given.
std::vector<double> gaussian_kernel(double sigma, int radius = -1);

/// Separable convolution; both kernels must have odd length and are centered.
Grid convolve_separable(const Grid& g, std::span<const double> kx, std::span<const double> ky);

Grid gaussian_blur(const Grid& g, double sigma);

/// 5-tap binomial low-pass [1 4 6 4 1]/16 in both directions.
Grid binomial_blur(const Grid& g);

/// Continuous coordinate conversion between grids of `from` and `to` samples
/// along one axis, with pixel centers aligned: x_to = (x_from + 0.5) * to / from - 0.5.
inline double rescale_coordinate(double x, int from, int to) {
    return (x + 0.5) * static_cast<double>(to) / static_cast<double>(from) - 0.5;
}

/// Bilinear sample at continuous coordinates with replicate clamping.
double sample_bilinear(const Grid& g, double x, double y);

/// Bilinear sample where everything outside the grid reads as zero.
double sample_bilinear_zero(const Grid& g, double x, double y);

/// Bilinear resize with pixel-center alignment (no prefilter).
Grid resize_bilinear(const Grid& g, int width, int height);

/// A square complex kernel of side 2*radius+1, row-major, centered.
struct ComplexKernel {
    int radius = 0;
    std::vector<std::complex<double>> taps;

    int side() const { return 2 * radius + 1; }
    std::complex<double> at(int dx, int dy) const {
        return taps[static_cast<std::size_t>((dy + radius) * side() + (dx + radius))];
    }
};

/// Real and imaginary parts of a complex filter response.
struct ComplexResponse {
    Grid re;
    Grid im;
};

/// Convolves real images with a fixed set of complex kernels through the
/// FFT. One forward transform per image is shared by all kernels. Kernel
/// spectra and FFTW plans are cached per padded size; the cache is
/// internally locked so a bank can be shared between threads.
class SpectralFilterBank {
public:
    explicit SpectralFilterBank(std::vector<ComplexKernel> kernels);
    ~SpectralFilterBank();
    SpectralFilterBank(const SpectralFilterBank&) = delete;
    SpectralFilterBank& operator=(const SpectralFilterBank&) = delete;

    std::size_t kernel_count() const { return kernels_.size(); }
    const ComplexKernel& kernel(std::size_t i) const { return kernels_[i]; }
    int max_radius() const { return max_radius_; }

    /// Responses for all kernels (or only `which`, when non-empty).
    std::vector<ComplexResponse> apply(const Grid& image, std::span<const std::size_t> which = {}) const;

private:
    struct Plan;
    Plan& plan_for(int width, int height) const;

    std::vector<ComplexKernel> kernels_;
    int max_radius_ = 0;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<int, int>, std::unique_ptr<Plan>> plans_;
};

/// Direct (spatial-domain) complex convolution; the reference path for tests
/// and small images.
ComplexResponse convolve_direct(const Grid& image, const ComplexKernel& kernel);

}  // namespace avsm
