#include "avsm/filters.hpp"

#include <fftw3.h>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace avsm {

namespace {

int good_fft_size(int n) {
    for (int m = n;; ++m) {
        int r = m;
        for (int p : {2, 3, 5, 7})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : ptr(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))), size(n) {
        if (!ptr) throw std::bad_alloc();
    }
    ~FftwBuffer() {
        if (ptr) fftw_free(ptr);
    }
    FftwBuffer(FftwBuffer&& o) noexcept : ptr(std::exchange(o.ptr, nullptr)), size(o.size) {}
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    FftwBuffer& operator=(FftwBuffer&&) = delete;

    fftw_complex* ptr;
    std::size_t size;
};

}  // namespace

// FFTW's planner is not re-entrant.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<double> gaussian_kernel(double sigma, int radius) {
    if (sigma <= 0.0) throw std::invalid_argument("gaussian sigma must be positive");
    if (radius < 0) radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-0.5 * i * i / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (auto& v : k) v /= sum;
    return k;
}

Grid convolve_separable(const Grid& g, std::span<const double> kx, std::span<const double> ky) {
    if (kx.size() % 2 == 0 || ky.size() % 2 == 0) throw std::invalid_argument("kernel length must be odd");
    const int w = g.width();
    const int h = g.height();
    const int rx = static_cast<int>(kx.size() / 2);
    const int ry = static_cast<int>(ky.size() / 2);

    Grid tmp(w, h);
    std::vector<double> line(static_cast<std::size_t>(w + 2 * rx));
    for (int y = 0; y < h; ++y) {
        const double* src = g.row(y);
        for (int i = 0; i < w + 2 * rx; ++i) line[static_cast<std::size_t>(i)] = src[std::clamp(i - rx, 0, w - 1)];
        double* dst = tmp.row(y);
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::size_t j = 0; j < kx.size(); ++j) acc += kx[j] * line[static_cast<std::size_t>(x) + kx.size() - 1 - j];
            dst[x] = acc;
        }
    }

    Grid out(w, h);
    for (int y = 0; y < h; ++y) {
        double* dst = out.row(y);
        for (std::size_t j = 0; j < ky.size(); ++j) {
            int sy = std::clamp(y + ry - static_cast<int>(j), 0, h - 1);
            const double* src = tmp.row(sy);
            const double kv = ky[j];
            for (int x = 0; x < w; ++x) dst[x] += kv * src[x];
        }
    }
    return out;
}

Grid gaussian_blur(const Grid& g, double sigma) {
    auto k = gaussian_kernel(sigma);
    return convolve_separable(g, k, k);
}

Grid binomial_blur(const Grid& g) {
    static constexpr double k[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
    return convolve_separable(g, k, k);
}

double sample_bilinear(const Grid& g, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(g.width() - 1));
    y = std::clamp(y, 0.0, static_cast<double>(g.height() - 1));
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    int x1 = std::min(x0 + 1, g.width() - 1);
    int y1 = std::min(y0 + 1, g.height() - 1);
    double fx = x - x0;
    double fy = y - y0;
    double top = g(x0, y0) * (1.0 - fx) + g(x1, y0) * fx;
    double bot = g(x0, y1) * (1.0 - fx) + g(x1, y1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

double sample_bilinear_zero(const Grid& g, double x, double y) {
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    double fx = x - x0;
    double fy = y - y0;
    auto at = [&](int xi, int yi) {
        if (xi < 0 || yi < 0 || xi >= g.width() || yi >= g.height()) return 0.0;
        return g(xi, yi);
    };
    double top = at(x0, y0) * (1.0 - fx) + at(x0 + 1, y0) * fx;
    double bot = at(x0, y0 + 1) * (1.0 - fx) + at(x0 + 1, y0 + 1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

Grid resize_bilinear(const Grid& g, int width, int height) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("resize to empty grid");
    if (width == g.width() && height == g.height()) return g;
    Grid out(width, height);
    for (int y = 0; y < height; ++y) {
        double sy = rescale_coordinate(y, height, g.height());
        for (int x = 0; x < width; ++x) {
            double sx = rescale_coordinate(x, width, g.width());
            out(x, y) = sample_bilinear(g, sx, sy);
        }
    }
    return out;
}

struct SpectralFilterBank::Plan {
    Plan(int pw, int ph, const std::vector<ComplexKernel>& kernels)
        : width(pw), height(ph), work(static_cast<std::size_t>(pw) * ph), spectrum(work.size) {
        {
            std::lock_guard lock(fftw_planner_mutex());
            forward = fftw_plan_dft_2d(ph, pw, work.ptr, spectrum.ptr, FFTW_FORWARD, FFTW_ESTIMATE);
            backward = fftw_plan_dft_2d(ph, pw, work.ptr, work.ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
        }
        for (const auto& k : kernels) {
            auto& spec = kernel_spectra.emplace_back(work.size);
            for (std::size_t i = 0; i < work.size; ++i) work.ptr[i][0] = work.ptr[i][1] = 0.0;
            for (int dy = -k.radius; dy <= k.radius; ++dy) {
                for (int dx = -k.radius; dx <= k.radius; ++dx) {
                    int px = (dx + pw) % pw;
                    int py = (dy + ph) % ph;
                    auto v = k.at(dx, dy);
                    auto idx = static_cast<std::size_t>(py) * pw + px;
                    work.ptr[idx][0] = v.real();
                    work.ptr[idx][1] = v.imag();
                }
            }
            fftw_execute_dft(forward, work.ptr, spec.ptr);
        }
    }
    ~Plan() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
    }

    int width;
    int height;
    FftwBuffer work;
    FftwBuffer spectrum;
    std::vector<FftwBuffer> kernel_spectra;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

SpectralFilterBank::SpectralFilterBank(std::vector<ComplexKernel> kernels) : kernels_(std::move(kernels)) {
    for (const auto& k : kernels_) {
        if (k.taps.size() != static_cast<std::size_t>(k.side() * k.side()))
            throw std::invalid_argument("kernel tap count does not match radius");
        max_radius_ = std::max(max_radius_, k.radius);
    }
}

SpectralFilterBank::~SpectralFilterBank() = default;

SpectralFilterBank::Plan& SpectralFilterBank::plan_for(int width, int height) const {
    int pw = good_fft_size(width + 2 * max_radius_);
    int ph = good_fft_size(height + 2 * max_radius_);
    auto key = std::make_pair(pw, ph);
    auto it = plans_.find(key);
    if (it == plans_.end()) it = plans_.emplace(key, std::make_unique<Plan>(pw, ph, kernels_)).first;
    return *it->second;
}

std::vector<ComplexResponse> SpectralFilterBank::apply(const Grid& image, std::span<const std::size_t> which) const {
    std::vector<std::size_t> selected(which.begin(), which.end());
    if (selected.empty())
        for (std::size_t i = 0; i < kernels_.size(); ++i) selected.push_back(i);

    std::lock_guard lock(mutex_);
    Plan& plan = plan_for(image.width(), image.height());
    const int pw = plan.width;
    const int ph = plan.height;
    const int r = max_radius_;
    const int w = image.width();
    const int h = image.height();

    for (int py = 0; py < ph; ++py) {
        int sy = std::clamp(py - r, 0, h - 1);
        for (int px = 0; px < pw; ++px) {
            int sx = std::clamp(px - r, 0, w - 1);
            auto idx = static_cast<std::size_t>(py) * pw + px;
            plan.work.ptr[idx][0] = image(sx, sy);
            plan.work.ptr[idx][1] = 0.0;
        }
    }
    fftw_execute_dft(plan.forward, plan.work.ptr, plan.spectrum.ptr);

    const double scale = 1.0 / (static_cast<double>(pw) * ph);
    std::vector<ComplexResponse> out;
    out.reserve(selected.size());
    for (std::size_t k : selected) {
        const auto& ks = plan.kernel_spectra.at(k);
        for (std::size_t i = 0; i < plan.work.size; ++i) {
            double a = plan.spectrum.ptr[i][0], b = plan.spectrum.ptr[i][1];
            double c = ks.ptr[i][0], d = ks.ptr[i][1];
            plan.work.ptr[i][0] = a * c - b * d;
            plan.work.ptr[i][1] = a * d + b * c;
        }
        fftw_execute_dft(plan.backward, plan.work.ptr, plan.work.ptr);
        ComplexResponse resp{Grid(w, h), Grid(w, h)};
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                auto idx = static_cast<std::size_t>(y + r) * pw + (x + r);
                resp.re(x, y) = plan.work.ptr[idx][0] * scale;
                resp.im(x, y) = plan.work.ptr[idx][1] * scale;
            }
        }
        out.push_back(std::move(resp));
    }
    return out;
}

ComplexResponse convolve_direct(const Grid& image, const ComplexKernel& kernel) {
    const int w = image.width();
    const int h = image.height();
    const int r = kernel.radius;
    ComplexResponse out{Grid(w, h), Grid(w, h)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::complex<double> acc = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) acc += kernel.at(dx, dy) * image.clamped(x - dx, y - dy);
            out.re(x, y) = acc.real();
            out.im(x, y) = acc.imag();
        }
    }
    return out;
}

}  // namespace avsm
