#include "avsm/audio_map.hpp"

#include "avsm/error.hpp"
#include "avsm/filters.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>

namespace avsm {

namespace {

constexpr double kPi = std::numbers::pi;

double factorial_ratio(int n, int m) {
    // (n - m)! / (n + m)!
    double r = 1.0;
    for (int i = n - m + 1; i <= n + m; ++i) r /= i;
    return r;
}

double sph_bessel_j_prime(int n, double x) {
    return n / x * std::sph_bessel(n, x) - std::sph_bessel(n + 1, x);
}

double sph_bessel_y_prime(int n, double x) {
    return n / x * std::sph_neumann(n, x) - std::sph_neumann(n + 1, x);
}

}  // namespace

MicArrayGeometry MicArrayGeometry::fibonacci(int n, double radius) {
    MicArrayGeometry g;
    g.radius = radius;
    const double golden = kPi * (1.0 + std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        double f = i + 0.5;
        double el = std::acos(1.0 - 2.0 * f / n);
        double az = std::fmod(golden * f, 2 * kPi);
        g.positions.push_back({az, el});
    }
    return g;
}

MicArrayGeometry MicArrayGeometry::load(const std::filesystem::path& path, double radius) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open geometry file " + path.string());
    MicArrayGeometry g;
    g.radius = radius;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        Direction d;
        std::string extra;
        if (!(ls >> d.az >> d.el) || (ls >> extra))
            throw DataError("malformed geometry line " + std::to_string(lineno));
        g.positions.push_back(d);
    }
    g.validate();
    return g;
}

void MicArrayGeometry::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write geometry file " + path.string());
    out << std::setprecision(17);
    for (const auto& d : positions) out << d.az << ' ' << d.el << '\n';
}

void MicArrayGeometry::validate() const {
    if (positions.size() != static_cast<std::size_t>(kMicrophones))
        throw DataError("geometry must list exactly 64 microphones, got " + std::to_string(positions.size()));
    if (!(radius > 0)) throw DataError("array radius must be positive");
    for (const auto& d : positions)
        if (!std::isfinite(d.az) || !std::isfinite(d.el)) throw DataError("non-finite microphone direction");
}

int audio_frame_count(const MultichannelPcm& pcm) {
    return static_cast<int>(pcm.samples() / kAudioFrameSamples);
}

AudioFrame frame_audio(const MultichannelPcm& pcm, int t) {
    if (t < 0 || t >= audio_frame_count(pcm)) throw DataError("audio exhausted");
    AudioFrame f;
    f.sample_rate = pcm.sample_rate;
    f.t = t;
    const auto begin = static_cast<std::ptrdiff_t>(t) * kAudioFrameSamples;
    for (const auto& ch : pcm.channels) f.channels.emplace_back(ch.begin() + begin, ch.begin() + begin + kAudioFrameSamples);
    return f;
}

SteeringGrid SteeringGrid::standard() {
    SteeringGrid g;
    for (int i = 0; i < kSteeringAzimuths; ++i) g.azimuths.push_back(i * 2 * kPi / kSteeringAzimuths);
    for (int j = 0; j < kSteeringElevations; ++j) g.elevations.push_back((j + 0.5) * kPi / kSteeringElevations);
    return g;
}

std::vector<double> real_spherical_harmonics(int order, const Direction& d) {
    std::vector<double> y;
    y.reserve(static_cast<std::size_t>((order + 1) * (order + 1)));
    const double x = std::cos(d.el);
    for (int n = 0; n <= order; ++n) {
        for (int m = -n; m <= n; ++m) {
            int am = std::abs(m);
            double norm = std::sqrt((2 * n + 1) / (4 * kPi) * factorial_ratio(n, am));
            double p = std::assoc_legendre(static_cast<unsigned>(n), static_cast<unsigned>(am), x);
            double v = norm * p;
            if (m > 0) v *= std::sqrt(2.0) * std::cos(m * d.az);
            else if (m < 0) v *= std::sqrt(2.0) * std::sin(am * d.az);
            y.push_back(v);
        }
    }
    return y;
}

std::complex<double> mode_strength(int n, double kr, SphereModel model) {
    using namespace std::complex_literals;
    std::complex<double> in = std::pow(1i, n);
    double j = std::sph_bessel(static_cast<unsigned>(n), kr);
    if (model == SphereModel::Open) return 4 * kPi * in * j;
    std::complex<double> h(j, std::sph_neumann(static_cast<unsigned>(n), kr));
    std::complex<double> hp(sph_bessel_j_prime(n, kr), sph_bessel_y_prime(n, kr));
    return 4 * kPi * in * (j - sph_bessel_j_prime(n, kr) / hp * h);
}

struct ShBeamformer::State {
    MicArrayGeometry geom;
    SteeringGrid grid;
    BeamformerParams params;
    int coeffs = 0;
    Eigen::MatrixXd encoder;  // coeffs x mics pseudo-inverse
    Eigen::MatrixXd steering;  // directions x coeffs
    std::vector<int> degree;   // degree n of each coefficient
};

ShBeamformer::ShBeamformer(MicArrayGeometry geom, SteeringGrid grid, BeamformerParams params)
    : state_(std::make_unique<State>()) {
    geom.validate();
    if (params.order < 0) throw ConfigError("beamformer order must be >= 0");
    if (!(params.regularization >= 0)) throw ConfigError("regularization must be >= 0");
    if (!(params.f_lo > 0) || !(params.f_hi > params.f_lo)) throw ConfigError("invalid beamformer band");
    if (!(params.speed_of_sound > 0)) throw ConfigError("speed of sound must be positive");
    if (grid.width() < 2 || grid.height() < 1) throw ConfigError("invalid steering grid");
    const int coeffs = (params.order + 1) * (params.order + 1);
    if (coeffs > kMicrophones) throw ConfigError("beamformer order too high for 64 microphones");

    for (std::size_t a = 0; a < geom.positions.size(); ++a) {
        auto ua = geom.positions[a].unit();
        for (std::size_t b = a + 1; b < geom.positions.size(); ++b) {
            auto ub = geom.positions[b].unit();
            double dot = ua[0] * ub[0] + ua[1] * ub[1] + ua[2] * ub[2];
            if (dot > 1.0 - 1e-9) throw DataError("ill-conditioned array");
        }
    }

    Eigen::MatrixXd y(kMicrophones, coeffs);
    for (int m = 0; m < kMicrophones; ++m) {
        auto row = real_spherical_harmonics(params.order, geom.positions[static_cast<std::size_t>(m)]);
        for (int i = 0; i < coeffs; ++i) y(m, i) = row[static_cast<std::size_t>(i)];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (!(s(s.size() - 1) > 1e-6 * s(0))) throw DataError("ill-conditioned array");
    state_->encoder = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();

    const int dirs = grid.width() * grid.height();
    state_->steering.resize(dirs, coeffs);
    for (int j = 0; j < grid.height(); ++j) {
        for (int i = 0; i < grid.width(); ++i) {
            auto row = real_spherical_harmonics(params.order, {grid.azimuths[static_cast<std::size_t>(i)],
                                                               grid.elevations[static_cast<std::size_t>(j)]});
            for (int c = 0; c < coeffs; ++c) state_->steering(j * grid.width() + i, c) = row[static_cast<std::size_t>(c)];
        }
    }
    for (int n = 0; n <= params.order; ++n)
        for (int m = -n; m <= n; ++m) state_->degree.push_back(n);

    state_->coeffs = coeffs;
    state_->geom = std::move(geom);
    state_->grid = std::move(grid);
    state_->params = params;
}

ShBeamformer::~ShBeamformer() = default;
ShBeamformer::ShBeamformer(ShBeamformer&&) noexcept = default;
ShBeamformer& ShBeamformer::operator=(ShBeamformer&&) noexcept = default;

const MicArrayGeometry& ShBeamformer::geometry() const { return state_->geom; }
const SteeringGrid& ShBeamformer::grid() const { return state_->grid; }
const BeamformerParams& ShBeamformer::params() const { return state_->params; }

Grid ShBeamformer::steered_power(const AudioFrame& frame) const {
    const State& st = *state_;
    if (frame.channels.size() != static_cast<std::size_t>(kMicrophones))
        throw DataError("audio frame must have 64 channels");
    const int len = static_cast<int>(frame.channels.front().size());
    if (len < 2) throw DataError("audio frame too short");
    for (const auto& ch : frame.channels) {
        if (static_cast<int>(ch.size()) != len) throw DataError("ragged audio frame");
        for (float v : ch)
            if (!std::isfinite(v)) throw DataError("non-finite audio sample");
    }

    const int nbins = len / 2 + 1;
    double* in = fftw_alloc_real(static_cast<std::size_t>(len));
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(nbins));
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(len, in, out, FFTW_ESTIMATE);
    }

    const double bin_hz = static_cast<double>(frame.sample_rate) / len;
    const int lo = std::max(1, static_cast<int>(std::lround(st.params.f_lo / bin_hz)));
    const int hi = std::min(nbins - 1, static_cast<int>(std::lround(st.params.f_hi / bin_hz)));
    const int nb = std::max(0, hi - lo + 1);

    // Spectra of the windowed channels restricted to the band.
    Eigen::MatrixXcd x(kMicrophones, nb);
    for (int m = 0; m < kMicrophones; ++m) {
        const auto& ch = frame.channels[static_cast<std::size_t>(m)];
        for (int n = 0; n < len; ++n) {
            double w = 0.5 - 0.5 * std::cos(2 * kPi * n / (len - 1));
            in[n] = w * ch[static_cast<std::size_t>(n)];
        }
        fftw_execute_dft_r2c(plan, in, out);
        for (int b = 0; b < nb; ++b) x(m, b) = {out[lo + b][0], out[lo + b][1]};
    }
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);

    // Coefficient covariance summed over bins, after radial equalization.
    Eigen::MatrixXcd p = st.encoder * x;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(st.coeffs, st.coeffs);
    std::vector<std::complex<double>> b(static_cast<std::size_t>(st.params.order + 1));
    for (int bi = 0; bi < nb; ++bi) {
        double kr = 2 * kPi * (lo + bi) * bin_hz / st.params.speed_of_sound * st.geom.radius;
        double bmax = 0.0;
        for (int n = 0; n <= st.params.order; ++n) {
            b[static_cast<std::size_t>(n)] = mode_strength(n, kr, st.params.model);
            bmax = std::max(bmax, std::norm(b[static_cast<std::size_t>(n)]));
        }
        Eigen::VectorXcd a(st.coeffs);
        for (int c = 0; c < st.coeffs; ++c) {
            auto bn = b[static_cast<std::size_t>(st.degree[static_cast<std::size_t>(c)])];
            a(c) = p(c, bi) * std::conj(bn) / (std::norm(bn) + st.params.regularization * bmax);
        }
        cov += (a * a.adjoint()).real();
    }

    Eigen::MatrixXd proj = st.steering * cov;
    Grid power(st.grid.width(), st.grid.height());
    auto vals = power.values();
    for (Eigen::Index d = 0; d < proj.rows(); ++d)
        vals[static_cast<std::size_t>(d)] = std::max(0.0, proj.row(d).dot(st.steering.row(d)));
    return power;
}

AuditoryMap ShBeamformer::beamform(const AudioFrame& frame, int panorama_width, int panorama_height) const {
    AuditoryMap m;
    m.grid = steered_power(frame);
    m.panorama = project_to_panorama(m.grid, state_->grid, panorama_width, panorama_height, frame.t);
    return m;
}

std::array<double, 2> steering_coordinates(const SteeringGrid& grid, const Direction& d) {
    const double az_step = grid.azimuths[1] - grid.azimuths[0];
    const double el_step = grid.height() > 1 ? grid.elevations[1] - grid.elevations[0] : kPi;
    double az = std::fmod(d.az - grid.azimuths[0], 2 * kPi);
    if (az < 0) az += 2 * kPi;
    return {az / az_step, (d.el - grid.elevations[0]) / el_step};
}

FeatureMap project_to_panorama(const Grid& power, const SteeringGrid& grid, int width, int height, int t) {
    if (width <= 0 || height <= 0) throw DataError("zero-size panorama");
    if (power.width() != grid.width() || power.height() != grid.height())
        throw DataError("steered power does not match steering grid");
    MercatorPanorama pano(width, height);
    FeatureMap fm;
    fm.grid = Grid(width, height);
    fm.t = t;
    fm.tag = {Channel::Audio, 0.0};
    const int gw = power.width();
    const int gh = power.height();
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            auto [gx, gy] = steering_coordinates(grid, pano.to_direction(x, y));
            gy = std::clamp(gy, 0.0, static_cast<double>(gh - 1));
            int x0 = static_cast<int>(std::floor(gx));
            int y0 = static_cast<int>(std::floor(gy));
            double fx = gx - x0, fy = gy - y0;
            int xa = ((x0 % gw) + gw) % gw, xb = (xa + 1) % gw;
            int y1 = std::min(y0 + 1, gh - 1);
            double top = power(xa, y0) * (1 - fx) + power(xb, y0) * fx;
            double bot = power(xa, y1) * (1 - fx) + power(xb, y1) * fx;
            fm.grid(x, y) = top * (1 - fy) + bot * fy;
        }
    }
    return fm;
}

}  // namespace avsm
