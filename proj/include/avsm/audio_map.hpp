#pragma once

#include "avsm/feature_map.hpp"
#include "avsm/grid.hpp"
#include "avsm/mercator.hpp"
#include "avsm/wav_io.hpp"

#include <array>
#include <complex>
#include <filesystem>
#include <memory>
#include <vector>

namespace avsm {

inline constexpr int kMicrophones = 64;
inline constexpr int kAudioFrameSamples = 4410;
inline constexpr int kAudioSampleRate = 44100;
inline constexpr int kSteeringAzimuths = 128;
inline constexpr int kSteeringElevations = 64;

struct MicArrayGeometry {
    std::vector<Direction> positions;
    double radius = 0.1016;

    /// Spherical Fibonacci lattice, polar angle acos(1 - 2(i + 0.5)/n).
    static MicArrayGeometry fibonacci(int n = kMicrophones, double radius = 0.1016);
    /// Plain text, one "az el" pair (radians, el = polar angle) per line.
    static MicArrayGeometry load(const std::filesystem::path& path, double radius = 0.1016);
    void save(const std::filesystem::path& path) const;

    /// Throws DataError unless there are exactly 64 positions and radius > 0.
    void validate() const;
};

struct AudioFrame {
    std::vector<std::vector<float>> channels;
    int sample_rate = kAudioSampleRate;
    int t = 0;
};

/// Number of complete non-overlapping frames in the stream.
int audio_frame_count(const MultichannelPcm& pcm);
/// Samples [t*4410, (t+1)*4410) of every channel; "audio exhausted" past the end.
AudioFrame frame_audio(const MultichannelPcm& pcm, int t);

struct SteeringGrid {
    std::vector<double> azimuths;
    std::vector<double> elevations;

    /// 128 azimuths i*2pi/128 and 64 elevations (j+0.5)*pi/64.
    static SteeringGrid standard();
    int width() const { return static_cast<int>(azimuths.size()); }
    int height() const { return static_cast<int>(elevations.size()); }
};

enum class SphereModel { Open, Rigid };

struct BeamformerParams {
    int order = 6;
    double regularization = 1.0;  // relative to max |b_n|^2
    double f_lo = 300.0;
    double f_hi = 6500.0;
    double speed_of_sound = 343.0;
    SphereModel model = SphereModel::Open;
};

struct AuditoryMap {
    Grid grid;  // steered power, x = azimuth index, y = elevation index
    FeatureMap panorama;
};

/// Real orthonormal spherical harmonics up to `order`, (order + 1)^2 values
/// ordered by degree n then m = -n..n.
std::vector<double> real_spherical_harmonics(int order, const Direction& d);

/// Radial mode strength b_n(kr) of a unit plane wave.
std::complex<double> mode_strength(int n, double kr, SphereModel model);

class ShBeamformer {
public:
    ShBeamformer(MicArrayGeometry geom, SteeringGrid grid, BeamformerParams params = {});
    ~ShBeamformer();
    ShBeamformer(ShBeamformer&&) noexcept;
    ShBeamformer& operator=(ShBeamformer&&) noexcept;

    /// Band-limited steered response power per grid direction, >= 0.
    Grid steered_power(const AudioFrame& frame) const;
    AuditoryMap beamform(const AudioFrame& frame, int panorama_width, int panorama_height) const;

    const MicArrayGeometry& geometry() const;
    const SteeringGrid& grid() const;
    const BeamformerParams& params() const;

private:
    struct State;
    std::unique_ptr<State> state_;
};

/// Gather-style projection of the steering-grid power onto a Mercator panorama.
FeatureMap project_to_panorama(const Grid& power, const SteeringGrid& grid, int width, int height, int t = 0);

/// Continuous steering-grid coordinates of a direction (x wraps in azimuth).
std::array<double, 2> steering_coordinates(const SteeringGrid& grid, const Direction& d);

}  // namespace avsm
