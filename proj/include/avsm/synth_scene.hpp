#pragma once

#include "avsm/audio_map.hpp"
#include "avsm/vision_features.hpp"
#include "avsm/wav_io.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace avsm {

enum class Shape { Square, Disk, Bar };

struct PositionKey {
    double t = 0;
    double x = 0;  // panorama pixel coordinates of the shape center
    double y = 0;
};

struct VisualActor {
    std::string name;
    Shape shape = Shape::Square;
    std::array<double, 3> color = {1.0, 1.0, 1.0};
    double width = 24;   // disk: diameter
    double height = 24;  // ignored for squares and disks
    std::vector<PositionKey> path;  // linear between keys, held outside
    double appear = 0;
    double disappear = std::numeric_limits<double>::infinity();

    std::array<double, 2> position(double t) const;
    bool visible(double t) const { return t >= appear && t < disappear; }
};

enum class WaveformType { Tone, Noise, Chirp };

struct Waveform {
    WaveformType type = WaveformType::Tone;
    double frequency = 1000;  // tone
    double f0 = 500;          // chirp start
    double f1 = 4000;         // chirp end
};

struct DirectionKey {
    double t = 0;
    Direction dir;
};

struct AudioActor {
    std::string name;
    Waveform waveform;
    double amplitude = 0.5;
    double onset = 0;
    double offset = 0;
    std::vector<DirectionKey> path;
    /// Name of a visual actor whose panorama position gives the direction.
    std::string attach_to;
};

struct SceneScript {
    double duration = 1.0;
    int fps = 10;
    int width = 512;
    int height = 256;
    std::array<double, 3> background = {0.0, 0.0, 0.0};
    std::uint64_t seed = 0;
    std::optional<double> noise_snr_db;
    std::vector<VisualActor> visual_actors;
    std::vector<AudioActor> audio_actors;

    static SceneScript from_json(const nlohmann::json& j);
    static SceneScript load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    /// Throws DataError for inconsistent scripts (bad intervals, bounds, names).
    void validate() const;
    int frame_count() const;
    /// Direction of an audio actor at time t (interpolated or attached).
    Direction audio_direction(const AudioActor& a, double t) const;
};

RgbFrame render_frame(const SceneScript& script, int t);
std::vector<RgbFrame> render_video(const SceneScript& script);
/// Free-field plane-wave rendering, frame_count * 4410 samples per mic.
MultichannelPcm render_audio(const SceneScript& script, const MicArrayGeometry& geom);

enum class Modality { Visual, Auditory, Audiovisual };
std::string to_string(Modality m);
Modality parse_modality(const std::string& s);

struct TruthEvent {
    std::string actor;
    Modality modality = Modality::Visual;
    double cx = 0;
    double cy = 0;
    bool active = false;
};

struct GroundTruth {
    int width = 0;
    int height = 0;
    std::vector<std::vector<TruthEvent>> frames;

    nlohmann::json to_json() const;
    static GroundTruth from_json(const nlohmann::json& j);
    static GroundTruth load(const std::filesystem::path& path);
};

/// Sound sources within this many pixels of a visible actor count as co-located.
inline constexpr double kColocationRadius = 10.0;

GroundTruth ground_truth(const SceneScript& script);

/// Writes frames/frame_NNNNN.png, audio.wav, geometry.txt, scene.json,
/// ground_truth.json and manifest.json into `dir`.
void write_dataset(const SceneScript& script, const MicArrayGeometry& geom, const std::filesystem::path& dir);

}  // namespace avsm
