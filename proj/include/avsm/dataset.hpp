#pragma once

#include "avsm/audio_map.hpp"
#include "avsm/vision_features.hpp"
#include "avsm/wav_io.hpp"

#include <filesystem>
#include <string>

namespace avsm {

/// JSON dataset description. Relative paths resolve against the manifest's
/// directory.
struct DatasetManifest {
    std::filesystem::path frames_dir;
    std::string frame_pattern = "frame_%05d.png";  // one printf integer conversion
    std::filesystem::path audio_wav;
    std::filesystem::path geometry;
    double array_radius = 0.1016;
    int fps = 10;
    int width = 512;
    int height = 256;

    static DatasetManifest load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    std::filesystem::path frame_path(int t) const;
    /// Number of consecutive frame files starting at index 0.
    int count_frames() const;
};

/// Video frames usable for a run: video_frames, provided the audio covers them
/// at 4410 samples per frame and the frame rate is 10 fps; "alignment error" otherwise.
int aligned_frame_count(int video_frames, std::size_t audio_samples, int fps, int sample_rate = kAudioSampleRate);

RgbFrame load_frame(const DatasetManifest& m, int t);

}  // namespace avsm
