#include "avsm/dataset.hpp"

#include "avsm/error.hpp"
#include "avsm/image_io.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>

namespace avsm {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
    return p.is_absolute() ? p : base / p;
}

}  // namespace

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed manifest " + path.string() + ": " + e.what());
    }
    const auto base = path.parent_path();
    DatasetManifest m;
    try {
        m.frames_dir = resolve(base, j.at("frames_dir").get<std::string>());
        m.frame_pattern = j.value("frame_pattern", m.frame_pattern);
        m.audio_wav = resolve(base, j.at("audio_wav").get<std::string>());
        m.geometry = resolve(base, j.at("geometry").get<std::string>());
        m.array_radius = j.value("array_radius", m.array_radius);
        m.fps = j.value("fps", m.fps);
        const auto& pano = j.at("panorama");
        m.width = pano.at("width").get<int>();
        m.height = pano.at("height").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("manifest " + path.string() + ": " + e.what());
    }
    if (m.width <= 0 || m.height <= 0) throw DataError("manifest panorama dimensions must be positive");
    if (m.frame_pattern.find('%') == std::string::npos) throw DataError("frame_pattern needs an integer conversion");
    return m;
}

void DatasetManifest::save(const std::filesystem::path& path) const {
    nlohmann::json j = {
        {"frames_dir", frames_dir.string()},
        {"frame_pattern", frame_pattern},
        {"audio_wav", audio_wav.string()},
        {"geometry", geometry.string()},
        {"array_radius", array_radius},
        {"fps", fps},
        {"panorama", {{"width", width}, {"height", height}}},
    };
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest " + path.string());
    out << j.dump(2) << '\n';
}

std::filesystem::path DatasetManifest::frame_path(int t) const {
    char buf[512];
    std::snprintf(buf, sizeof buf, frame_pattern.c_str(), t);
    return frames_dir / buf;
}

int DatasetManifest::count_frames() const {
    int n = 0;
    while (std::filesystem::exists(frame_path(n))) ++n;
    return n;
}

int aligned_frame_count(int video_frames, std::size_t audio_samples, int fps, int sample_rate) {
    if (fps != 10 || sample_rate != kAudioSampleRate)
        throw DataError("alignment error: expected 10 fps video and 44100 Hz audio");
    if (static_cast<std::size_t>(video_frames) * kAudioFrameSamples > audio_samples)
        throw DataError("alignment error: " + std::to_string(video_frames) + " frames need " +
                        std::to_string(static_cast<std::size_t>(video_frames) * kAudioFrameSamples) +
                        " audio samples, have " + std::to_string(audio_samples));
    return video_frames;
}

RgbFrame load_frame(const DatasetManifest& m, int t) {
    auto p = m.frame_path(t);
    if (!std::filesystem::exists(p)) throw DataError("missing frame " + p.string());
    RgbFrame f = read_image(p);
    if (f.width() != m.width || f.height() != m.height)
        throw DataError("frame " + p.string() + " does not match manifest panorama size");
    f.t = t;
    return f;
}

}  // namespace avsm
