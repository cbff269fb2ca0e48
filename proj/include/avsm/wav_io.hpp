#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace avsm {

/// Planar multichannel PCM, samples nominally in [-1, 1].
struct MultichannelPcm {
    int sample_rate = 44100;
    std::vector<std::vector<float>> channels;

    int channel_count() const { return static_cast<int>(channels.size()); }
    std::size_t samples() const { return channels.empty() ? 0 : channels.front().size(); }
};

enum class WavEncoding { Pcm16, Pcm24, Float32 };

/// Random-access reader over the data chunk of a RIFF/WAVE file (PCM
/// 16/24/32-bit or IEEE float32/64, plain or WAVE_FORMAT_EXTENSIBLE).
class WavReader {
public:
    explicit WavReader(const std::filesystem::path& path);

    int channels() const { return channels_; }
    int sample_rate() const { return sample_rate_; }
    std::size_t samples() const { return samples_; }

    /// Samples [start, start + count) of every channel; DataError past the end.
    MultichannelPcm read(std::size_t start, std::size_t count) const;

private:
    std::filesystem::path path_;
    int channels_ = 0;
    int sample_rate_ = 0;
    int bits_ = 0;
    bool float_ = false;
    std::size_t data_offset_ = 0;
    std::size_t samples_ = 0;
};

/// Whole-file read. Throws DataError on malformed input.
MultichannelPcm read_wav(const std::filesystem::path& path);

void write_wav(const std::filesystem::path& path, const MultichannelPcm& pcm,
               WavEncoding encoding = WavEncoding::Float32);

}  // namespace avsm
