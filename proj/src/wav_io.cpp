#include "avsm/wav_io.hpp"

#include "avsm/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace avsm {

namespace {

std::uint32_t le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t le16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put16(std::string& s, std::uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

}  // namespace

WavReader::WavReader(const std::filesystem::path& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open WAV file " + path.string());
    in.seekg(0, std::ios::end);
    const auto file_size = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    unsigned char riff[12] = {};
    in.read(reinterpret_cast<char*>(riff), 12);
    if (!in || std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(riff + 8, "WAVE", 4) != 0)
        throw DataError("not a RIFF/WAVE file: " + path.string());

    std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false, have_data = false;
    std::size_t data_size = 0;
    std::size_t pos = 12;
    while (pos + 8 <= file_size && !(have_fmt && have_data)) {
        unsigned char hdr[8];
        in.seekg(static_cast<std::streamoff>(pos));
        in.read(reinterpret_cast<char*>(hdr), 8);
        if (!in) break;
        const std::size_t size = le32(hdr + 4);
        const std::size_t body = pos + 8;
        const std::size_t avail = file_size - body;
        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (size < 16 || size > avail) throw DataError("truncated fmt chunk");
            unsigned char f[40] = {};
            in.read(reinterpret_cast<char*>(f), static_cast<std::streamsize>(std::min<std::size_t>(size, 40)));
            format = le16(f);
            channels = le16(f + 2);
            rate = le32(f + 4);
            block_align = le16(f + 12);
            bits = le16(f + 14);
            if (format == kFormatExtensible) {
                if (size < 40) throw DataError("truncated extensible fmt chunk");
                format = le16(f + 24);
            }
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            data_offset_ = body;
            // Streaming writers sometimes leave the size unset; take what is there.
            data_size = std::min(size, avail);
            have_data = true;
        }
        pos = body + size + (size & 1);
    }
    if (!have_fmt) throw DataError("WAV file has no fmt chunk");
    if (!have_data) throw DataError("WAV file has no data chunk");
    if (channels == 0 || rate == 0) throw DataError("WAV header declares zero channels or rate");
    float_ = format == kFormatFloat;
    if (!(format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32)) && !(float_ && (bits == 32 || bits == 64)))
        throw DataError("unsupported WAV encoding (format " + std::to_string(format) + ", " + std::to_string(bits) +
                        " bits)");
    if (block_align != channels * (bits / 8u)) throw DataError("inconsistent WAV block alignment");
    channels_ = channels;
    sample_rate_ = static_cast<int>(rate);
    bits_ = bits;
    samples_ = data_size / block_align;
}

MultichannelPcm WavReader::read(std::size_t start, std::size_t count) const {
    if (start + count > samples_) throw DataError("audio exhausted");
    const std::size_t bytes = static_cast<std::size_t>(bits_) / 8;
    const std::size_t block = bytes * static_cast<std::size_t>(channels_);
    std::vector<unsigned char> buf(block * count);
    std::ifstream in(path_, std::ios::binary);
    in.seekg(static_cast<std::streamoff>(data_offset_ + start * block));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw DataError("failed reading WAV data from " + path_.string());

    MultichannelPcm pcm;
    pcm.sample_rate = sample_rate_;
    pcm.channels.assign(static_cast<std::size_t>(channels_), std::vector<float>(count));
    for (std::size_t i = 0; i < count; ++i) {
        const unsigned char* frame = buf.data() + i * block;
        for (std::size_t c = 0; c < static_cast<std::size_t>(channels_); ++c) {
            const unsigned char* s = frame + c * bytes;
            double v;
            if (float_ && bits_ == 32) {
                v = std::bit_cast<float>(le32(s));
            } else if (float_) {
                std::uint64_t u = static_cast<std::uint64_t>(le32(s)) | static_cast<std::uint64_t>(le32(s + 4)) << 32;
                v = std::bit_cast<double>(u);
            } else if (bits_ == 16) {
                v = static_cast<std::int16_t>(le16(s)) / 32768.0;
            } else if (bits_ == 24) {
                auto x = static_cast<std::int32_t>(static_cast<std::uint32_t>(s[0]) << 8 | static_cast<std::uint32_t>(s[1]) << 16 |
                                                   static_cast<std::uint32_t>(s[2]) << 24) >>
                         8;
                v = x / 8388608.0;
            } else {
                v = static_cast<std::int32_t>(le32(s)) / 2147483648.0;
            }
            pcm.channels[c][i] = static_cast<float>(v);
        }
    }
    return pcm;
}

MultichannelPcm read_wav(const std::filesystem::path& path) {
    WavReader r(path);
    return r.read(0, r.samples());
}

void write_wav(const std::filesystem::path& path, const MultichannelPcm& pcm, WavEncoding encoding) {
    const auto channels = static_cast<std::uint16_t>(pcm.channel_count());
    if (channels == 0) throw DataError("cannot write WAV with no channels");
    for (const auto& ch : pcm.channels)
        if (ch.size() != pcm.samples()) throw DataError("ragged channel lengths");
    const std::uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : encoding == WavEncoding::Pcm24 ? 24 : 32;
    const std::uint16_t format = encoding == WavEncoding::Float32 ? kFormatFloat : kFormatPcm;
    const std::uint16_t block = static_cast<std::uint16_t>(channels * bits / 8);
    const std::uint64_t data_size = static_cast<std::uint64_t>(block) * pcm.samples();
    if (data_size > 0xffffffffull - 64) throw DataError("audio too long for RIFF");

    std::string out;
    out.reserve(static_cast<std::size_t>(data_size) + 44);
    out += "RIFF";
    put32(out, static_cast<std::uint32_t>(36 + data_size));
    out += "WAVEfmt ";
    put32(out, 16);
    put16(out, format);
    put16(out, channels);
    put32(out, static_cast<std::uint32_t>(pcm.sample_rate));
    put32(out, static_cast<std::uint32_t>(pcm.sample_rate) * block);
    put16(out, block);
    put16(out, bits);
    out += "data";
    put32(out, static_cast<std::uint32_t>(data_size));
    for (std::size_t i = 0; i < pcm.samples(); ++i) {
        for (const auto& ch : pcm.channels) {
            float v = ch[i];
            if (encoding == WavEncoding::Float32) {
                put32(out, std::bit_cast<std::uint32_t>(v));
                continue;
            }
            double c = std::clamp(static_cast<double>(v), -1.0, 1.0);
            if (encoding == WavEncoding::Pcm16) {
                auto q = static_cast<std::int16_t>(std::lround(std::min(c * 32768.0, 32767.0)));
                put16(out, static_cast<std::uint16_t>(q));
            } else {
                auto q = static_cast<std::int32_t>(std::lround(std::min(c * 8388608.0, 8388607.0)));
                auto u = static_cast<std::uint32_t>(q);
                out.push_back(static_cast<char>(u & 0xff));
                out.push_back(static_cast<char>((u >> 8) & 0xff));
                out.push_back(static_cast<char>((u >> 16) & 0xff));
            }
        }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write WAV file " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("failed writing WAV file " + path.string());
}

}  // namespace avsm
