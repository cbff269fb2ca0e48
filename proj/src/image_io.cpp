#include "avsm/image_io.hpp"

#include "avsm/error.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace avsm {

namespace {

unsigned char to_byte(double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

RgbFrame from_interleaved(const unsigned char* px, int w, int h, int channels, double scale) {
    RgbFrame f{Grid(w, h), Grid(w, h), Grid(w, h), 0};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const unsigned char* p = px + (static_cast<std::size_t>(y) * w + x) * channels;
            f.r(x, y) = p[0] * scale;
            f.g(x, y) = p[channels == 3 ? 1 : 0] * scale;
            f.b(x, y) = p[channels == 3 ? 2 : 0] * scale;
        }
    }
    return f;
}

// Next whitespace-separated header token of a netpbm file, skipping comments.
std::string pnm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

RgbFrame read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string magic = pnm_token(in);
    int channels = magic == "P6" ? 3 : magic == "P5" ? 1 : 0;
    if (channels == 0) throw DataError("unsupported netpbm variant in " + path.string());
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(pnm_token(in));
        h = std::stoi(pnm_token(in));
        maxval = std::stoi(pnm_token(in));
    } catch (const std::exception&) {
        throw DataError("malformed netpbm header in " + path.string());
    }
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw DataError("malformed netpbm header in " + path.string());
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * channels * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw DataError("truncated netpbm data in " + path.string());
    if (bytes == 1) return from_interleaved(raw.data(), w, h, channels, 1.0 / maxval);

    RgbFrame f{Grid(w, h), Grid(w, h), Grid(w, h), 0};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            auto at = [&](int c) {
                std::size_t i = ((static_cast<std::size_t>(y) * w + x) * channels + c) * 2;
                return (raw[i] << 8 | raw[i + 1]) / static_cast<double>(maxval);
            };
            f.r(x, y) = at(0);
            f.g(x, y) = at(channels == 3 ? 1 : 0);
            f.b(x, y) = at(channels == 3 ? 2 : 0);
        }
    }
    return f;
}

void write_png_raw(const std::filesystem::path& path, const std::vector<unsigned char>& px, int w, int h,
                   png_uint_32 format) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(w);
    img.height = static_cast<png_uint_32>(h);
    img.format = format;
    if (!png_image_write_to_file(&img, path.c_str(), 0, px.data(), 0, nullptr))
        throw DataError("cannot write PNG " + path.string() + ": " + img.message);
}

}  // namespace

RgbFrame read_image(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw DataError("cannot open image " + path.string());
    char head[8] = {};
    probe.read(head, 8);
    probe.close();
    if (head[0] == 'P' && (head[1] == '5' || head[1] == '6')) return read_pnm(path);

    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str()))
        throw DataError("cannot decode image " + path.string() + ": " + img.message);
    img.format = PNG_FORMAT_RGB;
    std::vector<unsigned char> px(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, px.data(), 0, nullptr)) {
        std::string msg = img.message;
        png_image_free(&img);
        throw DataError("cannot decode image " + path.string() + ": " + msg);
    }
    return from_interleaved(px.data(), static_cast<int>(img.width), static_cast<int>(img.height), 3, 1.0 / 255.0);
}

void write_png(const std::filesystem::path& path, const RgbFrame& frame) {
    if (!frame.valid()) throw DataError("invalid frame");
    const int w = frame.width(), h = frame.height();
    std::vector<unsigned char> px(static_cast<std::size_t>(w) * h * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            auto i = (static_cast<std::size_t>(y) * w + x) * 3;
            px[i] = to_byte(frame.r(x, y));
            px[i + 1] = to_byte(frame.g(x, y));
            px[i + 2] = to_byte(frame.b(x, y));
        }
    }
    write_png_raw(path, px, w, h, PNG_FORMAT_RGB);
}

void write_png(const std::filesystem::path& path, const Grid& gray) {
    if (gray.empty()) throw DataError("empty map");
    std::vector<unsigned char> px(gray.values().size());
    std::transform(gray.values().begin(), gray.values().end(), px.begin(), to_byte);
    write_png_raw(path, px, gray.width(), gray.height(), PNG_FORMAT_GRAY);
}

void write_ppm(const std::filesystem::path& path, const RgbFrame& frame) {
    if (!frame.valid()) throw DataError("invalid frame");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "P6\n" << frame.width() << ' ' << frame.height() << "\n255\n";
    for (int y = 0; y < frame.height(); ++y) {
        for (int x = 0; x < frame.width(); ++x) {
            unsigned char p[3] = {to_byte(frame.r(x, y)), to_byte(frame.g(x, y)), to_byte(frame.b(x, y))};
            out.write(reinterpret_cast<const char*>(p), 3);
        }
    }
}

void write_float_map(const std::filesystem::path& path, const Grid& map, int t) {
    if (t < 0) throw DataError("negative frame index");
    std::string buf = "AVSM";
    auto put32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    put32(static_cast<std::uint32_t>(map.width()));
    put32(static_cast<std::uint32_t>(map.height()));
    put32(static_cast<std::uint32_t>(t));
    for (double v : map.values()) put32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

FloatMap read_float_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto get32 = [&](std::size_t off) {
        return static_cast<std::uint32_t>(buf[off]) | static_cast<std::uint32_t>(buf[off + 1]) << 8 |
               static_cast<std::uint32_t>(buf[off + 2]) << 16 | static_cast<std::uint32_t>(buf[off + 3]) << 24;
    };
    if (buf.size() < 16 || std::memcmp(buf.data(), "AVSM", 4) != 0) throw DataError("not a float map: " + path.string());
    const auto w = get32(4), h = get32(8), t = get32(12);
    if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16)) throw DataError("bad float map dimensions");
    if (buf.size() != 16 + static_cast<std::size_t>(w) * h * 4) throw DataError("float map size mismatch");
    FloatMap m{Grid(static_cast<int>(w), static_cast<int>(h)), static_cast<int>(t)};
    auto vals = m.grid.values();
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = std::bit_cast<float>(get32(16 + 4 * i));
    return m;
}

}  // namespace avsm
