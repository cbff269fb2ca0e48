#include "doctest.h"

#include "avsm/dataset.hpp"
#include "avsm/error.hpp"
#include "avsm/image_io.hpp"
#include "avsm/pipeline.hpp"
#include "avsm/wav_io.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

using namespace avsm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("avsm_test_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

MultichannelPcm test_pcm(int channels, int samples) {
    MultichannelPcm pcm;
    pcm.channels.assign(static_cast<std::size_t>(channels), std::vector<float>(static_cast<std::size_t>(samples)));
    for (int c = 0; c < channels; ++c)
        for (int i = 0; i < samples; ++i)
            pcm.channels[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] =
                static_cast<float>(0.9 * std::sin(0.01 * i * (c + 1)));
    return pcm;
}

void put_le(std::string& s, std::uint32_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

TEST_CASE("WAV round trips") {
    TempDir dir("wav");
    auto pcm = test_pcm(3, 500);
    for (auto [enc, tol] : {std::pair{WavEncoding::Float32, 0.0}, std::pair{WavEncoding::Pcm24, 1.0 / 8388608},
                            std::pair{WavEncoding::Pcm16, 1.0 / 32768}}) {
        auto path = dir.path / "a.wav";
        write_wav(path, pcm, enc);
        auto back = read_wav(path);
        REQUIRE(back.channel_count() == 3);
        REQUIRE(back.samples() == 500);
        CHECK(back.sample_rate == 44100);
        double err = 0;
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < 500; ++i)
                err = std::max(err, std::abs(static_cast<double>(back.channels[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)]) -
                                             pcm.channels[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)]));
        CHECK(err <= tol);
    }
    WavReader r(dir.path / "a.wav");
    auto part = r.read(100, 10);
    CHECK(part.samples() == 10);
    CHECK(part.channels[1][0] == doctest::Approx(pcm.channels[1][100]).epsilon(1e-4));
    CHECK_THROWS_WITH_AS(r.read(495, 10), "audio exhausted", DataError);
}

TEST_CASE("WAV extensible header and odd chunks") {
    TempDir dir("wavx");
    std::string body;
    body += "WAVE";
    body += "LIST";
    put_le(body, 3, 4);
    body += "abc";
    body.push_back('\0');  // pad byte
    body += "fmt ";
    put_le(body, 40, 4);
    put_le(body, 0xfffe, 2);
    put_le(body, 2, 2);
    put_le(body, 44100, 4);
    put_le(body, 44100 * 8, 4);
    put_le(body, 8, 2);
    put_le(body, 32, 2);
    put_le(body, 22, 2);
    put_le(body, 32, 2);
    put_le(body, 3, 4);
    put_le(body, 3, 2);  // subformat GUID starts with the float tag
    body += std::string("\x00\x00\x00\x00\x10\x00\x80\x00\x00\xaa\x00\x38\x9b\x71", 14);
    body += "data";
    put_le(body, 16, 4);
    for (float v : {0.5f, -0.25f, 1.0f, 0.0f}) {
        std::uint32_t u;
        std::memcpy(&u, &v, 4);
        put_le(body, u, 4);
    }
    std::string file = "RIFF";
    put_le(file, static_cast<std::uint32_t>(body.size()), 4);
    file += body;
    std::ofstream(dir.path / "x.wav", std::ios::binary) << file;
    auto pcm = read_wav(dir.path / "x.wav");
    REQUIRE(pcm.channel_count() == 2);
    REQUIRE(pcm.samples() == 2);
    CHECK(pcm.channels[0][0] == 0.5f);
    CHECK(pcm.channels[1][0] == -0.25f);
    CHECK(pcm.channels[0][1] == 1.0f);

    std::ofstream(dir.path / "bad.wav", std::ios::binary) << "RIFF\x04\x00\x00\x00WAVE";
    CHECK_THROWS_AS(read_wav(dir.path / "bad.wav"), DataError);
    std::ofstream(dir.path / "junk.wav", std::ios::binary) << "hello";
    CHECK_THROWS_AS(read_wav(dir.path / "junk.wav"), DataError);
    CHECK_THROWS_AS(read_wav(dir.path / "missing.wav"), DataError);
}

TEST_CASE("PNG and PPM round trips") {
    TempDir dir("img");
    RgbFrame f = RgbFrame::filled(7, 5, 0, 0, 0);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 7; ++x) {
            f.r(x, y) = ((x * 37 + y * 11) % 256) / 255.0;
            f.g(x, y) = ((x * 5 + y * 71) % 256) / 255.0;
            f.b(x, y) = ((x * y * 13) % 256) / 255.0;
        }
    write_png(dir.path / "a.png", f);
    write_ppm(dir.path / "a.ppm", f);
    for (const char* name : {"a.png", "a.ppm"}) {
        auto back = read_image(dir.path / name);
        CHECK(back.width() == 7);
        CHECK(back.height() == 5);
        CHECK(relative_l2(back.r, f.r) < 1e-12);
        CHECK(relative_l2(back.g, f.g) < 1e-12);
        CHECK(relative_l2(back.b, f.b) < 1e-12);
    }

    // 16-bit binary PGM
    std::string pgm = "P5\n# comment\n2 1\n65535\n";
    pgm += std::string("\xff\xff\x80\x00", 4);
    std::ofstream(dir.path / "g.pgm", std::ios::binary) << pgm;
    auto g = read_image(dir.path / "g.pgm");
    CHECK(g.r(0, 0) == doctest::Approx(1.0));
    CHECK(g.g(1, 0) == doctest::Approx(32768.0 / 65535));
    CHECK(g.b(1, 0) == g.r(1, 0));

    std::ofstream(dir.path / "t.ppm", std::ios::binary) << "P6\n4 4\n255\nabc";
    CHECK_THROWS_AS(read_image(dir.path / "t.ppm"), DataError);
    std::ofstream(dir.path / "n.png", std::ios::binary) << "not an image";
    CHECK_THROWS_AS(read_image(dir.path / "n.png"), DataError);
}

TEST_CASE("float map format") {
    TempDir dir("f32");
    Grid g(3, 2);
    for (int i = 0; i < 6; ++i) g.values()[static_cast<std::size_t>(i)] = 0.125 * i;
    write_float_map(dir.path / "m.f32", g, 42);
    std::string raw = slurp(dir.path / "m.f32");
    REQUIRE(raw.size() == 16 + 6 * 4);
    CHECK(raw.substr(0, 4) == "AVSM");
    CHECK(raw[4] == 3);
    CHECK(raw[8] == 2);
    CHECK(raw[12] == 42);
    float third;
    std::memcpy(&third, raw.data() + 16 + 2 * 4, 4);
    CHECK(third == 0.25f);
    auto back = read_float_map(dir.path / "m.f32");
    CHECK(back.t == 42);
    CHECK(back.grid == g);
    std::ofstream(dir.path / "short.f32", std::ios::binary) << raw.substr(0, 20);
    CHECK_THROWS_AS(read_float_map(dir.path / "short.f32"), DataError);
}

TEST_CASE("dataset manifest") {
    TempDir dir("manifest");
    DatasetManifest m;
    m.frames_dir = dir.path / "frames";
    m.audio_wav = dir.path / "audio.wav";
    m.geometry = dir.path / "geometry.txt";
    m.width = 64;
    m.height = 32;
    m.save(dir.path / "manifest.json");
    auto back = DatasetManifest::load(dir.path / "manifest.json");
    CHECK(back.width == 64);
    CHECK(back.frame_pattern == "frame_%05d.png");
    CHECK(back.frame_path(3).filename() == "frame_00003.png");
    CHECK(back.count_frames() == 0);

    std::ofstream(dir.path / "rel.json") << R"({"frames_dir": "frames", "audio_wav": "a.wav", "geometry": "g.txt",
        "fps": 10, "panorama": {"width": 32, "height": 16}})";
    auto rel = DatasetManifest::load(dir.path / "rel.json");
    CHECK(rel.audio_wav == dir.path / "a.wav");
    CHECK(rel.width == 32);

    fs::create_directories(dir.path / "frames");
    write_png(dir.path / "frames" / "frame_00000.png", RgbFrame::filled(32, 16, 0.2, 0.2, 0.2));
    write_png(dir.path / "frames" / "frame_00001.png", RgbFrame::filled(30, 16, 0.2, 0.2, 0.2));
    CHECK(rel.count_frames() == 2);
    CHECK(load_frame(rel, 0).width() == 32);
    CHECK_THROWS_AS(load_frame(rel, 1), DataError);
    CHECK_THROWS_AS(load_frame(rel, 2), DataError);

    std::ofstream(dir.path / "broken.json") << "{";
    CHECK_THROWS_AS(DatasetManifest::load(dir.path / "broken.json"), DataError);
    CHECK_THROWS_AS(DatasetManifest::load(dir.path / "none.json"), DataError);
}

TEST_CASE("frame alignment arithmetic") {
    CHECK(aligned_frame_count(600, 60 * 44100, 10) == 600);
    CHECK(aligned_frame_count(3, 3 * 4410, 10) == 3);
    CHECK_THROWS_WITH_AS(aligned_frame_count(4, 3 * 4410, 10), doctest::Contains("alignment error"), DataError);
    CHECK_THROWS_WITH_AS(aligned_frame_count(3, 3 * 4410, 25), doctest::Contains("alignment error"), DataError);
    CHECK_THROWS_WITH_AS(aligned_frame_count(3, 3 * 4800, 10, 48000), doctest::Contains("alignment error"), DataError);
}

TEST_CASE("pipeline config text") {
    auto c = PipelineConfig::parse(R"(
        # comment
        maps = vsm, avsm1
        threshold = 0.8
        connectivity = 4
        avsm1.weights = 0.1, 0.1, 0.1, 0.1, 0.6
        pyramid.factor = 2
        audio.sphere_model = rigid
        audio.order = 4
        flow.iterations = 50   # trailing comment
        output.overlays = false
    )");
    REQUIRE(c.maps.size() == 2);
    CHECK(c.maps[1] == MapKind::AVSM1);
    CHECK(c.threshold == 0.8);
    CHECK(c.connectivity == 4);
    CHECK(c.avsm1_weights.audio == 0.6);
    CHECK(c.proto.factor == DownsampleFactor::Octave);
    CHECK(c.beamformer.model == SphereModel::Rigid);
    CHECK(c.beamformer.order == 4);
    CHECK(c.flow.iterations == 50);
    CHECK_FALSE(c.write_overlays);
    CHECK(c.needs_visual());
    CHECK(c.needs_audio());

    auto asm_only = PipelineConfig::parse("maps = asm\n");
    CHECK_FALSE(asm_only.needs_visual());
    auto vsm_only = PipelineConfig::parse("maps = vsm\n");
    CHECK_FALSE(vsm_only.needs_audio());

    CHECK_THROWS_AS(PipelineConfig::parse("bogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::parse("threshold = high\n"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::parse("threshold = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::parse("avsm1.weights = 0.2,0.2,0.2,0.2,0.3\n"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::parse("vsm.weights = 1,-1,0.5,0.5\n"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::parse("maps = vsm, foo\n"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::parse("just text\n"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::load("/nonexistent/config.txt"), DataError);
}
