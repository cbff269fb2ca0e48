#include "avsm/synth_scene.hpp"

#include "avsm/dataset.hpp"
#include "avsm/error.hpp"
#include "avsm/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

namespace avsm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSpeedOfSound = 343.0;
constexpr int kLanczos = 16;        // taps each side
constexpr double kFade = 0.005;     // s, raised-cosine onset/offset ramp
constexpr int kDelayBlock = 64;     // samples sharing one delay for moving sources

std::uint32_t seed_lo(std::uint64_t s) { return static_cast<std::uint32_t>(s & 0xffffffffu); }
std::uint32_t seed_hi(std::uint64_t s) { return static_cast<std::uint32_t>(s >> 32); }

double deg(double v) { return v * kPi / 180.0; }

Shape parse_shape(const std::string& s) {
    if (s == "square") return Shape::Square;
    if (s == "disk") return Shape::Disk;
    if (s == "bar") return Shape::Bar;
    throw DataError("unknown shape '" + s + "'");
}

std::string shape_name(Shape s) {
    switch (s) {
        case Shape::Square: return "square";
        case Shape::Disk: return "disk";
        case Shape::Bar: return "bar";
    }
    return "?";
}

WaveformType parse_waveform(const std::string& s) {
    if (s == "tone") return WaveformType::Tone;
    if (s == "noise") return WaveformType::Noise;
    if (s == "chirp") return WaveformType::Chirp;
    throw DataError("unknown waveform '" + s + "'");
}

std::string waveform_name(WaveformType w) {
    switch (w) {
        case WaveformType::Tone: return "tone";
        case WaveformType::Noise: return "noise";
        case WaveformType::Chirp: return "chirp";
    }
    return "?";
}

double overlap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

// Fraction of pixel (x, y) covered by the actor centered at c.
double coverage(const VisualActor& a, std::array<double, 2> c, int x, int y) {
    const double w = a.width;
    const double h = a.shape == Shape::Bar ? a.height : a.width;
    if (a.shape != Shape::Disk)
        return overlap(x - 0.5, x + 0.5, c[0] - w / 2, c[0] + w / 2) * overlap(y - 0.5, y + 0.5, c[1] - h / 2, c[1] + h / 2);
    const double r = w / 2;
    const double d = std::hypot(x - c[0], y - c[1]);
    if (d <= r - 0.75) return 1.0;
    if (d >= r + 0.75) return 0.0;
    constexpr int n = 8;
    int inside = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double sx = x - 0.5 + (i + 0.5) / n, sy = y - 0.5 + (j + 0.5) / n;
            if (std::hypot(sx - c[0], sy - c[1]) <= r) ++inside;
        }
    return static_cast<double>(inside) / (n * n);
}

double lanczos(double x) {
    if (x == 0.0) return 1.0;
    if (std::abs(x) >= kLanczos) return 0.0;
    double px = kPi * x;
    return kLanczos * std::sin(px) * std::sin(px / kLanczos) / (px * px);
}

double gate(const AudioActor& a, double t) {
    if (t < a.onset || t >= a.offset) return 0.0;
    double ramp = std::min({kFade, (a.offset - a.onset) / 2});
    double g = 1.0;
    if (t < a.onset + ramp) g = 0.5 - 0.5 * std::cos(kPi * (t - a.onset) / ramp);
    if (t > a.offset - ramp) g = std::min(g, 0.5 - 0.5 * std::cos(kPi * (a.offset - t) / ramp));
    return g;
}

double wrapped_dx(double dx, int width) {
    dx = std::fmod(std::abs(dx), static_cast<double>(width));
    return std::min(dx, width - dx);
}

}  // namespace

std::array<double, 2> VisualActor::position(double t) const {
    if (path.empty()) return {0, 0};
    if (t <= path.front().t) return {path.front().x, path.front().y};
    if (t >= path.back().t) return {path.back().x, path.back().y};
    for (std::size_t i = 1; i < path.size(); ++i) {
        const auto& a = path[i - 1];
        const auto& b = path[i];
        if (t <= b.t) {
            double f = b.t > a.t ? (t - a.t) / (b.t - a.t) : 1.0;
            return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)};
        }
    }
    return {path.back().x, path.back().y};
}

SceneScript SceneScript::from_json(const nlohmann::json& j) {
    SceneScript s;
    try {
        s.duration = j.at("duration").get<double>();
        s.fps = j.value("fps", s.fps);
        if (j.contains("panorama")) {
            s.width = j["panorama"].at("width").get<int>();
            s.height = j["panorama"].at("height").get<int>();
        }
        if (j.contains("background")) s.background = j["background"].get<std::array<double, 3>>();
        s.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("noise_snr_db") && !j["noise_snr_db"].is_null()) s.noise_snr_db = j["noise_snr_db"].get<double>();
        for (const auto& v : j.value("visual_actors", nlohmann::json::array())) {
            VisualActor a;
            a.name = v.at("name").get<std::string>();
            a.shape = parse_shape(v.value("shape", std::string("square")));
            if (v.contains("color")) a.color = v["color"].get<std::array<double, 3>>();
            const auto& size = v.at("size");
            if (size.is_array()) {
                a.width = size.at(0).get<double>();
                a.height = size.at(1).get<double>();
            } else {
                a.width = a.height = size.get<double>();
            }
            for (const auto& k : v.at("path")) a.path.push_back({k.value("t", 0.0), k.at("x").get<double>(), k.at("y").get<double>()});
            a.appear = v.value("appear", 0.0);
            if (v.contains("disappear") && !v["disappear"].is_null()) a.disappear = v["disappear"].get<double>();
            s.visual_actors.push_back(std::move(a));
        }
        for (const auto& v : j.value("audio_actors", nlohmann::json::array())) {
            AudioActor a;
            a.name = v.at("name").get<std::string>();
            const auto& w = v.at("waveform");
            a.waveform.type = parse_waveform(w.at("type").get<std::string>());
            a.waveform.frequency = w.value("frequency", a.waveform.frequency);
            a.waveform.f0 = w.value("f0", a.waveform.f0);
            a.waveform.f1 = w.value("f1", a.waveform.f1);
            a.amplitude = v.value("amplitude", a.amplitude);
            a.onset = v.value("onset", 0.0);
            a.offset = v.value("offset", s.duration);
            a.attach_to = v.value("attach_to", std::string());
            for (const auto& k : v.value("path", nlohmann::json::array()))
                a.path.push_back({k.value("t", 0.0), {deg(k.at("az_deg").get<double>()), deg(k.at("el_deg").get<double>())}});
            s.audio_actors.push_back(std::move(a));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed scene script: ") + e.what());
    }
    s.validate();
    return s;
}

SceneScript SceneScript::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scene script " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed scene script " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json SceneScript::to_json() const {
    nlohmann::json j = {{"duration", duration},
                        {"fps", fps},
                        {"panorama", {{"width", width}, {"height", height}}},
                        {"background", background},
                        {"seed", seed}};
    if (noise_snr_db) j["noise_snr_db"] = *noise_snr_db;
    j["visual_actors"] = nlohmann::json::array();
    for (const auto& a : visual_actors) {
        nlohmann::json v = {{"name", a.name}, {"shape", shape_name(a.shape)}, {"color", a.color},
                            {"size", {a.width, a.height}}, {"appear", a.appear}};
        if (std::isfinite(a.disappear)) v["disappear"] = a.disappear;
        for (const auto& k : a.path) v["path"].push_back({{"t", k.t}, {"x", k.x}, {"y", k.y}});
        j["visual_actors"].push_back(v);
    }
    j["audio_actors"] = nlohmann::json::array();
    for (const auto& a : audio_actors) {
        nlohmann::json w = {{"type", waveform_name(a.waveform.type)}};
        if (a.waveform.type == WaveformType::Tone) w["frequency"] = a.waveform.frequency;
        if (a.waveform.type == WaveformType::Chirp) {
            w["f0"] = a.waveform.f0;
            w["f1"] = a.waveform.f1;
        }
        nlohmann::json v = {{"name", a.name}, {"waveform", w}, {"amplitude", a.amplitude},
                            {"onset", a.onset}, {"offset", a.offset}};
        if (!a.attach_to.empty()) v["attach_to"] = a.attach_to;
        for (const auto& k : a.path)
            v["path"].push_back({{"t", k.t}, {"az_deg", k.dir.az * 180 / kPi}, {"el_deg", k.dir.el * 180 / kPi}});
        j["audio_actors"].push_back(v);
    }
    return j;
}

void SceneScript::validate() const {
    if (!(duration > 0) || !std::isfinite(duration)) throw DataError("scene duration must be positive");
    if (fps != 10) throw DataError("scene fps must be 10 to match 4410-sample audio frames");
    if (width <= 0 || height <= 0) throw DataError("scene panorama must be non-empty");
    std::set<std::string> names;
    for (const auto& a : visual_actors) {
        if (a.name.empty() || !names.insert(a.name).second) throw DataError("actor names must be unique and non-empty");
        if (!(a.width > 0) || !(a.height > 0)) throw DataError("actor '" + a.name + "' must have positive size");
        if (a.path.empty()) throw DataError("actor '" + a.name + "' has no trajectory");
        if (!(a.appear < a.disappear)) throw DataError("actor '" + a.name + "' must appear before it disappears");
        const double hw = a.width / 2, hh = (a.shape == Shape::Bar ? a.height : a.width) / 2;
        for (std::size_t i = 0; i < a.path.size(); ++i) {
            const auto& k = a.path[i];
            if (i > 0 && k.t < a.path[i - 1].t) throw DataError("actor '" + a.name + "' keyframes out of order");
            // Linear paths between in-bounds keys stay in bounds.
            if (k.x - hw < 0 || k.x + hw > width || k.y - hh < 0 || k.y + hh > height)
                throw DataError("actor '" + a.name + "' trajectory leaves the panorama");
        }
    }
    for (const auto& a : audio_actors) {
        if (a.name.empty() || !names.insert(a.name).second) throw DataError("actor names must be unique and non-empty");
        if (!(a.onset >= 0) || !(a.onset < a.offset) || a.offset > duration + 1e-9)
            throw DataError("audio actor '" + a.name + "' needs 0 <= onset < offset <= duration");
        if (!(a.amplitude >= 0)) throw DataError("audio actor '" + a.name + "' amplitude must be >= 0");
        if (a.attach_to.empty() && a.path.empty()) throw DataError("audio actor '" + a.name + "' has no direction");
        if (!a.attach_to.empty() &&
            std::none_of(visual_actors.begin(), visual_actors.end(), [&](const VisualActor& v) { return v.name == a.attach_to; }))
            throw DataError("audio actor '" + a.name + "' attached to unknown actor '" + a.attach_to + "'");
        const double nyquist = kAudioSampleRate / 2.0;
        for (double f : {a.waveform.frequency, a.waveform.f0, a.waveform.f1})
            if (!(f > 0) || f >= nyquist) throw DataError("audio actor '" + a.name + "' frequency out of range");
    }
}

int SceneScript::frame_count() const { return static_cast<int>(std::lround(duration * fps)); }

Direction SceneScript::audio_direction(const AudioActor& a, double t) const {
    if (!a.attach_to.empty()) {
        for (const auto& v : visual_actors) {
            if (v.name != a.attach_to) continue;
            auto p = v.position(t);
            return MercatorPanorama(width, height).to_direction(p[0], p[1]);
        }
    }
    const auto& path = a.path;
    if (t <= path.front().t) return path.front().dir;
    if (t >= path.back().t) return path.back().dir;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const auto& p = path[i - 1];
        const auto& q = path[i];
        if (t <= q.t) {
            double f = q.t > p.t ? (t - p.t) / (q.t - p.t) : 1.0;
            // Interpolate azimuth along the shorter arc.
            double daz = std::remainder(q.dir.az - p.dir.az, 2 * kPi);
            double az = std::fmod(p.dir.az + f * daz + 2 * kPi, 2 * kPi);
            return {az, p.dir.el + f * (q.dir.el - p.dir.el)};
        }
    }
    return path.back().dir;
}

RgbFrame render_frame(const SceneScript& script, int t) {
    RgbFrame f = RgbFrame::filled(script.width, script.height, script.background[0], script.background[1],
                                  script.background[2], t);
    const double time = static_cast<double>(t) / script.fps;
    for (const auto& a : script.visual_actors) {
        if (!a.visible(time)) continue;
        auto c = a.position(time);
        const double hw = a.width / 2 + 1, hh = (a.shape == Shape::Bar ? a.height : a.width) / 2 + 1;
        const int x0 = std::max(0, static_cast<int>(std::floor(c[0] - hw)));
        const int x1 = std::min(script.width - 1, static_cast<int>(std::ceil(c[0] + hw)));
        const int y0 = std::max(0, static_cast<int>(std::floor(c[1] - hh)));
        const int y1 = std::min(script.height - 1, static_cast<int>(std::ceil(c[1] + hh)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                double cov = coverage(a, c, x, y);
                if (cov <= 0) continue;
                f.r(x, y) = f.r(x, y) * (1 - cov) + a.color[0] * cov;
                f.g(x, y) = f.g(x, y) * (1 - cov) + a.color[1] * cov;
                f.b(x, y) = f.b(x, y) * (1 - cov) + a.color[2] * cov;
            }
        }
    }
    return f;
}

std::vector<RgbFrame> render_video(const SceneScript& script) {
    std::vector<RgbFrame> frames;
    for (int t = 0; t < script.frame_count(); ++t) frames.push_back(render_frame(script, t));
    return frames;
}

MultichannelPcm render_audio(const SceneScript& script, const MicArrayGeometry& geom) {
    geom.validate();
    const double fs = kAudioSampleRate;
    const std::size_t total = static_cast<std::size_t>(script.frame_count()) * kAudioFrameSamples;
    const int margin = kLanczos + static_cast<int>(std::ceil(geom.radius / kSpeedOfSound * fs)) + 2;

    MultichannelPcm pcm;
    pcm.sample_rate = kAudioSampleRate;
    pcm.channels.assign(geom.positions.size(), std::vector<float>(total, 0.0f));
    std::vector<std::vector<double>> acc(geom.positions.size(), std::vector<double>(total, 0.0));

    for (std::size_t ai = 0; ai < script.audio_actors.size(); ++ai) {
        const AudioActor& a = script.audio_actors[ai];
        // Source signal on the sample grid, indices [first, last).
        const long first = std::max(0L, static_cast<long>(std::floor(a.onset * fs)) - margin);
        const long last = std::min(static_cast<long>(total), static_cast<long>(std::ceil(a.offset * fs)) + margin);
        if (first >= last) continue;
        const long src0 = first - margin;
        std::vector<double> src(static_cast<std::size_t>(last - first + 2 * margin), 0.0);
        std::seed_seq seq{seed_lo(script.seed), seed_hi(script.seed), static_cast<std::uint32_t>(ai)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(2.0));  // same power as a unit sine
        for (std::size_t i = 0; i < src.size(); ++i) {
            double t = (src0 + static_cast<long>(i)) / fs;
            double noise = a.waveform.type == WaveformType::Noise ? normal(rng) : 0.0;
            double g = gate(a, t);
            if (g == 0.0) continue;
            double v = 0;
            switch (a.waveform.type) {
                case WaveformType::Tone: v = std::sin(2 * kPi * a.waveform.frequency * t); break;
                case WaveformType::Noise: v = noise; break;
                case WaveformType::Chirp: {
                    double tau = t - a.onset, len = a.offset - a.onset;
                    v = std::sin(2 * kPi * (a.waveform.f0 * tau + (a.waveform.f1 - a.waveform.f0) / (2 * len) * tau * tau));
                    break;
                }
            }
            src[i] = a.amplitude * g * v;
        }

        std::vector<double> taps(2 * kLanczos);
        for (long block = first; block < last; block += kDelayBlock) {
            const long block_end = std::min(last, block + kDelayBlock);
            const auto s = script.audio_direction(a, (block + 0.5 * (block_end - block)) / fs).unit();
            for (std::size_t m = 0; m < geom.positions.size(); ++m) {
                const auto u = geom.positions[m].unit();
                // Per-mic delay -(r/c)(u.s): mics facing the source hear it early.
                const double delay = -(geom.radius / kSpeedOfSound) * (u[0] * s[0] + u[1] * s[1] + u[2] * s[2]) * fs;
                const double shift = std::floor(delay);
                const double frac = delay - shift;
                for (int k = 0; k < 2 * kLanczos; ++k) taps[static_cast<std::size_t>(k)] = lanczos(frac - (k - kLanczos + 1));
                auto& out = acc[m];
                for (long n = block; n < block_end; ++n) {
                    // x(n) = src(n - delay) = sum_k src[n - shift - j] L(frac + j)
                    const long base = n - static_cast<long>(shift) - src0;
                    double v = 0;
                    for (int k = 0; k < 2 * kLanczos; ++k) {
                        long idx = base - (k - kLanczos + 1);
                        if (idx >= 0 && idx < static_cast<long>(src.size())) v += src[static_cast<std::size_t>(idx)] * taps[static_cast<std::size_t>(k)];
                    }
                    out[static_cast<std::size_t>(n)] += v;
                }
            }
        }
    }

    if (script.noise_snr_db) {
        double power = 0;
        for (const auto& ch : acc)
            for (double v : ch) power += v * v;
        power /= static_cast<double>(acc.size() * std::max<std::size_t>(total, 1));
        const double sigma = std::sqrt(power / std::pow(10.0, *script.noise_snr_db / 10.0));
        std::seed_seq seq{seed_lo(script.seed), seed_hi(script.seed), 0x6e6f6973u};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, 1.0);
        if (sigma > 0)
            for (auto& ch : acc)
                for (double& v : ch) v += sigma * normal(rng);
    }
    for (std::size_t m = 0; m < acc.size(); ++m)
        for (std::size_t n = 0; n < total; ++n) pcm.channels[m][n] = static_cast<float>(acc[m][n]);
    return pcm;
}

std::string to_string(Modality m) {
    switch (m) {
        case Modality::Visual: return "visual";
        case Modality::Auditory: return "auditory";
        case Modality::Audiovisual: return "audiovisual";
    }
    return "?";
}

Modality parse_modality(const std::string& s) {
    for (Modality m : {Modality::Visual, Modality::Auditory, Modality::Audiovisual})
        if (to_string(m) == s) return m;
    throw DataError("unknown modality '" + s + "'");
}

GroundTruth ground_truth(const SceneScript& script) {
    GroundTruth gt;
    gt.width = script.width;
    gt.height = script.height;
    const MercatorPanorama pano(script.width, script.height);
    const double frame_len = 1.0 / script.fps;
    for (int t = 0; t < script.frame_count(); ++t) {
        const double t0 = t * frame_len, t1 = t0 + frame_len;
        std::vector<TruthEvent> events;
        std::vector<std::size_t> visible;
        for (const auto& v : script.visual_actors) {
            auto p = v.position(t0);
            bool on = v.visible(t0);
            if (on) visible.push_back(events.size());
            events.push_back({v.name, Modality::Visual, p[0], p[1], on});
        }
        for (const auto& a : script.audio_actors) {
            // Audible when the sound covers at least half of the frame.
            bool on = overlap(t0, t1, a.onset, a.offset) >= 0.5 * frame_len && a.amplitude > 0;
            Direction d = script.audio_direction(a, t0);
            auto p = pano.to_pixel(d);
            bool merged = false;
            if (on) {
                for (std::size_t vi : visible) {
                    TruthEvent& ve = events[vi];
                    bool attached = a.attach_to == ve.actor;
                    double dist = std::hypot(wrapped_dx(ve.cx - p[0], script.width), ve.cy - p[1]);
                    if (attached || dist <= kColocationRadius) {
                        ve.modality = Modality::Audiovisual;
                        ve.actor += "+" + a.name;
                        merged = true;
                        break;
                    }
                }
            }
            if (!merged) events.push_back({a.name, Modality::Auditory, p[0], p[1], on});
        }
        gt.frames.push_back(std::move(events));
    }
    return gt;
}

nlohmann::json GroundTruth::to_json() const {
    nlohmann::json j = {{"panorama", {{"width", width}, {"height", height}}}, {"frames", nlohmann::json::array()}};
    for (std::size_t t = 0; t < frames.size(); ++t) {
        nlohmann::json events = nlohmann::json::array();
        for (const auto& e : frames[t])
            events.push_back({{"actor", e.actor}, {"modality", to_string(e.modality)}, {"centroid", {e.cx, e.cy}}, {"active", e.active}});
        j["frames"].push_back({{"t", t}, {"events", events}});
    }
    return j;
}

GroundTruth GroundTruth::from_json(const nlohmann::json& j) {
    GroundTruth gt;
    try {
        gt.width = j.at("panorama").at("width").get<int>();
        gt.height = j.at("panorama").at("height").get<int>();
        for (const auto& f : j.at("frames")) {
            auto t = f.at("t").get<std::size_t>();
            if (t >= gt.frames.size()) gt.frames.resize(t + 1);
            for (const auto& e : f.at("events")) {
                TruthEvent ev;
                ev.actor = e.value("actor", std::string());
                ev.modality = parse_modality(e.at("modality").get<std::string>());
                ev.cx = e.at("centroid").at(0).get<double>();
                ev.cy = e.at("centroid").at(1).get<double>();
                ev.active = e.value("active", true);
                gt.frames[t].push_back(ev);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed ground truth: ") + e.what());
    }
    return gt;
}

GroundTruth GroundTruth::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open ground truth " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed ground truth " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

void write_dataset(const SceneScript& script, const MicArrayGeometry& geom, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "frames");
    DatasetManifest m;
    m.frames_dir = "frames";
    m.audio_wav = "audio.wav";
    m.geometry = "geometry.txt";
    m.array_radius = geom.radius;
    m.fps = script.fps;
    m.width = script.width;
    m.height = script.height;
    for (int t = 0; t < script.frame_count(); ++t) {
        DatasetManifest abs = m;
        abs.frames_dir = dir / m.frames_dir;
        write_png(abs.frame_path(t), render_frame(script, t));
    }
    write_wav(dir / m.audio_wav, render_audio(script, geom));
    geom.save(dir / m.geometry);
    m.save(dir / "manifest.json");
    std::ofstream(dir / "scene.json") << script.to_json().dump(2) << '\n';
    std::ofstream(dir / "ground_truth.json") << ground_truth(script).to_json().dump(2) << '\n';
}

}  // namespace avsm
