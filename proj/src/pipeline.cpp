#include "avsm/pipeline.hpp"

#include "avsm/contour.hpp"
#include "avsm/error.hpp"
#include "avsm/image_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace avsm {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    double d = to_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError("config key '" + key + "' expects an integer");
    return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v, std::size_t n) {
    auto parts = split(v, ',');
    if (parts.size() != n) throw ConfigError("config key '" + key + "' expects " + std::to_string(n) + " comma-separated numbers");
    std::vector<double> out;
    for (const auto& p : parts) out.push_back(to_double(key, p));
    return out;
}

std::string frame_name(const std::string& prefix, int t, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%05d.%s", prefix.c_str(), t, ext);
    return buf;
}

FeatureMap zero_feature(int w, int h, Channel kind, int t) {
    FeatureMap f;
    f.grid = Grid(w, h);
    f.t = t;
    f.tag = {kind, 0.0};
    return f;
}

}  // namespace

void PipelineConfig::set(const std::string& raw_key, const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string v = trim(raw_value);
    if (key == "maps") {
        maps.clear();
        for (const auto& name : split(v, ','))
            if (!name.empty()) maps.push_back(parse_map_kind(name));
    } else if (key == "threshold") {
        threshold = to_double(key, v);
    } else if (key == "connectivity") {
        connectivity = to_int(key, v);
    } else if (key == "renormalize_maps") {
        renormalize_maps = to_bool(key, v);
    } else if (key == "output.overlays") {
        write_overlays = to_bool(key, v);
    } else if (key == "output.maps") {
        write_maps = to_bool(key, v);
    } else if (key == "vsm.weights") {
        auto w = to_doubles(key, v, 4);
        vsm_weights = {w[0], w[1], w[2], w[3]};
    } else if (key == "avsm1.weights") {
        auto w = to_doubles(key, v, 5);
        avsm1_weights = {w[0], w[1], w[2], w[3], w[4]};
    } else if (key == "pyramid.factor") {
        if (v == "sqrt2") proto.factor = DownsampleFactor::HalfOctave;
        else if (v == "2") proto.factor = DownsampleFactor::Octave;
        else throw ConfigError("pyramid.factor must be sqrt2 or 2");
    } else if (key == "proto.dog_sigma_center") {
        proto.dog_sigma_center = to_double(key, v);
    } else if (key == "proto.dog_sigma_surround") {
        proto.dog_sigma_surround = to_double(key, v);
    } else if (key == "proto.bo_offset") {
        proto.bo_offset = to_double(key, v);
    } else if (key == "proto.annulus_radius") {
        proto.annulus_radius = to_double(key, v);
    } else if (key == "proto.annulus_thickness") {
        proto.annulus_thickness = to_double(key, v);
    } else if (key == "itti.range") {
        proto.itti.range = to_double(key, v);
    } else if (key == "itti.peak_fraction") {
        proto.itti.peak_fraction = to_double(key, v);
    } else if (key == "gabor.wavelength") {
        proto.gabor.wavelength = to_double(key, v);
    } else if (key == "gabor.sigma") {
        proto.gabor.sigma = to_double(key, v);
    } else if (key == "gabor.aspect") {
        proto.gabor.aspect = to_double(key, v);
    } else if (key == "color.luminance_gate") {
        luminance_gate = to_double(key, v);
    } else if (key == "flow.alpha") {
        flow.alpha = to_double(key, v);
    } else if (key == "flow.iterations") {
        flow.iterations = to_int(key, v);
    } else if (key == "flow.levels") {
        flow.levels = to_int(key, v);
    } else if (key == "flow.presmooth_sigma") {
        flow.presmooth_sigma = to_double(key, v);
    } else if (key == "flow.intensity_scale") {
        flow.intensity_scale = to_double(key, v);
    } else if (key == "audio.order") {
        beamformer.order = to_int(key, v);
    } else if (key == "audio.regularization") {
        beamformer.regularization = to_double(key, v);
    } else if (key == "audio.f_lo") {
        beamformer.f_lo = to_double(key, v);
    } else if (key == "audio.f_hi") {
        beamformer.f_hi = to_double(key, v);
    } else if (key == "audio.speed_of_sound") {
        beamformer.speed_of_sound = to_double(key, v);
    } else if (key == "audio.sphere_model") {
        if (v == "open") beamformer.model = SphereModel::Open;
        else if (v == "rigid") beamformer.model = SphereModel::Rigid;
        else throw ConfigError("audio.sphere_model must be open or rigid");
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

PipelineConfig PipelineConfig::parse(const std::string& text) {
    PipelineConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        c.set(line.substr(0, eq), line.substr(eq + 1));
    }
    c.validate();
    return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void PipelineConfig::validate() const {
    if (maps.empty()) throw ConfigError("no saliency maps requested");
    if (!(threshold > 0 && threshold < 1)) throw ConfigError("threshold must lie in (0, 1)");
    if (connectivity != 4 && connectivity != 8) throw ConfigError("connectivity must be 4 or 8");
    for (double w : {vsm_weights.intensity, vsm_weights.color, vsm_weights.orientation, vsm_weights.motion})
        if (!(w >= 0)) throw ConfigError("vsm weights must be non-negative");
    const auto& a = avsm1_weights;
    for (double w : {a.intensity, a.color, a.orientation, a.motion, a.audio})
        if (!(w >= 0)) throw ConfigError("avsm1 weights must be non-negative");
    if (std::abs(a.intensity + a.color + a.orientation + a.motion + a.audio - 1.0) > 1e-9)
        throw ConfigError("avsm1 weights must sum to 1");
    if (!(proto.itti.range > 0) || !(proto.itti.peak_fraction >= 0 && proto.itti.peak_fraction < 1))
        throw ConfigError("invalid itti parameters");
    if (!(proto.bo_offset > 0)) throw ConfigError("proto.bo_offset must be positive");
    if (!(proto.gabor.wavelength > 0) || !(proto.gabor.sigma > 0) || !(proto.gabor.aspect > 0))
        throw ConfigError("gabor parameters must be positive");
    if (!(luminance_gate >= 0)) throw ConfigError("color.luminance_gate must be >= 0");
    if (!(flow.alpha > 0) || flow.iterations < 1 || flow.levels < 1) throw ConfigError("invalid flow parameters");
}

bool PipelineConfig::needs_visual() const {
    return std::any_of(maps.begin(), maps.end(), [](MapKind k) { return k != MapKind::ASM; });
}

bool PipelineConfig::needs_audio() const {
    return std::any_of(maps.begin(), maps.end(), [](MapKind k) { return k != MapKind::VSM; });
}

SaliencyPipeline::SaliencyPipeline(PipelineConfig config, MicArrayGeometry geom, int panorama_width, int panorama_height)
    : config_(std::move(config)),
      width_(panorama_width),
      height_(panorama_height),
      model_(config_.proto),
      flow_(config_.flow),
      beamformer_(std::move(geom), SteeringGrid::standard(), config_.beamformer) {
    config_.validate();
    if (width_ <= 0 || height_ <= 0) throw DataError("zero-size panorama");
    // Fail early when the pyramid cannot be built at this size.
    pyramid_shape(width_, height_, config_.proto.factor);
}

FeatureMap SaliencyPipeline::audio_feature(const AudioFrame& audio) const {
    return beamformer_.beamform(audio, width_, height_).panorama;
}

FrameResult SaliencyPipeline::process(const RgbFrame* frame, const RgbFrame* previous, const AudioFrame* audio) const {
    const bool visual = config_.needs_visual();
    const bool aural = config_.needs_audio();
    if (visual && !frame) throw DataError("visual maps requested without a video frame");
    if (aural && !audio) throw DataError("auditory maps requested without an audio frame");
    const int t = frame ? frame->t : audio->t;
    if (frame && (frame->width() != width_ || frame->height() != height_))
        throw DataError("frame does not match the panorama size");

    auto group = [&](FeatureMap f) {
        f.t = t;
        return model_.group_channel(f);
    };

    ConspicuityBundle bundle;
    bundle.t = t;
    if (visual) {
        ChannelGroupings g;
        FeatureMap intensity = intensity_map(*frame);
        g.intensity = group(intensity);
        auto colors = color_opponency_maps(*frame, config_.luminance_gate);
        for (std::size_t i = 0; i < 4; ++i) g.color[i] = group(colors[i]);
        auto orients = orientation_maps(intensity, model_.gabor());
        for (std::size_t i = 0; i < 4; ++i) g.orientation[i] = group(orients[i]);
        FeatureMap motion = previous ? motion_magnitude(optical_flow(*previous, *frame, flow_))
                                     : zero_feature(width_, height_, Channel::Motion, t);
        g.motion = group(motion);
        g.audio = group(aural ? audio_feature(*audio) : zero_feature(width_, height_, Channel::Audio, t));
        bundle = conspicuity(g, config_.proto.itti);
        bundle.t = t;
    } else {
        GroupingPyramid ga = group(audio_feature(*audio));
        bundle.A = conspicuity_map({&ga}, config_.proto.itti);
    }

    FrameResult result;
    result.t = t;
    auto finish = [&](SaliencyMap m) {
        if (config_.renormalize_maps) m.grid = rescale01(m.grid);
        m.t = t;
        return m;
    };
    std::optional<SaliencyMap> v, a;
    if (visual) v = vsm(bundle, config_.vsm_weights);
    if (aural) a = auditory_saliency(bundle);
    for (MapKind kind : config_.maps) {
        SaliencyMap m;
        switch (kind) {
            case MapKind::VSM: m = *v; break;
            case MapKind::ASM: m = *a; break;
            case MapKind::AVSM1: m = avsm1(bundle, config_.avsm1_weights); break;
            case MapKind::AVSM2: m = avsm2(*v, *a); break;
            case MapKind::AVSM3: m = avsm3(*v, *a); break;
        }
        m = finish(std::move(m));
        auto ev = panorama_events(m, width_, height_, config_.threshold, config_.connectivity);
        result.events.insert(result.events.end(), ev.begin(), ev.end());
        result.maps.push_back(std::move(m));
    }
    return result;
}

std::vector<SalientEvent> panorama_events(const SaliencyMap& map, int width, int height, double threshold,
                                          int connectivity) {
    SaliencyMap full{resize_bilinear(map.grid, width, height), map.kind, map.t};
    return extract_events(full, threshold, connectivity);
}

nlohmann::json RunSummary::to_json() const {
    return {{"frames", frames}, {"events_per_kind", events_per_kind}, {"seconds", seconds}};
}

nlohmann::json event_to_json(const SalientEvent& e) {
    return {{"t", e.t}, {"kind", to_string(e.kind)}, {"centroid", {e.cx, e.cy}}, {"area", e.area}, {"peak", e.peak}};
}

SalientEvent event_from_json(const nlohmann::json& j) {
    SalientEvent e;
    try {
        e.t = j.at("t").get<int>();
        e.kind = parse_map_kind(j.at("kind").get<std::string>());
        e.cx = j.at("centroid").at(0).get<double>();
        e.cy = j.at("centroid").at(1).get<double>();
        e.area = j.value("area", 1);
        e.peak = j.value("peak", 1.0);
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(std::string("malformed event record: ") + ex.what());
    } catch (const ConfigError& ex) {
        throw DataError(std::string("malformed event record: ") + ex.what());
    }
    return e;
}

std::vector<SalientEvent> load_events(const std::filesystem::path& jsonl) {
    std::ifstream in(jsonl);
    if (!in) throw DataError("cannot open events file " + jsonl.string());
    std::vector<SalientEvent> out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        try {
            out.push_back(event_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& ex) {
            throw DataError(std::string("malformed events file: ") + ex.what());
        }
    }
    return out;
}

RunSummary run_pipeline(const DatasetManifest& manifest, const PipelineConfig& config,
                        const std::filesystem::path& out_dir, const std::function<void(int, int)>& progress) {
    const auto start = std::chrono::steady_clock::now();
    config.validate();
    const int video_frames = manifest.count_frames();
    if (video_frames == 0) throw DataError("no frames found at " + manifest.frame_path(0).string());
    WavReader wav(manifest.audio_wav);
    if (wav.channels() != kMicrophones) throw DataError("audio must have 64 channels, got " + std::to_string(wav.channels()));
    const int frames = aligned_frame_count(video_frames, wav.samples(), manifest.fps, wav.sample_rate());
    MicArrayGeometry geom = MicArrayGeometry::load(manifest.geometry, manifest.array_radius);
    SaliencyPipeline pipeline(config, std::move(geom), manifest.width, manifest.height);

    std::filesystem::create_directories(out_dir);
    if (config.write_maps) std::filesystem::create_directories(out_dir / "maps");
    if (config.write_overlays) std::filesystem::create_directories(out_dir / "overlays");
    std::ofstream events(out_dir / "events.jsonl");
    if (!events) throw DataError("cannot write " + (out_dir / "events.jsonl").string());

    RunSummary summary;
    for (MapKind k : config.maps) summary.events_per_kind[to_string(k)] = 0;
    std::optional<RgbFrame> previous;
    for (int t = 0; t < frames; ++t) {
        std::optional<RgbFrame> frame;
        if (config.needs_visual()) frame = load_frame(manifest, t);
        std::optional<AudioFrame> audio;
        if (config.needs_audio()) {
            MultichannelPcm pcm = wav.read(static_cast<std::size_t>(t) * kAudioFrameSamples, kAudioFrameSamples);
            audio = frame_audio(pcm, 0);
            audio->t = t;
        }
        FrameResult r = pipeline.process(frame ? &*frame : nullptr, previous ? &*previous : nullptr,
                                         audio ? &*audio : nullptr);
        for (const SaliencyMap& m : r.maps) {
            const std::string kind = to_string(m.kind);
            if (config.write_maps) write_float_map(out_dir / "maps" / frame_name(kind, t, "f32"), m.grid, t);
            if (config.write_overlays) {
                RgbFrame base = frame ? *frame : RgbFrame::filled(manifest.width, manifest.height, 0, 0, 0, t);
                write_png(out_dir / "overlays" / frame_name(kind, t, "png"), overlay_isocontours(base, m.grid, config.threshold));
            }
        }
        for (const SalientEvent& e : r.events) {
            events << event_to_json(e).dump() << '\n';
            ++summary.events_per_kind[to_string(e.kind)];
        }
        previous = std::move(frame);
        if (progress) progress(t + 1, frames);
    }
    summary.frames = frames;
    summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream(out_dir / "summary.json") << summary.to_json().dump(2) << '\n';
    return summary;
}

int run_beamform(const DatasetManifest& manifest, const PipelineConfig& config, const std::filesystem::path& out_dir) {
    WavReader wav(manifest.audio_wav);
    if (wav.channels() != kMicrophones) throw DataError("audio must have 64 channels, got " + std::to_string(wav.channels()));
    if (wav.sample_rate() != kAudioSampleRate) throw DataError("alignment error: audio must be 44100 Hz");
    MicArrayGeometry geom = MicArrayGeometry::load(manifest.geometry, manifest.array_radius);
    ShBeamformer bf(std::move(geom), SteeringGrid::standard(), config.beamformer);
    std::filesystem::create_directories(out_dir / "maps");
    const int frames = static_cast<int>(wav.samples() / kAudioFrameSamples);
    for (int t = 0; t < frames; ++t) {
        MultichannelPcm pcm = wav.read(static_cast<std::size_t>(t) * kAudioFrameSamples, kAudioFrameSamples);
        AudioFrame f = frame_audio(pcm, 0);
        f.t = t;
        AuditoryMap m = bf.beamform(f, manifest.width, manifest.height);
        write_float_map(out_dir / "maps" / frame_name("audio", t, "f32"), m.panorama.grid, t);
    }
    return frames;
}

nlohmann::json RecallReport::to_json() const {
    nlohmann::json j = {{"match_radius", match_radius}, {"kinds", nlohmann::json::object()}};
    auto counts = [](const RecallCounts& c) {
        return nlohmann::json{{"recall", c.recall()}, {"matched", c.matched}, {"total", c.total}};
    };
    for (const auto& [kind, r] : kinds) {
        nlohmann::json k = {{"overall", counts(r.overall)}, {"detections", r.detections}, {"false_positives", r.false_positives}};
        for (Modality m : {Modality::Visual, Modality::Auditory, Modality::Audiovisual}) {
            auto it = r.per_modality.find(m);
            k[to_string(m)] = counts(it == r.per_modality.end() ? RecallCounts{} : it->second);
        }
        j["kinds"][to_string(kind)] = k;
    }
    return j;
}

RecallReport eval_recall(const std::vector<SalientEvent>& events, const GroundTruth& truth, double match_radius) {
    RecallReport report;
    report.match_radius = match_radius;
    std::vector<MapKind> kinds;
    for (const auto& e : events)
        if (std::find(kinds.begin(), kinds.end(), e.kind) == kinds.end()) kinds.push_back(e.kind);
    std::sort(kinds.begin(), kinds.end());

    auto distance = [&](const TruthEvent& g, const SalientEvent& d) {
        double dx = std::abs(g.cx - d.cx);
        if (truth.width > 0) dx = std::min(dx, truth.width - dx);
        return std::hypot(dx, g.cy - d.cy);
    };

    for (MapKind kind : kinds) {
        KindReport& kr = report.kinds[kind];
        for (Modality m : {Modality::Visual, Modality::Auditory, Modality::Audiovisual}) kr.per_modality[m] = {};
        for (const auto& e : events)
            if (e.kind == kind) ++kr.detections;
        int matched_detections = 0;
        for (std::size_t t = 0; t < truth.frames.size(); ++t) {
            std::vector<const TruthEvent*> gts;
            for (const auto& g : truth.frames[t])
                if (g.active) gts.push_back(&g);
            std::vector<const SalientEvent*> dets;
            for (const auto& e : events)
                if (e.kind == kind && e.t == static_cast<int>(t)) dets.push_back(&e);

            struct Pair {
                double d;
                std::size_t g, e;
            };
            std::vector<Pair> pairs;
            for (std::size_t gi = 0; gi < gts.size(); ++gi)
                for (std::size_t ei = 0; ei < dets.size(); ++ei) {
                    double d = distance(*gts[gi], *dets[ei]);
                    if (d <= match_radius) pairs.push_back({d, gi, ei});
                }
            std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });
            std::vector<char> gused(gts.size(), 0), eused(dets.size(), 0);
            for (const auto& p : pairs) {
                if (gused[p.g] || eused[p.e]) continue;
                gused[p.g] = eused[p.e] = 1;
                ++matched_detections;
            }
            for (std::size_t gi = 0; gi < gts.size(); ++gi) {
                auto& c = kr.per_modality[gts[gi]->modality];
                ++c.total;
                ++kr.overall.total;
                if (gused[gi]) {
                    ++c.matched;
                    ++kr.overall.matched;
                }
            }
        }
        kr.false_positives = kr.detections - matched_detections;
    }
    return report;
}

}  // namespace avsm
