#pragma once

#include "avsm/audio_map.hpp"
#include "avsm/dataset.hpp"
#include "avsm/optical_flow.hpp"
#include "avsm/proto_object.hpp"
#include "avsm/saliency_fusion.hpp"
#include "avsm/synth_scene.hpp"

#include "json.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace avsm {

/// Every tunable of a run. Text form is flat "key = value" lines; '#' starts
/// a comment. See README for the key list.
struct PipelineConfig {
    std::vector<MapKind> maps = {MapKind::VSM, MapKind::ASM, MapKind::AVSM1, MapKind::AVSM2, MapKind::AVSM3};
    double threshold = 0.75;
    int connectivity = 8;
    bool renormalize_maps = true;
    bool write_overlays = true;
    bool write_maps = true;
    VisualWeights vsm_weights;
    AudioVisualWeights avsm1_weights;
    ProtoObjectParams proto;
    double luminance_gate = kColorLuminanceGate;
    HornSchunckParams flow;
    BeamformerParams beamformer;

    /// Applies one key; ConfigError for unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    static PipelineConfig parse(const std::string& text);
    static PipelineConfig load(const std::filesystem::path& path);
    /// Checks weight contracts and parameter ranges; throws ConfigError.
    void validate() const;

    bool needs_visual() const;
    bool needs_audio() const;
};

/// All requested maps of one frame at the common pyramid scale.
struct FrameResult {
    int t = 0;
    std::vector<SaliencyMap> maps;
    std::vector<SalientEvent> events;  // centroids in panorama pixels
};

/// Per-frame computation shared by the CLI and the tests.
class SaliencyPipeline {
public:
    SaliencyPipeline(PipelineConfig config, MicArrayGeometry geom, int panorama_width, int panorama_height);

    /// `previous` supplies motion; pass nullptr for the first frame (zero motion).
    FrameResult process(const RgbFrame* frame, const RgbFrame* previous, const AudioFrame* audio) const;

    /// The audio feature map alone (panorama resolution).
    FeatureMap audio_feature(const AudioFrame& audio) const;

    const PipelineConfig& config() const { return config_; }

private:
    PipelineConfig config_;
    int width_;
    int height_;
    ProtoObjectModel model_;
    HornSchunck flow_;
    ShBeamformer beamformer_;
};

/// Events of one map, measured on the map resampled to panorama resolution.
std::vector<SalientEvent> panorama_events(const SaliencyMap& map, int width, int height, double threshold,
                                          int connectivity);

struct RunSummary {
    int frames = 0;
    std::map<std::string, int> events_per_kind;
    double seconds = 0;
    nlohmann::json to_json() const;
};

/// Processes every aligned frame of the dataset. Writes maps/<kind>_<t>.f32,
/// overlays/<kind>_<t>.png, events.jsonl and summary.json under out_dir.
RunSummary run_pipeline(const DatasetManifest& manifest, const PipelineConfig& config,
                        const std::filesystem::path& out_dir,
                        const std::function<void(int, int)>& progress = {});

/// Beamform every audio frame; writes maps/audio_<t>.f32 at panorama size.
int run_beamform(const DatasetManifest& manifest, const PipelineConfig& config, const std::filesystem::path& out_dir);

nlohmann::json event_to_json(const SalientEvent& e);
SalientEvent event_from_json(const nlohmann::json& j);
std::vector<SalientEvent> load_events(const std::filesystem::path& jsonl);

struct RecallCounts {
    int matched = 0;
    int total = 0;
    double recall() const { return total > 0 ? static_cast<double>(matched) / total : 0.0; }
};

struct KindReport {
    RecallCounts overall;
    std::map<Modality, RecallCounts> per_modality;
    int detections = 0;
    int false_positives = 0;
};

struct RecallReport {
    double match_radius = 10;
    std::map<MapKind, KindReport> kinds;
    nlohmann::json to_json() const;
};

/// Greedy nearest-first matching per frame (each truth and detection used
/// once), distances wrap around in azimuth.
RecallReport eval_recall(const std::vector<SalientEvent>& events, const GroundTruth& truth, double match_radius = 10.0);

}  // namespace avsm
