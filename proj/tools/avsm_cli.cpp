#include "avsm/contour.hpp"
#include "avsm/error.hpp"
#include "avsm/image_io.hpp"
#include "avsm/pipeline.hpp"
#include "avsm/synth_scene.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct PipelineFlags {
    std::string manifest;
    std::string config;
    std::string maps;
    std::optional<double> threshold;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    bool quiet = false;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
    cmd->add_option("--manifest", f.manifest, "dataset manifest (JSON)")->required();
    cmd->add_option("--config", f.config, "key = value config file");
    cmd->add_option("--maps", f.maps, "comma-separated subset of vsm,asm,avsm1,avsm2,avsm3");
    cmd->add_option("--threshold", f.threshold, "event threshold in (0, 1)");
    cmd->add_option("--out-dir", f.out_dir, "output directory");
    cmd->add_option("--set", f.overrides, "extra key=value config entries");
    cmd->add_flag("--quiet", f.quiet, "no progress output");
}

avsm::PipelineConfig build_config(const PipelineFlags& f) {
    avsm::PipelineConfig c = f.config.empty() ? avsm::PipelineConfig{} : avsm::PipelineConfig::load(f.config);
    for (const auto& kv : f.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw avsm::ConfigError("--set expects key=value, got '" + kv + "'");
        c.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!f.maps.empty()) c.set("maps", f.maps);
    if (f.threshold) c.threshold = *f.threshold;
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Audiovisual proto-object saliency maps"};
    app.require_subcommand(1);

    PipelineFlags sal;
    auto* saliency = app.add_subcommand("saliency", "compute saliency maps, overlays and events");
    add_pipeline_flags(saliency, sal);

    PipelineFlags beam;
    auto* beamform = app.add_subcommand("beamform", "audio maps only");
    add_pipeline_flags(beamform, beam);

    std::string scene_path, synth_out = "synth", geometry_path;
    std::optional<std::uint64_t> seed;
    auto* synth = app.add_subcommand("synth", "render a scripted scene into a dataset");
    synth->add_option("--scene", scene_path, "scene script (JSON)")->required();
    synth->add_option("--out-dir", synth_out, "dataset directory");
    synth->add_option("--seed", seed, "overrides the script seed");
    synth->add_option("--geometry", geometry_path, "microphone geometry file (default: 64-point Fibonacci sphere)");

    std::string events_path, truth_path, report_path;
    double radius = 10.0;
    auto* eval = app.add_subcommand("eval", "recall report of events against ground truth");
    eval->add_option("--events", events_path, "events.jsonl")->required();
    eval->add_option("--ground-truth", truth_path, "ground_truth.json")->required();
    eval->add_option("--radius", radius, "match radius in panorama pixels");
    eval->add_option("--out", report_path, "write the report here instead of stdout");

    std::string frame_path, map_path, overlay_out;
    double overlay_threshold = 0.75;
    auto* overlay = app.add_subcommand("overlay", "draw threshold isocontours of a float map over a frame");
    overlay->add_option("--frame", frame_path, "PNG/PPM frame")->required();
    overlay->add_option("--map", map_path, "float map (.f32)")->required();
    overlay->add_option("--threshold", overlay_threshold, "contour level");
    overlay->add_option("--out", overlay_out, "output PNG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (saliency->parsed()) {
            auto config = build_config(sal);
            auto manifest = avsm::DatasetManifest::load(sal.manifest);
            auto progress = [&](int done, int total) {
                if (!sal.quiet) std::cerr << "\rframe " << done << "/" << total << std::flush;
            };
            auto summary = avsm::run_pipeline(manifest, config, sal.out_dir, progress);
            if (!sal.quiet) std::cerr << '\n';
            std::cout << summary.to_json().dump(2) << '\n';
        } else if (beamform->parsed()) {
            auto config = build_config(beam);
            auto manifest = avsm::DatasetManifest::load(beam.manifest);
            int n = avsm::run_beamform(manifest, config, beam.out_dir);
            std::cout << "wrote " << n << " audio maps to " << (std::filesystem::path(beam.out_dir) / "maps").string() << '\n';
        } else if (synth->parsed()) {
            auto script = avsm::SceneScript::load(scene_path);
            if (seed) script.seed = *seed;
            auto geom = geometry_path.empty() ? avsm::MicArrayGeometry::fibonacci()
                                              : avsm::MicArrayGeometry::load(geometry_path);
            avsm::write_dataset(script, geom, synth_out);
            std::cout << "wrote " << script.frame_count() << " frames to " << synth_out << '\n';
        } else if (eval->parsed()) {
            if (!(radius > 0)) throw avsm::ConfigError("--radius must be positive");
            auto events = avsm::load_events(events_path);
            auto truth = avsm::GroundTruth::load(truth_path);
            auto report = avsm::eval_recall(events, truth, radius).to_json().dump(2);
            if (report_path.empty()) {
                std::cout << report << '\n';
            } else {
                std::ofstream out(report_path);
                if (!out) throw avsm::DataError("cannot write " + report_path);
                out << report << '\n';
            }
        } else if (overlay->parsed()) {
            auto frame = avsm::read_image(frame_path);
            auto map = avsm::read_float_map(map_path);
            avsm::write_png(overlay_out, avsm::overlay_isocontours(frame, map.grid, overlay_threshold));
        }
    } catch (const avsm::ConfigError& e) {
        std::cerr << "avsm: " << e.what() << '\n';
        return kExitUsage;
    } catch (const avsm::DataError& e) {
        std::cerr << "avsm: " << e.what() << '\n';
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "avsm: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
