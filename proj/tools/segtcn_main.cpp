// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// segtcn command line: synth, rasterize, encode, train, eval, perturb,
// report. Success output is JSON on stdout; errors are one-line JSON on
// stderr with exit 1 (validation) or 2 (runtime).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "segtcn/checkpoint.hpp"
#include "segtcn/config.hpp"
#include "segtcn/error.hpp"
#include "segtcn/heatmap.hpp"
#include "segtcn/parallel.hpp"
#include "segtcn/perturb.hpp"
#include "segtcn/svg.hpp"
#include "segtcn/synth.hpp"
#include "segtcn/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void emit_error(const char* kind, const std::string& message) {
    json j;
    j["error"] = kind;
    j["message"] = message;
    std::cerr << j.dump() << "\n";
}

segtcn::RunConfig config_from(const std::string& path) {
    if (path.empty()) return segtcn::default_run_config();
    return segtcn::load_run_config(path);
}

// Convention: classmap.txt next to the manifest unless overridden.
segtcn::ClassMap class_map_for(const segtcn::DatasetManifest& manifest,
                               const std::string& override_path) {
    if (!override_path.empty()) return segtcn::load_class_map(override_path);
    return segtcn::load_class_map(
        (fs::path(manifest.base_dir) / "classmap.txt").string());
}

struct ClipJob {
    std::string id;
    std::string skeleton_path;
    std::string out_path;
};

// Shared by rasterize and encode: either one skeleton file or every
// manifest entry.
std::vector<ClipJob> clip_jobs(const std::string& skeleton, const std::string& manifest,
                               const std::string& out, const char* suffix) {
    if (skeleton.empty() == manifest.empty())
        throw segtcn::ValidationError("give exactly one of --skeleton or --manifest");
    std::vector<ClipJob> jobs;
    if (!skeleton.empty()) {
        jobs.push_back({fs::path(skeleton).stem().string(), skeleton, out});
        return jobs;
    }
    const segtcn::DatasetManifest m = segtcn::load_manifest(manifest);
    fs::create_directories(out);
    for (const segtcn::ManifestEntry& e : m.entries)
        jobs.push_back({e.id, m.resolve(e.skeleton),
                        (fs::path(out) / (e.id + suffix)).string()});
    return jobs;
}

int run(int argc, char** argv) {
    CLI::App app{"skeleton heatmap action segmentation toolkit"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic puppet dataset");
    segtcn::SynthConfig scfg;
    std::string synth_out;
    synth->add_option("--videos", scfg.num_videos, "number of videos")
        ->capture_default_str();
    synth->add_option("--classes", scfg.num_classes, "number of action classes")
        ->capture_default_str();
    synth->add_option("--segments", scfg.segments_per_video, "segments per video")
        ->capture_default_str();
    synth->add_option("--min-frames", scfg.min_segment_frames, "min frames per segment")
        ->capture_default_str();
    synth->add_option("--max-frames", scfg.max_segment_frames, "max frames per segment")
        ->capture_default_str();
    synth->add_option("--width", scfg.width, "canvas width")->capture_default_str();
    synth->add_option("--height", scfg.height, "canvas height")->capture_default_str();
    synth->add_option("--noise-sigma", scfg.noise_sigma, "coordinate noise, px")
        ->capture_default_str();
    synth->add_option("--seed", scfg.seed, "rng seed")->capture_default_str();
    synth->add_option("--out", synth_out, "output directory")->required();

    // rasterize
    auto* rasterize = app.add_subcommand("rasterize", "render heatmap clips");
    std::string r_skeleton, r_manifest, r_out, r_config, r_mode = "joint+limb";
    rasterize->add_option("--skeleton", r_skeleton, "one skeleton file");
    rasterize->add_option("--manifest", r_manifest, "process every manifest entry");
    rasterize->add_option("--heatmap", r_mode, "joint, limb, or joint+limb")
        ->capture_default_str();
    rasterize->add_option("--config", r_config, "run config JSON");
    rasterize->add_option("--out", r_out, "output file (or directory with --manifest)")
        ->required();

    // encode
    auto* encode = app.add_subcommand("encode", "pooled features from heatmaps");
    std::string e_skeleton, e_manifest, e_out, e_config, e_mode = "joint+limb";
    int e_grid = 0;
    encode->add_option("--skeleton", e_skeleton, "one skeleton file");
    encode->add_option("--manifest", e_manifest, "process every manifest entry");
    encode->add_option("--heatmap", e_mode, "joint, limb, or joint+limb")
        ->capture_default_str();
    encode->add_option("--grid", e_grid, "pooling grid (default: config encoder grid)");
    encode->add_option("--config", e_config, "run config JSON");
    encode->add_option("--out", e_out, "output file (or directory with --manifest)")
        ->required();

    // train
    auto* train = app.add_subcommand("train", "train a model");
    std::string t_manifest, t_config, t_out = "model.ckpt", t_features = "builtin";
    std::string t_class_map;
    std::uint64_t t_seed = 0;
    bool t_fusion = false;
    train->add_option("--manifest", t_manifest, "dataset manifest")->required();
    train->add_option("--config", t_config, "run config JSON");
    train->add_option("--seed", t_seed, "rng seed")->capture_default_str();
    train->add_option("--out", t_out, "checkpoint path")->capture_default_str();
    train->add_option("--features", t_features, "builtin or file")->capture_default_str();
    train->add_flag("--fusion", t_fusion, "two-stage fusion training");
    train->add_option("--class-map", t_class_map, "class map override");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    std::string v_manifest, v_config, v_checkpoint, v_out, v_svg, v_split = "test";
    std::string v_features = "builtin", v_class_map;
    double v_drop_p = 0.0;
    std::uint64_t v_seed = 0;
    eval->add_option("--manifest", v_manifest, "dataset manifest")->required();
    eval->add_option("--checkpoint", v_checkpoint, "checkpoint path")->required();
    eval->add_option("--config", v_config, "run config JSON");
    eval->add_option("--split", v_split, "manifest split")->capture_default_str();
    eval->add_option("--drop-p", v_drop_p, "limb dropout probability")
        ->capture_default_str();
    eval->add_option("--seed", v_seed, "dropout rng seed")->capture_default_str();
    eval->add_option("--features", v_features, "builtin or file (single checkpoints)")
        ->capture_default_str();
    eval->add_option("--out", v_out, "write the JSON report here too");
    eval->add_option("--svg", v_svg, "write truth/prediction timelines");
    eval->add_option("--class-map", v_class_map, "class map override");

    // perturb
    auto* perturb = app.add_subcommand("perturb", "apply limb dropout to a skeleton file");
    std::string p_skeleton, p_out;
    double p_p = 0.0;
    std::uint64_t p_seed = 0;
    perturb->add_option("--skeleton", p_skeleton, "skeleton file")->required();
    perturb->add_option("--p", p_p, "drop probability")->required();
    perturb->add_option("--seed", p_seed, "rng seed")->capture_default_str();
    perturb->add_option("--out", p_out, "output path (default: rewrite input)");

    // report
    auto* report = app.add_subcommand("report", "compare two evaluation reports");
    std::vector<std::string> c_paths;
    report->add_option("--compare", c_paths, "two report files")->expected(2)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help to stdout, exit 0
    } catch (const CLI::ParseError& e) {
        emit_error("validation", e.what());
        return 1;
    }

    if (synth->parsed()) {
        const segtcn::SynthSummary s = segtcn::generate_dataset(scfg, synth_out);
        json j;
        j["manifest"] = s.manifest_path;
        j["class_map"] = s.class_map_path;
        j["videos"] = s.video_ids;
        j["frames"] = s.frame_counts;
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (rasterize->parsed()) {
        const segtcn::RunConfig cfg = config_from(r_config);
        segtcn::validate_run_config(cfg);
        const segtcn::HeatmapMode mode = segtcn::parse_heatmap_mode(r_mode);
        const std::vector<ClipJob> jobs = clip_jobs(r_skeleton, r_manifest, r_out, ".hmap");
        segtcn::parallel_for(jobs.size(), [&](std::size_t i) {
            const segtcn::SkeletonSequence seq =
                segtcn::load_skeleton_sequence(jobs[i].skeleton_path);
            segtcn::save_hmap(jobs[i].out_path,
                              segtcn::rasterize_pipeline(seq, cfg.raster, mode));
        });
        json j;
        for (const ClipJob& job : jobs) j["outputs"].push_back(job.out_path);
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (encode->parsed()) {
        const segtcn::RunConfig cfg = config_from(e_config);
        segtcn::validate_run_config(cfg);
        const segtcn::HeatmapMode mode = segtcn::parse_heatmap_mode(e_mode);
        const int grid = e_grid > 0 ? e_grid : cfg.encoder_grid;
        const std::vector<ClipJob> jobs = clip_jobs(e_skeleton, e_manifest, e_out, ".feat");
        segtcn::parallel_for(jobs.size(), [&](std::size_t i) {
            const segtcn::SkeletonSequence seq =
                segtcn::load_skeleton_sequence(jobs[i].skeleton_path);
            const segtcn::HeatmapClip clip =
                segtcn::rasterize_pipeline(seq, cfg.raster, mode);
            segtcn::save_feature_track(jobs[i].out_path, segtcn::pooled_encoder(clip, grid));
        });
        json j;
        for (const ClipJob& job : jobs) j["outputs"].push_back(job.out_path);
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (train->parsed()) {
        const segtcn::RunConfig cfg = config_from(t_config);
        const segtcn::DatasetManifest manifest = segtcn::load_manifest(t_manifest);
        const segtcn::ClassMap classes = class_map_for(manifest, t_class_map);
        json j;
        j["checkpoint"] = t_out;
        j["best_checkpoint"] = t_out + ".best";
        if (t_fusion) {
            const segtcn::FusedTrainSummary s =
                segtcn::train_fused(manifest, classes, cfg, t_seed, t_out, &std::cerr);
            j["heat_final_loss"] = s.heat.final_loss;
            j["aux_final_loss"] = s.aux.final_loss;
            j["final_loss"] = s.fused.final_loss;
            j["best_loss"] = s.fused.best_loss;
            j["best_epoch"] = s.fused.best_epoch;
        } else {
            const segtcn::TrainSummary s = segtcn::train_single(
                manifest, classes, cfg, segtcn::parse_feature_source(t_features), t_seed,
                t_out, &std::cerr);
            j["final_loss"] = s.final_loss;
            j["best_loss"] = s.best_loss;
            j["best_epoch"] = s.best_epoch;
        }
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (eval->parsed()) {
        const segtcn::RunConfig cfg = config_from(v_config);
        const segtcn::DatasetManifest manifest = segtcn::load_manifest(v_manifest);
        const segtcn::ClassMap classes = class_map_for(manifest, v_class_map);
        segtcn::EvalOptions opts;
        opts.split = v_split;
        opts.drop_p = v_drop_p;
        opts.seed = v_seed;
        opts.features = segtcn::parse_feature_source(v_features);
        const segtcn::EvalReport rep =
            segtcn::evaluate(v_checkpoint, manifest, classes, cfg, opts);
        if (!v_out.empty()) segtcn::save_eval_report(v_out, rep);
        if (!v_svg.empty()) {
            std::vector<segtcn::TimelineRow> rows;
            for (const segtcn::SequenceEval& s : rep.sequences) {
                rows.push_back({s.id + " truth", s.truth});
                rows.push_back({s.id + " pred", s.pred});
            }
            segtcn::write_timeline_svg(v_svg, rows, classes.class_count());
        }
        std::cout << segtcn::eval_report_json(rep);
        return 0;
    }

    if (perturb->parsed()) {
        const segtcn::SkeletonSequence seq = segtcn::load_skeleton_sequence(p_skeleton);
        segtcn::DropStats stats;
        const segtcn::SkeletonSequence out = segtcn::drop_limbs(seq, p_p, p_seed, &stats);
        const std::string out_path = p_out.empty() ? p_skeleton : p_out;
        segtcn::save_skeleton_sequence(out_path, out);
        json j;
        j["output"] = out_path;
        j["frames"] = stats.frames;
        j["dropped"] = stats.dropped;
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (report->parsed()) {
        json reports[2];
        for (int i = 0; i < 2; ++i) {
            std::ifstream in(c_paths[static_cast<std::size_t>(i)]);
            if (!in)
                throw segtcn::ValidationError("cannot open report: " +
                                              c_paths[static_cast<std::size_t>(i)]);
            try {
                in >> reports[i];
            } catch (const json::exception& e) {
                throw segtcn::ValidationError("report is not valid JSON: " +
                                              c_paths[static_cast<std::size_t>(i)] + ": " +
                                              e.what());
            }
            if (!reports[i].contains("metrics"))
                throw segtcn::ValidationError("report lacks a metrics object: " +
                                              c_paths[static_cast<std::size_t>(i)]);
        }
        json j;
        j["a"] = c_paths[0];
        j["b"] = c_paths[1];
        for (const char* metric : {"accuracy", "edit", "f1_10", "map"}) {
            const json& ma = reports[0].at("metrics").at(metric);
            const json& mb = reports[1].at("metrics").at(metric);
            const double a = ma.at("mean").get<double>();
            const double b = mb.at("mean").get<double>();
            j["metrics"][metric] = {{"a", a}, {"b", b}, {"delta", b - a}};
        }
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    throw segtcn::ValidationError("no subcommand given");
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const segtcn::ValidationError& e) {
        emit_error("validation", e.what());
        return 1;
    } catch (const segtcn::RuntimeError& e) {
        emit_error("runtime", e.what());
        return 2;
    } catch (const std::exception& e) {
        emit_error("runtime", e.what());
        return 2;
    }
}
