// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#include "segtcn/train.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>

#include "json.hpp"

#include "segtcn/checkpoint.hpp"
#include "segtcn/heatmap.hpp"
#include "segtcn/losses.hpp"
#include "segtcn/metrics.hpp"
#include "segtcn/optim.hpp"
#include "segtcn/parallel.hpp"
#include "segtcn/perturb.hpp"
#include "segtcn/rng.hpp"

namespace segtcn {

using nlohmann::json;

const char* feature_source_name(FeatureSource s) {
    return s == FeatureSource::builtin ? "builtin" : "file";
}

FeatureSource parse_feature_source(const std::string& name) {
    if (name == "builtin") return FeatureSource::builtin;
    if (name == "file") return FeatureSource::file;
    throw ValidationError("unknown feature source: " + name);
}

FeatureTrack builtin_features(const SkeletonSequence& seq, const RunConfig& cfg) {
    const HeatmapClip clip = rasterize_pipeline(seq, cfg.raster, HeatmapMode::combined);
    return pooled_encoder(clip, cfg.encoder_grid);
}

std::vector<LoadedSequence> load_split(const DatasetManifest& manifest,
                                       const ClassMap& classes, const RunConfig& cfg,
                                       const std::string& split, bool want_builtin,
                                       bool want_aux) {
    validate_run_config(cfg);
    const auto entries = manifest.split(split);
    std::vector<LoadedSequence> out;
    out.reserve(entries.size());
    for (const ManifestEntry* e : entries) {
        LoadedSequence seq;
        seq.id = e->id;
        const SkeletonSequence skel = load_skeleton_sequence(manifest.resolve(e->skeleton));
        const LabelTrack track = load_label_track(manifest.resolve(e->labels), classes);
        seq.labels = track.labels;
        if (track.frame_count() != skel.frame_count())
            throw ValidationError("sequence " + e->id + ": label track has " +
                                  std::to_string(track.frame_count()) + " frames, skeleton " +
                                  std::to_string(skel.frame_count()));
        if (want_builtin) seq.heat = builtin_features(skel, cfg);
        if (want_aux) {
            if (e->features.empty())
                throw ValidationError("missing auxiliary features for sequence " + e->id);
            seq.aux = load_feature_track(manifest.resolve(e->features));
            if (seq.aux.frame_count() != skel.frame_count())
                throw ValidationError("sequence " + e->id + ": feature track has " +
                                      std::to_string(seq.aux.frame_count()) +
                                      " frames, skeleton " +
                                      std::to_string(skel.frame_count()));
        }
        out.push_back(std::move(seq));
    }
    for (const LoadedSequence& s : out) {
        if (want_aux && s.aux.dim != out.front().aux.dim)
            throw ValidationError("sequence " + s.id + ": feature dim " +
                                  std::to_string(s.aux.dim) + " differs from " +
                                  std::to_string(out.front().aux.dim));
    }
    return out;
}

namespace {

// Feature tracks are frame-major on disk; tensors are channel-major.
Tensor<float>* feature_input(Tape<float>& tape, const FeatureTrack& f) {
    const int frames = f.frame_count();
    std::vector<float> buf(f.values.size());
    for (int d = 0; d < f.dim; ++d)
        for (int m = 0; m < frames; ++m)
            buf[static_cast<std::size_t>(d) * frames + m] =
                f.values[static_cast<std::size_t>(m) * f.dim + d];
    return tape.input(f.dim, frames, buf.data());
}

std::vector<std::vector<float>> snapshot_values(const ParamStore<float>& store) {
    std::vector<std::vector<float>> snap;
    snap.reserve(store.all().size());
    for (const Param<float>* p : store.all()) snap.push_back(p->values);
    return snap;
}

void restore_values(ParamStore<float>& store, const std::vector<std::vector<float>>& snap) {
    const auto& params = store.all();
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->values = snap[i];
}

using ForwardFn = std::function<std::vector<Tensor<float>*>(Tape<float>&, std::size_t)>;

// Serial epoch loop, one sequence per Adam step. Leaves the store at the
// final weights and returns the best-loss snapshot through best_snap.
TrainSummary run_epochs(ParamStore<float>& store, const TrainConfig& tc, double lr,
                        int epochs, const LossConfig& loss_cfg,
                        const std::vector<LoadedSequence>& data, const ForwardFn& fwd,
                        Rng& shuffle_rng, std::ostream* log, const std::string& tag,
                        std::vector<std::vector<float>>& best_snap) {
    Adam<float> opt(store.all(), static_cast<float>(lr), static_cast<float>(tc.beta1),
                    static_cast<float>(tc.beta2), static_cast<float>(tc.eps));
    TrainSummary summary;
    summary.best_loss = std::numeric_limits<double>::infinity();
    best_snap = snapshot_values(store);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        shuffle(order, shuffle_rng);
        double sum = 0.0;
        for (std::size_t idx : order) {
            Tape<float> tape;
            const std::vector<Tensor<float>*> tracks = fwd(tape, idx);
            const TotalLoss<float> tl = total_loss(tracks, data[idx].labels, loss_cfg);
            if (!std::isfinite(tl.total))
                throw RuntimeError("non-finite loss at epoch " + std::to_string(epoch) +
                                   " sequence " + data[idx].id);
            store.zero_grad();
            tape.backward();
            opt.step();
            sum += static_cast<double>(tl.total);
        }
        const double mean = sum / static_cast<double>(data.size());
        summary.epochs.push_back({epoch, mean});
        summary.final_loss = mean;
        if (mean < summary.best_loss) {
            summary.best_loss = mean;
            summary.best_epoch = epoch;
            best_snap = snapshot_values(store);
        }
        if (log)
            *log << "epoch " << epoch << " [" << tag << "] loss " << mean << "\n";
    }
    if (epochs == 0) summary.best_loss = 0.0;
    return summary;
}

} // namespace

TrainSummary train_single(const DatasetManifest& manifest, const ClassMap& classes,
                          const RunConfig& cfg, FeatureSource source, std::uint64_t seed,
                          const std::string& out_path, std::ostream* log) {
    const bool builtin = source == FeatureSource::builtin;
    const std::vector<LoadedSequence> data =
        load_split(manifest, classes, cfg, "train", builtin, !builtin);
    if (data.empty()) throw ValidationError("train split is empty");
    const auto& track_of = [&](std::size_t i) -> const FeatureTrack& {
        return builtin ? data[i].heat : data[i].aux;
    };

    ModelConfig mc = cfg.model;
    mc.input_dim = track_of(0).dim;
    mc.num_classes = classes.class_count();
    SegModel<float> model(mc);
    Rng init_rng(derive_seed(seed, 0));
    model.init(init_rng);
    Rng drop_rng(derive_seed(seed, 1));
    Rng shuffle_rng(derive_seed(seed, 2));

    const ForwardFn fwd = [&](Tape<float>& tape, std::size_t i) {
        return model.forward(tape, feature_input(tape, track_of(i)), true, &drop_rng);
    };
    std::vector<std::vector<float>> best;
    TrainSummary summary = run_epochs(model.params(), cfg.train, cfg.train.lr,
                                      cfg.train.epochs, cfg.loss, data, fwd, shuffle_rng,
                                      log, "single", best);
    save_checkpoint(out_path, model);
    const auto final_values = snapshot_values(model.params());
    restore_values(model.params(), best);
    save_checkpoint(out_path + ".best", model);
    restore_values(model.params(), final_values);
    return summary;
}

FusedTrainSummary train_fused(const DatasetManifest& manifest, const ClassMap& classes,
                              const RunConfig& cfg, std::uint64_t seed,
                              const std::string& out_path, std::ostream* log) {
    const std::vector<LoadedSequence> data =
        load_split(manifest, classes, cfg, "train", true, true);
    if (data.empty()) throw ValidationError("train split is empty");
    const int num_classes = classes.class_count();

    FusedTrainSummary summary;
    std::vector<std::vector<float>> best;

    // Stage i: the two branches train independently with the same losses.
    ModelConfig mc = cfg.model;
    mc.input_dim = data[0].heat.dim;
    mc.num_classes = num_classes;
    SegModel<float> heat(mc);
    {
        Rng init_rng(derive_seed(seed, 10));
        heat.init(init_rng);
        Rng drop_rng(derive_seed(seed, 11));
        Rng shuffle_rng(derive_seed(seed, 12));
        const ForwardFn fwd = [&](Tape<float>& tape, std::size_t i) {
            return heat.forward(tape, feature_input(tape, data[i].heat), true, &drop_rng);
        };
        summary.heat = run_epochs(heat.params(), cfg.train, cfg.train.lr, cfg.train.epochs,
                                  cfg.loss, data, fwd, shuffle_rng, log, "heat", best);
    }
    mc.input_dim = data[0].aux.dim;
    SegModel<float> aux(mc);
    {
        Rng init_rng(derive_seed(seed, 20));
        aux.init(init_rng);
        Rng drop_rng(derive_seed(seed, 21));
        Rng shuffle_rng(derive_seed(seed, 22));
        const ForwardFn fwd = [&](Tape<float>& tape, std::size_t i) {
            return aux.forward(tape, feature_input(tape, data[i].aux), true, &drop_rng);
        };
        summary.aux = run_epochs(aux.params(), cfg.train, cfg.train.lr, cfg.train.epochs,
                                 cfg.loss, data, fwd, shuffle_rng, log, "aux", best);
    }

    // Stage ii: fusion model seeded from the branch weights.
    FusionConfig fc;
    fc.arch = cfg.model;
    fc.arch.num_classes = num_classes;
    fc.arch.input_dim = data[0].heat.dim;
    fc.heat_input_dim = data[0].heat.dim;
    fc.aux_input_dim = data[0].aux.dim;
    fc.mode = cfg.fusion_mode;
    fc.supervise_branches = cfg.supervise_branches;
    FusionModel<float> fused(fc);
    fused.init_from_branches(heat, aux);
    {
        // Step-0 identity: before any stage-ii update the fused graph must
        // reproduce the branch predictions it was initialized from. The
        // prediction stages are verbatim copies in either mode; without the
        // recurrent coupling every stage is.
        Tape<float> tf, th, ta;
        const auto f = fused.forward(tf, feature_input(tf, data[0].heat),
                                     feature_input(tf, data[0].aux));
        const auto yh = heat.forward(th, feature_input(th, data[0].heat));
        const auto ya = aux.forward(ta, feature_input(ta, data[0].aux));
        const std::size_t stages =
            fc.mode == FusionMode::supervision_only ? f.heat.size() : 1;
        for (std::size_t s = 0; s < stages; ++s)
            if (f.heat[s]->values != yh[s]->values || f.aux[s]->values != ya[s]->values)
                throw RuntimeError("stage-ii step-0 identity check failed at stage " +
                                   std::to_string(s));
        if (log) *log << "stage-ii step-0 identity check passed\n";
    }
    {
        Rng drop_rng(derive_seed(seed, 30));
        Rng shuffle_rng(derive_seed(seed, 31));
        const ForwardFn fwd = [&](Tape<float>& tape, std::size_t i) {
            auto f = fused.forward(tape, feature_input(tape, data[i].heat),
                                   feature_input(tape, data[i].aux), true, &drop_rng);
            std::vector<Tensor<float>*> tracks = f.fused;
            if (fc.supervise_branches) {
                tracks.insert(tracks.end(), f.heat.begin(), f.heat.end());
                tracks.insert(tracks.end(), f.aux.begin(), f.aux.end());
            }
            return tracks;
        };
        summary.fused = run_epochs(fused.params(), cfg.train, cfg.train.lr_stage2,
                                   cfg.train.epochs_stage2, cfg.loss, data, fwd,
                                   shuffle_rng, log, "fused", best);
    }
    save_checkpoint(out_path, fused);
    const auto final_values = snapshot_values(fused.params());
    restore_values(fused.params(), best);
    save_checkpoint(out_path + ".best", fused);
    restore_values(fused.params(), final_values);
    return summary;
}

namespace {

MetricStat stat_of(const std::vector<double>& xs) {
    MetricStat s;
    const double n = static_cast<double>(xs.size());
    for (double x : xs) s.mean += x;
    s.mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(var / n);
    return s;
}

} // namespace

EvalReport evaluate(const std::string& checkpoint_path, const DatasetManifest& manifest,
                    const ClassMap& classes, const RunConfig& cfg,
                    const EvalOptions& opts) {
    validate_run_config(cfg);
    if (opts.drop_p < 0.0 || opts.drop_p > 1.0)
        throw ValidationError("drop probability must lie in [0, 1]");
    const CheckpointKind kind = checkpoint_kind(checkpoint_path);
    std::optional<SegModel<float>> single;
    std::optional<FusionModel<float>> fused;
    if (kind == CheckpointKind::single)
        single.emplace(load_single_checkpoint(checkpoint_path));
    else
        fused.emplace(load_fused_checkpoint(checkpoint_path));

    const bool file_features =
        kind == CheckpointKind::single && opts.features == FeatureSource::file;
    if (opts.drop_p > 0.0 && file_features)
        throw ValidationError("limb dropout needs the builtin feature pathway");

    const auto entries = manifest.split(opts.split);
    if (entries.empty())
        throw ValidationError("split \"" + opts.split + "\" is empty");

    EvalReport report;
    report.split = opts.split;
    report.drop_p = opts.drop_p;
    report.sequences.resize(entries.size());

    parallel_for(entries.size(), [&](std::size_t i) {
        const ManifestEntry* e = entries[i];
        const LabelTrack track = load_label_track(manifest.resolve(e->labels), classes);

        FeatureTrack heat_feat, aux_feat;
        if (!file_features || kind == CheckpointKind::fused) {
            SkeletonSequence skel = load_skeleton_sequence(manifest.resolve(e->skeleton));
            if (opts.drop_p > 0.0)
                skel = drop_limbs(skel, opts.drop_p, derive_seed(opts.seed, i));
            heat_feat = builtin_features(skel, cfg);
        }
        if (file_features || kind == CheckpointKind::fused) {
            if (e->features.empty())
                throw ValidationError("missing auxiliary features for sequence " + e->id);
            aux_feat = load_feature_track(manifest.resolve(e->features));
        }

        const FeatureTrack& primary = file_features ? aux_feat : heat_feat;
        if (track.frame_count() != primary.frame_count())
            throw ValidationError("sequence " + e->id + ": label track has " +
                                  std::to_string(track.frame_count()) +
                                  " frames, features " +
                                  std::to_string(primary.frame_count()));

        Tape<float> tape;
        Tensor<float>* probs = nullptr;
        if (kind == CheckpointKind::single) {
            if (primary.dim != single->config().input_dim)
                throw RuntimeError("checkpoint expects input dim " +
                                   std::to_string(single->config().input_dim) +
                                   ", features of sequence " + e->id + " have " +
                                   std::to_string(primary.dim));
            probs = single->forward(tape, feature_input(tape, primary)).back();
        } else {
            if (aux_feat.frame_count() != heat_feat.frame_count())
                throw ValidationError("sequence " + e->id +
                                      ": auxiliary and builtin feature lengths differ");
            if (heat_feat.dim != fused->config().heat_input_dim ||
                aux_feat.dim != fused->config().aux_input_dim)
                throw RuntimeError(
                    "checkpoint expects input dims " +
                    std::to_string(fused->config().heat_input_dim) + "/" +
                    std::to_string(fused->config().aux_input_dim) + ", sequence " + e->id +
                    " has " + std::to_string(heat_feat.dim) + "/" +
                    std::to_string(aux_feat.dim));
            probs = fused
                        ->forward(tape, feature_input(tape, heat_feat),
                                  feature_input(tape, aux_feat))
                        .fused.back();
        }

        SequenceEval& out = report.sequences[i];
        out.id = e->id;
        out.frames = track.frame_count();
        out.truth = track.labels;
        out.pred = predict_labels(probs);
        out.accuracy = framewise_accuracy(out.pred, out.truth);
        out.edit = edit_score(out.pred, out.truth);
        out.f1_10 = f1_at_overlap(out.pred, out.truth, 0.10);
        out.map = framewise_map(*probs, out.truth);
    });

    std::vector<double> acc, edit, f1, map;
    for (const SequenceEval& s : report.sequences) {
        acc.push_back(s.accuracy);
        edit.push_back(s.edit);
        f1.push_back(s.f1_10);
        map.push_back(s.map);
    }
    report.accuracy = stat_of(acc);
    report.edit = stat_of(edit);
    report.f1_10 = stat_of(f1);
    report.map = stat_of(map);
    return report;
}

std::string eval_report_json(const EvalReport& report) {
    json j;
    j["split"] = report.split;
    j["drop_p"] = report.drop_p;
    j["count"] = report.sequences.size();
    const auto stat = [](const MetricStat& s) {
        return json{{"mean", s.mean}, {"std", s.stddev}};
    };
    j["metrics"] = {{"accuracy", stat(report.accuracy)},
                    {"edit", stat(report.edit)},
                    {"f1_10", stat(report.f1_10)},
                    {"map", stat(report.map)}};
    json seqs = json::array();
    for (const SequenceEval& s : report.sequences)
        seqs.push_back({{"id", s.id},
                        {"frames", s.frames},
                        {"accuracy", s.accuracy},
                        {"edit", s.edit},
                        {"f1_10", s.f1_10},
                        {"map", s.map}});
    j["sequences"] = std::move(seqs);
    return j.dump(2) + "\n";
}

void save_eval_report(const std::string& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw RuntimeError("cannot write report: " + path);
    out << eval_report_json(report);
    if (!out) throw RuntimeError("failed writing report: " + path);
}

} // namespace segtcn
