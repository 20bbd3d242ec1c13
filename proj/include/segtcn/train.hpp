// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training loops (single branch and the two-stage fusion protocol),
// evaluation driver, and the JSON metrics report.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "segtcn/config.hpp"
#include "segtcn/features.hpp"
#include "segtcn/pose.hpp"

namespace segtcn {

enum class FeatureSource { builtin, file };

const char* feature_source_name(FeatureSource s);
FeatureSource parse_feature_source(const std::string& name);

// Pooled-heatmap features: combined joint+limb rasterization followed by
// grid average pooling of channel 0.
FeatureTrack builtin_features(const SkeletonSequence& seq, const RunConfig& cfg);

struct LoadedSequence {
    std::string id;
    std::vector<int> labels;
    FeatureTrack heat; // builtin pooled features (dim 0 when not requested)
    FeatureTrack aux;  // auxiliary features from files (dim 0 when absent)
};

// Loads a manifest split with per-sequence validation (label/feature track
// lengths must match the skeleton frame count, feature dims must agree).
std::vector<LoadedSequence> load_split(const DatasetManifest& manifest,
                                       const ClassMap& classes, const RunConfig& cfg,
                                       const std::string& split, bool want_builtin,
                                       bool want_aux);

struct EpochLog {
    int epoch = 0; // 1-based
    double mean_loss = 0.0;
};

struct TrainSummary {
    double final_loss = 0.0; // mean total loss over the last epoch
    double best_loss = 0.0;
    int best_epoch = 0; // 1-based; 0 when no epochs ran
    std::vector<EpochLog> epochs;
};

struct FusedTrainSummary {
    TrainSummary heat;
    TrainSummary aux;
    TrainSummary fused;
};

// One full sequence per optimizer step, seeded shuffle each epoch. Writes
// the final checkpoint to out_path and the best-train-loss checkpoint to
// out_path + ".best". log may be null.
TrainSummary train_single(const DatasetManifest& manifest, const ClassMap& classes,
                          const RunConfig& cfg, FeatureSource source, std::uint64_t seed,
                          const std::string& out_path, std::ostream* log = nullptr);

// Stage i trains the heatmap branch (builtin features) and the auxiliary
// branch (feature files) separately at cfg.train.lr; stage ii builds the
// fusion model from the branch weights with averaging-initialized fusion
// convs and trains it at cfg.train.lr_stage2.
FusedTrainSummary train_fused(const DatasetManifest& manifest, const ClassMap& classes,
                              const RunConfig& cfg, std::uint64_t seed,
                              const std::string& out_path, std::ostream* log = nullptr);

struct MetricStat {
    double mean = 0.0;
    double stddev = 0.0; // population standard deviation across sequences
};

struct SequenceEval {
    std::string id;
    int frames = 0;
    double accuracy = 0.0;
    double edit = 0.0;
    double f1_10 = 0.0;
    double map = 0.0;
    std::vector<int> pred;  // kept for SVG emission; not serialized
    std::vector<int> truth;
};

struct EvalReport {
    std::string split;
    double drop_p = 0.0;
    std::vector<SequenceEval> sequences;
    MetricStat accuracy, edit, f1_10, map;
};

struct EvalOptions {
    std::string split = "test";
    double drop_p = 0.0;
    std::uint64_t seed = 0;
    FeatureSource features = FeatureSource::builtin; // single checkpoints only
};

// Loads the checkpoint (single or fused), runs prediction per sequence in
// parallel (SEGTCN_THREADS caps workers), and aggregates the four metrics
// as mean and population standard deviation. drop_p > 0 perturbs skeletons
// with drop_limbs before re-rasterization; it needs a builtin-feature
// pathway. Dimension mismatches against the checkpoint raise RuntimeError.
EvalReport evaluate(const std::string& checkpoint_path, const DatasetManifest& manifest,
                    const ClassMap& classes, const RunConfig& cfg,
                    const EvalOptions& opts);

std::string eval_report_json(const EvalReport& report);
void save_eval_report(const std::string& path, const EvalReport& report);

} // namespace segtcn
