// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// Network assembly. The single-branch model is one dual-dilated prediction
// stage followed by refinement stages that consume the previous stage's
// probability track. The fusion model runs two such branches and merges
// their per-stage 64-channel features through pointwise fusion modules with
// their own classifier heads.
//
// Layer structure (both stage kinds):
//   x -> dilated conv (dual: two parallel convs with dilations 2^l and
//   2^(L-1-l), channel-concat, pointwise to width) -> ReLU -> pointwise
//   width->width -> dropout -> residual add with x.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "segtcn/autodiff.hpp"
#include "segtcn/error.hpp"
#include "segtcn/rng.hpp"

namespace segtcn {

struct ModelConfig {
    int input_dim = 64;   // D, feature dimension entering the first stage
    int num_classes = 2;  // C
    int feature_width = 64;
    int pred_layers = 11;
    int refine_layers = 10;
    int refine_stages = 3;
    int kernel = 3;
    double dropout = 0.5;
    bool shared_refine_weights = false;
};

void validate_model_config(const ModelConfig& cfg);

enum class FusionMode { recurrent, supervision_only };

const char* fusion_mode_name(FusionMode mode);
FusionMode parse_fusion_mode(const std::string& name);

namespace model_detail {

// Power-of-two dilation for layer l; dual layers pair 2^l with 2^(count-1-l).
inline int dilation_at(int l) {
    return 1 << l;
}

template <typename T>
void create_layer_params(ParamStore<T>& store, const std::string& prefix, int width,
                         int kernel, bool dual) {
    if (dual) {
        store.create(prefix + ".up.w", {width, width, kernel});
        store.create(prefix + ".up.b", {width});
        store.create(prefix + ".down.w", {width, width, kernel});
        store.create(prefix + ".down.b", {width});
        store.create(prefix + ".merge.w", {width, 2 * width});
        store.create(prefix + ".merge.b", {width});
    } else {
        store.create(prefix + ".conv.w", {width, width, kernel});
        store.create(prefix + ".conv.b", {width});
    }
    store.create(prefix + ".out.w", {width, width});
    store.create(prefix + ".out.b", {width});
}

template <typename T>
void create_stage_params(ParamStore<T>& store, const std::string& prefix, int in_dim,
                         int layers, bool dual, const ModelConfig& cfg) {
    const int width = cfg.feature_width;
    store.create(prefix + ".adapter.w", {width, in_dim});
    store.create(prefix + ".adapter.b", {width});
    for (int l = 0; l < layers; ++l)
        create_layer_params(store, prefix + ".layer" + std::to_string(l), width,
                            cfg.kernel, dual);
    store.create(prefix + ".head.w", {cfg.num_classes, width});
    store.create(prefix + ".head.b", {cfg.num_classes});
}

template <typename T>
Param<T>* need(ParamStore<T>& store, const std::string& name) {
    Param<T>* p = store.find(name);
    if (!p) throw RuntimeError("missing parameter: " + name);
    return p;
}

// Adapter plus the dilated layer stack; returns the stage's pre-classifier
// feature map (width x M).
template <typename T>
Tensor<T>* run_stage_features(Tape<T>& tape, ParamStore<T>& store,
                              const std::string& prefix, Tensor<T>* src, int layers,
                              bool dual, const ModelConfig& cfg, bool training,
                              Rng* dropout_rng) {
    Tensor<T>* x = tape.pointwise_conv(src, need(store, prefix + ".adapter.w"),
                                       need(store, prefix + ".adapter.b"));
    for (int l = 0; l < layers; ++l) {
        const std::string lp = prefix + ".layer" + std::to_string(l);
        Tensor<T>* h = nullptr;
        if (dual) {
            Tensor<T>* up = tape.dilated_conv1d(x, need(store, lp + ".up.w"),
                                                need(store, lp + ".up.b"), dilation_at(l));
            Tensor<T>* down = tape.dilated_conv1d(x, need(store, lp + ".down.w"),
                                                  need(store, lp + ".down.b"),
                                                  dilation_at(layers - 1 - l));
            h = tape.pointwise_conv(tape.concat_channels(up, down),
                                    need(store, lp + ".merge.w"),
                                    need(store, lp + ".merge.b"));
        } else {
            h = tape.dilated_conv1d(x, need(store, lp + ".conv.w"),
                                    need(store, lp + ".conv.b"), dilation_at(l));
        }
        h = tape.relu(h);
        h = tape.pointwise_conv(h, need(store, lp + ".out.w"), need(store, lp + ".out.b"));
        if (training && cfg.dropout > 0.0) {
            if (!dropout_rng) throw RuntimeError("training forward needs a dropout rng");
            h = tape.dropout(h, cfg.dropout, *dropout_rng, true);
        }
        x = tape.elementwise_add(x, h);
    }
    return x;
}

// Kaiming-uniform fan-in init for weights, zeros for biases, drawn in
// parameter creation order. Classifier heads start 100x smaller: the
// residual stack leaves stage features large enough that full-scale head
// weights saturate the softmax, and the floored log loss has zero gradient
// there, so training must begin near the uniform distribution.
template <typename T>
void kaiming_init(ParamStore<T>& store, Rng& rng) {
    for (Param<T>* p : store.all()) {
        if (p->shape.size() < 2) {
            std::fill(p->values.begin(), p->values.end(), T(0));
            continue;
        }
        std::size_t fan_in = 1;
        for (std::size_t d = 1; d < p->shape.size(); ++d)
            fan_in *= static_cast<std::size_t>(p->shape[d]);
        double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        if (p->name.find("head") != std::string::npos) bound *= 0.01;
        for (T& v : p->values) v = static_cast<T>(rng.uniform(-bound, bound));
    }
}

} // namespace model_detail

// Per-frame argmax with ties broken toward the lower class id.
template <typename T>
std::vector<int> predict_labels(const Tensor<T>* probs) {
    std::vector<int> labels(probs->time);
    for (int t = 0; t < probs->time; ++t) {
        int best = 0;
        T best_v = probs->value(0, t);
        for (int c = 1; c < probs->channels; ++c) {
            const T v = probs->value(c, t);
            if (v > best_v) {
                best_v = v;
                best = c;
            }
        }
        labels[t] = best;
    }
    return labels;
}

template <typename T>
class SegModel {
public:
    explicit SegModel(const ModelConfig& cfg) : cfg_(cfg) {
        validate_model_config(cfg);
        model_detail::create_stage_params(params_, "stage0", cfg.input_dim,
                                          cfg.pred_layers, true, cfg);
        if (cfg.shared_refine_weights) {
            if (cfg.refine_stages > 0)
                model_detail::create_stage_params(params_, "refine", cfg.num_classes,
                                                  cfg.refine_layers, false, cfg);
        } else {
            for (int s = 1; s <= cfg.refine_stages; ++s)
                model_detail::create_stage_params(params_, "stage" + std::to_string(s),
                                                  cfg.num_classes, cfg.refine_layers,
                                                  false, cfg);
        }
    }

    SegModel(SegModel&&) = default;
    SegModel& operator=(SegModel&&) = default;
    SegModel(const SegModel&) = delete;
    SegModel& operator=(const SegModel&) = delete;

    void init(Rng& rng) { model_detail::kaiming_init(params_, rng); }

    const ModelConfig& config() const { return cfg_; }
    ParamStore<T>& params() { return params_; }
    const ParamStore<T>& params() const { return params_; }

    std::string stage_prefix(int s) const {
        if (s == 0) return "stage0";
        return cfg_.shared_refine_weights ? "refine" : "stage" + std::to_string(s);
    }

    // One probability track (C x M) per stage, prediction stage first.
    std::vector<Tensor<T>*> forward(Tape<T>& tape, Tensor<T>* input,
                                    bool training = false,
                                    Rng* dropout_rng = nullptr) const {
        if (input->channels != cfg_.input_dim)
            throw ValidationError("feature dimension " + std::to_string(input->channels) +
                                  " does not match model input dim " +
                                  std::to_string(cfg_.input_dim));
        auto& store = const_cast<ParamStore<T>&>(params_);
        std::vector<Tensor<T>*> tracks;
        Tensor<T>* src = input;
        for (int s = 0; s <= cfg_.refine_stages; ++s) {
            const std::string prefix = stage_prefix(s);
            Tensor<T>* feat = model_detail::run_stage_features(
                tape, store, prefix, src, s == 0 ? cfg_.pred_layers : cfg_.refine_layers,
                s == 0, cfg_, training, dropout_rng);
            Tensor<T>* logits = tape.pointwise_conv(
                feat, model_detail::need(store, prefix + ".head.w"),
                model_detail::need(store, prefix + ".head.b"));
            src = tape.softmax_over_channels(logits);
            tracks.push_back(src);
        }
        return tracks;
    }

private:
    ModelConfig cfg_;
    ParamStore<T> params_;
};

struct FusionConfig {
    ModelConfig arch;        // input_dim is ignored; per-branch dims below
    int heat_input_dim = 64;
    int aux_input_dim = 64;
    FusionMode mode = FusionMode::recurrent;
    bool supervise_branches = false;
};

template <typename T>
class FusionModel {
public:
    explicit FusionModel(const FusionConfig& cfg) : cfg_(cfg) {
        ModelConfig probe = cfg.arch;
        probe.input_dim = cfg.heat_input_dim;
        validate_model_config(probe);
        if (cfg.aux_input_dim < 1) throw ValidationError("aux input dim must be positive");
        create_branch("heat", cfg.heat_input_dim);
        create_branch("aux", cfg.aux_input_dim);
        const int width = cfg.arch.feature_width;
        for (int s = 0; s <= cfg.arch.refine_stages; ++s) {
            const std::string fp = "fusion.stage" + std::to_string(s);
            params_.create(fp + ".w", {width, 2 * width});
            params_.create(fp + ".b", {width});
            const std::string hp = "fusion.head" + std::to_string(s);
            params_.create(hp + ".w", {cfg.arch.num_classes, width});
            params_.create(hp + ".b", {cfg.arch.num_classes});
        }
    }

    FusionModel(FusionModel&&) = default;
    FusionModel& operator=(FusionModel&&) = default;
    FusionModel(const FusionModel&) = delete;
    FusionModel& operator=(const FusionModel&) = delete;

    void init(Rng& rng) { model_detail::kaiming_init(params_, rng); }

    // Branch weights from separately trained models; fusion convs become
    // averaging maps 0.5*[I | I] with zero bias and fused heads start at the
    // mean of the two branch heads.
    void init_from_branches(const SegModel<T>& heat, const SegModel<T>& aux) {
        copy_branch("heat.", heat);
        copy_branch("aux.", aux);
        const int width = cfg_.arch.feature_width;
        for (int s = 0; s <= cfg_.arch.refine_stages; ++s) {
            Param<T>* fw = params_.find("fusion.stage" + std::to_string(s) + ".w");
            Param<T>* fb = params_.find("fusion.stage" + std::to_string(s) + ".b");
            std::fill(fw->values.begin(), fw->values.end(), T(0));
            std::fill(fb->values.begin(), fb->values.end(), T(0));
            for (int o = 0; o < width; ++o) {
                fw->values[static_cast<std::size_t>(o) * 2 * width + o] = T(0.5);
                fw->values[static_cast<std::size_t>(o) * 2 * width + width + o] = T(0.5);
            }
            const std::string hs = heat.stage_prefix(s) + ".head.";
            const std::string as = aux.stage_prefix(s) + ".head.";
            for (const char* part : {"w", "b"}) {
                const Param<T>* hw = heat.params().find(hs + part);
                const Param<T>* aw = aux.params().find(as + part);
                Param<T>* dst = params_.find("fusion.head" + std::to_string(s) + "." + part);
                for (std::size_t i = 0; i < dst->values.size(); ++i)
                    dst->values[i] = T(0.5) * hw->values[i] + T(0.5) * aw->values[i];
            }
        }
    }

    const FusionConfig& config() const { return cfg_; }
    ParamStore<T>& params() { return params_; }
    const ParamStore<T>& params() const { return params_; }

    struct Forward {
        std::vector<Tensor<T>*> fused; // supervised / output tracks
        std::vector<Tensor<T>*> heat;  // per-branch tracks
        std::vector<Tensor<T>*> aux;
    };

    Forward forward(Tape<T>& tape, Tensor<T>* heat_in, Tensor<T>* aux_in,
                    bool training = false, Rng* dropout_rng = nullptr) const {
        if (heat_in->time != aux_in->time)
            throw ValidationError("branch feature tracks differ in length");
        if (heat_in->channels != cfg_.heat_input_dim)
            throw ValidationError("heatmap feature dimension mismatch");
        if (aux_in->channels != cfg_.aux_input_dim)
            throw ValidationError("auxiliary feature dimension mismatch");
        auto& store = const_cast<ParamStore<T>&>(params_);
        const ModelConfig& arch = cfg_.arch;
        Forward out;
        Tensor<T>* src_a = heat_in;
        Tensor<T>* src_b = aux_in;
        for (int s = 0; s <= arch.refine_stages; ++s) {
            const int layers = s == 0 ? arch.pred_layers : arch.refine_layers;
            const std::string pa = "heat." + stage_prefix(s);
            const std::string pb = "aux." + stage_prefix(s);
            Tensor<T>* feat_a = model_detail::run_stage_features(
                tape, store, pa, src_a, layers, s == 0, arch, training, dropout_rng);
            Tensor<T>* feat_b = model_detail::run_stage_features(
                tape, store, pb, src_b, layers, s == 0, arch, training, dropout_rng);
            Tensor<T>* probs_a = tape.softmax_over_channels(tape.pointwise_conv(
                feat_a, model_detail::need(store, pa + ".head.w"),
                model_detail::need(store, pa + ".head.b")));
            Tensor<T>* probs_b = tape.softmax_over_channels(tape.pointwise_conv(
                feat_b, model_detail::need(store, pb + ".head.w"),
                model_detail::need(store, pb + ".head.b")));
            Tensor<T>* fused_feat = tape.pointwise_conv(
                tape.concat_channels(feat_a, feat_b),
                model_detail::need(store, "fusion.stage" + std::to_string(s) + ".w"),
                model_detail::need(store, "fusion.stage" + std::to_string(s) + ".b"));
            Tensor<T>* fused_probs = tape.softmax_over_channels(tape.pointwise_conv(
                fused_feat, model_detail::need(store, "fusion.head" + std::to_string(s) + ".w"),
                model_detail::need(store, "fusion.head" + std::to_string(s) + ".b")));
            out.fused.push_back(fused_probs);
            out.heat.push_back(probs_a);
            out.aux.push_back(probs_b);
            if (cfg_.mode == FusionMode::recurrent) {
                src_a = fused_probs;
                src_b = fused_probs;
            } else {
                src_a = probs_a;
                src_b = probs_b;
            }
        }
        return out;
    }

    std::string stage_prefix(int s) const {
        if (s == 0) return "stage0";
        return cfg_.arch.shared_refine_weights ? "refine" : "stage" + std::to_string(s);
    }

private:
    void create_branch(const std::string& branch, int input_dim) {
        const ModelConfig& arch = cfg_.arch;
        model_detail::create_stage_params(params_, branch + ".stage0", input_dim,
                                          arch.pred_layers, true, arch);
        if (arch.shared_refine_weights) {
            if (arch.refine_stages > 0)
                model_detail::create_stage_params(params_, branch + ".refine",
                                                  arch.num_classes, arch.refine_layers,
                                                  false, arch);
        } else {
            for (int s = 1; s <= arch.refine_stages; ++s)
                model_detail::create_stage_params(params_, branch + ".stage" + std::to_string(s),
                                                  arch.num_classes, arch.refine_layers,
                                                  false, arch);
        }
    }

    void copy_branch(const std::string& prefix, const SegModel<T>& src) {
        for (const Param<T>* p : src.params().all()) {
            Param<T>* dst = params_.find(prefix + p->name);
            if (!dst || dst->shape != p->shape)
                throw ValidationError("branch topology mismatch at " + prefix + p->name);
            dst->values = p->values;
        }
    }

    FusionConfig cfg_;
    ParamStore<T> params_;
};

} // namespace segtcn
