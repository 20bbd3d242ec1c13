// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#include "segtcn/model.hpp"

namespace segtcn {

void validate_model_config(const ModelConfig& cfg) {
    if (cfg.input_dim < 1) throw ValidationError("model input dim must be positive");
    if (cfg.num_classes < 1) throw ValidationError("model needs at least one class");
    if (cfg.feature_width < 1) throw ValidationError("feature width must be positive");
    if (cfg.pred_layers < 1) throw ValidationError("prediction stage needs at least one layer");
    if (cfg.refine_stages < 0) throw ValidationError("refine stage count cannot be negative");
    if (cfg.refine_stages > 0 && cfg.refine_layers < 1)
        throw ValidationError("refinement stages need at least one layer");
    if (cfg.kernel < 1 || cfg.kernel % 2 == 0)
        throw ValidationError("kernel size must be odd and positive");
    if (cfg.dropout < 0.0 || cfg.dropout >= 1.0)
        throw ValidationError("dropout must lie in [0, 1)");
    // Dilations are 2^l; keep the exponent within int range.
    const int deepest = std::max(cfg.pred_layers, cfg.refine_stages > 0 ? cfg.refine_layers : 1);
    if (deepest > 30) throw ValidationError("layer count too large for power-of-two dilations");
}

const char* fusion_mode_name(FusionMode mode) {
    switch (mode) {
        case FusionMode::recurrent: return "recurrent";
        case FusionMode::supervision_only: return "supervision_only";
    }
    throw ValidationError("unknown fusion mode");
}

FusionMode parse_fusion_mode(const std::string& name) {
    if (name == "recurrent") return FusionMode::recurrent;
    if (name == "supervision_only") return FusionMode::supervision_only;
    throw ValidationError("unknown fusion mode: " + name);
}

} // namespace segtcn
