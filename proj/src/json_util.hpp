// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// Internal JSON helpers shared by the config and checkpoint readers.
// Readers are strict: wrong types and unknown keys raise ValidationError
// with the offending location.

#pragma once

#include <initializer_list>
#include <string>

#include "json.hpp"

#include "segtcn/error.hpp"
#include "segtcn/model.hpp"

namespace segtcn::jsonutil {

using nlohmann::json;

inline void check_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
}

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                       const std::string& where) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) known = true;
        if (!known) throw ValidationError("unknown key \"" + item.key() + "\" in " + where);
    }
}

inline void num_field(const json& obj, const char* key, double& out, const std::string& where) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ValidationError(where + "." + key + " must be a number");
    out = v.get<double>();
}

inline void int_field(const json& obj, const char* key, int& out, const std::string& where) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ValidationError(where + "." + key + " must be an integer");
    out = v.get<int>();
}

inline void bool_field(const json& obj, const char* key, bool& out, const std::string& where) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ValidationError(where + "." + key + " must be a boolean");
    out = v.get<bool>();
}

inline void str_field(const json& obj, const char* key, std::string& out, const std::string& where) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_string()) throw ValidationError(where + "." + key + " must be a string");
    out = v.get<std::string>();
}

// with_dims also carries input_dim/num_classes (checkpoints need them; run
// configs derive them from the data and reject them).
inline json model_config_to_json(const ModelConfig& cfg, bool with_dims) {
    json j;
    if (with_dims) {
        j["input_dim"] = cfg.input_dim;
        j["num_classes"] = cfg.num_classes;
    }
    j["feature_width"] = cfg.feature_width;
    j["pred_layers"] = cfg.pred_layers;
    j["refine_layers"] = cfg.refine_layers;
    j["refine_stages"] = cfg.refine_stages;
    j["kernel"] = cfg.kernel;
    j["dropout"] = cfg.dropout;
    j["shared_refine_weights"] = cfg.shared_refine_weights;
    return j;
}

inline void model_config_from_json(const json& obj, ModelConfig& cfg, bool with_dims,
                                   const std::string& where) {
    check_object(obj, where);
    if (with_dims) {
        check_keys(obj,
                   {"input_dim", "num_classes", "feature_width", "pred_layers",
                    "refine_layers", "refine_stages", "kernel", "dropout",
                    "shared_refine_weights"},
                   where);
        int_field(obj, "input_dim", cfg.input_dim, where);
        int_field(obj, "num_classes", cfg.num_classes, where);
    } else {
        check_keys(obj,
                   {"feature_width", "pred_layers", "refine_layers", "refine_stages",
                    "kernel", "dropout", "shared_refine_weights"},
                   where);
    }
    int_field(obj, "feature_width", cfg.feature_width, where);
    int_field(obj, "pred_layers", cfg.pred_layers, where);
    int_field(obj, "refine_layers", cfg.refine_layers, where);
    int_field(obj, "refine_stages", cfg.refine_stages, where);
    int_field(obj, "kernel", cfg.kernel, where);
    num_field(obj, "dropout", cfg.dropout, where);
    bool_field(obj, "shared_refine_weights", cfg.shared_refine_weights, where);
}

} // namespace segtcn::jsonutil
