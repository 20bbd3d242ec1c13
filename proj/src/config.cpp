// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#include "segtcn/config.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace segtcn {

using jsonutil::json;

namespace {

const char* distance_mode_name(DistanceMode mode) {
    return mode == DistanceMode::linear ? "linear" : "squared";
}

DistanceMode parse_distance_mode(const std::string& name) {
    if (name == "linear") return DistanceMode::linear;
    if (name == "squared") return DistanceMode::squared;
    throw ValidationError("unknown distance mode: " + name);
}

} // namespace

RunConfig default_run_config() { return RunConfig{}; }

void validate_run_config(const RunConfig& cfg) {
    if (cfg.raster.sigma <= 0.0) throw ValidationError("raster sigma must be positive");
    if (cfg.raster.out_size < 1) throw ValidationError("raster out_size must be positive");
    if (cfg.raster.replicate_channels < 1)
        throw ValidationError("raster replicate_channels must be positive");
    if (cfg.raster.crop_padding < 0)
        throw ValidationError("raster crop_padding cannot be negative");
    if (cfg.encoder_grid < 1) throw ValidationError("encoder grid must be positive");
    if (cfg.raster.out_size % cfg.encoder_grid != 0)
        throw ValidationError("encoder grid " + std::to_string(cfg.encoder_grid) +
                              " does not divide raster size " +
                              std::to_string(cfg.raster.out_size));
    if (cfg.loss.tau <= 0.0) throw ValidationError("loss tau must be positive");
    if (cfg.loss.alpha < 0.0) throw ValidationError("loss alpha cannot be negative");
    if (cfg.loss.log_floor <= 0.0) throw ValidationError("loss log_floor must be positive");
    if (cfg.train.lr <= 0.0 || cfg.train.lr_stage2 <= 0.0)
        throw ValidationError("learning rates must be positive");
    if (cfg.train.epochs < 0 || cfg.train.epochs_stage2 < 0)
        throw ValidationError("epoch counts cannot be negative");
    if (cfg.train.beta1 < 0.0 || cfg.train.beta1 >= 1.0 || cfg.train.beta2 < 0.0 ||
        cfg.train.beta2 >= 1.0)
        throw ValidationError("adam betas must lie in [0, 1)");
    if (cfg.train.eps <= 0.0) throw ValidationError("adam eps must be positive");
    // Model dims are data-derived; validate the architecture with stand-ins.
    ModelConfig probe = cfg.model;
    probe.input_dim = 1;
    probe.num_classes = 2;
    validate_model_config(probe);
}

std::string run_config_json(const RunConfig& cfg) {
    json j;
    j["raster"] = {{"sigma", cfg.raster.sigma},
                   {"out_size", cfg.raster.out_size},
                   {"replicate_channels", cfg.raster.replicate_channels},
                   {"crop_padding", cfg.raster.crop_padding},
                   {"distance_mode", distance_mode_name(cfg.raster.distance_mode)}};
    j["encoder"] = {{"grid", cfg.encoder_grid}};
    j["model"] = jsonutil::model_config_to_json(cfg.model, false);
    j["loss"] = {{"tau", cfg.loss.tau},
                 {"alpha", cfg.loss.alpha},
                 {"log_floor", cfg.loss.log_floor}};
    j["train"] = {{"lr", cfg.train.lr},
                  {"lr_stage2", cfg.train.lr_stage2},
                  {"epochs", cfg.train.epochs},
                  {"epochs_stage2", cfg.train.epochs_stage2},
                  {"beta1", cfg.train.beta1},
                  {"beta2", cfg.train.beta2},
                  {"eps", cfg.train.eps}};
    j["fusion"] = {{"mode", fusion_mode_name(cfg.fusion_mode)},
                   {"supervise_branches", cfg.supervise_branches}};
    return j.dump(2) + "\n";
}

RunConfig parse_run_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    jsonutil::check_object(j, "config");
    jsonutil::check_keys(j, {"raster", "encoder", "model", "loss", "train", "fusion"},
                         "config");

    RunConfig cfg;
    if (j.contains("raster")) {
        const json& r = j.at("raster");
        jsonutil::check_object(r, "raster");
        jsonutil::check_keys(
            r, {"sigma", "out_size", "replicate_channels", "crop_padding", "distance_mode"},
            "raster");
        jsonutil::num_field(r, "sigma", cfg.raster.sigma, "raster");
        jsonutil::int_field(r, "out_size", cfg.raster.out_size, "raster");
        jsonutil::int_field(r, "replicate_channels", cfg.raster.replicate_channels, "raster");
        jsonutil::int_field(r, "crop_padding", cfg.raster.crop_padding, "raster");
        std::string mode = distance_mode_name(cfg.raster.distance_mode);
        jsonutil::str_field(r, "distance_mode", mode, "raster");
        cfg.raster.distance_mode = parse_distance_mode(mode);
    }
    if (j.contains("encoder")) {
        const json& e = j.at("encoder");
        jsonutil::check_object(e, "encoder");
        jsonutil::check_keys(e, {"grid"}, "encoder");
        jsonutil::int_field(e, "grid", cfg.encoder_grid, "encoder");
    }
    if (j.contains("model"))
        jsonutil::model_config_from_json(j.at("model"), cfg.model, false, "model");
    if (j.contains("loss")) {
        const json& l = j.at("loss");
        jsonutil::check_object(l, "loss");
        jsonutil::check_keys(l, {"tau", "alpha", "log_floor"}, "loss");
        jsonutil::num_field(l, "tau", cfg.loss.tau, "loss");
        jsonutil::num_field(l, "alpha", cfg.loss.alpha, "loss");
        jsonutil::num_field(l, "log_floor", cfg.loss.log_floor, "loss");
    }
    if (j.contains("train")) {
        const json& t = j.at("train");
        jsonutil::check_object(t, "train");
        jsonutil::check_keys(
            t, {"lr", "lr_stage2", "epochs", "epochs_stage2", "beta1", "beta2", "eps"},
            "train");
        jsonutil::num_field(t, "lr", cfg.train.lr, "train");
        jsonutil::num_field(t, "lr_stage2", cfg.train.lr_stage2, "train");
        jsonutil::int_field(t, "epochs", cfg.train.epochs, "train");
        jsonutil::int_field(t, "epochs_stage2", cfg.train.epochs_stage2, "train");
        jsonutil::num_field(t, "beta1", cfg.train.beta1, "train");
        jsonutil::num_field(t, "beta2", cfg.train.beta2, "train");
        jsonutil::num_field(t, "eps", cfg.train.eps, "train");
    }
    if (j.contains("fusion")) {
        const json& f = j.at("fusion");
        jsonutil::check_object(f, "fusion");
        jsonutil::check_keys(f, {"mode", "supervise_branches"}, "fusion");
        std::string mode = fusion_mode_name(cfg.fusion_mode);
        jsonutil::str_field(f, "mode", mode, "fusion");
        cfg.fusion_mode = parse_fusion_mode(mode);
        jsonutil::bool_field(f, "supervise_branches", cfg.supervise_branches, "fusion");
    }
    validate_run_config(cfg);
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_run_config_json(buf.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
    validate_run_config(cfg);
    std::ofstream out(path);
    if (!out) throw RuntimeError("cannot write config: " + path);
    out << run_config_json(cfg);
    if (!out) throw RuntimeError("failed writing config: " + path);
}

} // namespace segtcn
