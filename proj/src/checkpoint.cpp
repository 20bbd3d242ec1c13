// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#include "segtcn/checkpoint.hpp"

#include <fstream>

#include "json_util.hpp"

namespace segtcn {

using jsonutil::json;

namespace {

constexpr const char* kMagic = "SEGTCN-CKPT v1";

template <typename Model>
json params_manifest(const Model& model) {
    json arr = json::array();
    for (const Param<float>* p : model.params().all()) {
        json item;
        item["name"] = p->name;
        item["shape"] = p->shape;
        arr.push_back(std::move(item));
    }
    return arr;
}

void write_file(const std::string& path, const json& manifest,
                const ParamStore<float>& store) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot write checkpoint: " + path);
    out << kMagic << "\n" << manifest.dump() << "\n";
    for (const Param<float>* p : store.all())
        out.write(reinterpret_cast<const char*>(p->values.data()),
                  static_cast<std::streamsize>(p->values.size() * sizeof(float)));
    if (!out) throw RuntimeError("failed writing checkpoint: " + path);
}

json read_manifest(std::ifstream& in, const std::string& path) {
    std::string magic, line;
    if (!std::getline(in, magic) || magic != kMagic)
        throw RuntimeError("not a checkpoint file: " + path);
    if (!std::getline(in, line)) throw RuntimeError("checkpoint manifest missing: " + path);
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw RuntimeError("checkpoint manifest is not valid JSON: " + path + ": " +
                           e.what());
    }
}

void read_payload(std::ifstream& in, const std::string& path, const json& manifest,
                  ParamStore<float>& store) {
    if (!manifest.contains("params") || !manifest.at("params").is_array())
        throw RuntimeError("checkpoint manifest lacks a params array: " + path);
    const json& listed = manifest.at("params");
    const auto& params = store.all();
    if (listed.size() != params.size())
        throw RuntimeError("checkpoint lists " + std::to_string(listed.size()) +
                           " parameters, model has " + std::to_string(params.size()) +
                           ": " + path);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const json& item = listed[i];
        const std::string name = item.value("name", std::string());
        const std::vector<int> shape = item.value("shape", std::vector<int>());
        if (name != params[i]->name || shape != params[i]->shape)
            throw RuntimeError("checkpoint parameter " + std::to_string(i) + " (" + name +
                               ") does not match model layout (" + params[i]->name +
                               "): " + path);
    }
    for (Param<float>* p : params) {
        in.read(reinterpret_cast<char*>(p->values.data()),
                static_cast<std::streamsize>(p->values.size() * sizeof(float)));
        if (in.gcount() != static_cast<std::streamsize>(p->values.size() * sizeof(float)))
            throw RuntimeError("checkpoint payload truncated at " + p->name + ": " + path);
    }
    char extra;
    if (in.read(&extra, 1))
        throw RuntimeError("checkpoint has trailing bytes: " + path);
}

} // namespace

CheckpointKind checkpoint_kind(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open checkpoint: " + path);
    const json manifest = read_manifest(in, path);
    const std::string kind = manifest.value("kind", std::string());
    if (kind == "single") return CheckpointKind::single;
    if (kind == "fused") return CheckpointKind::fused;
    throw RuntimeError("unknown checkpoint kind \"" + kind + "\": " + path);
}

void save_checkpoint(const std::string& path, const SegModel<float>& model) {
    json manifest;
    manifest["kind"] = "single";
    manifest["model"] = jsonutil::model_config_to_json(model.config(), true);
    manifest["params"] = params_manifest(model);
    write_file(path, manifest, model.params());
}

void save_checkpoint(const std::string& path, const FusionModel<float>& model) {
    const FusionConfig& cfg = model.config();
    ModelConfig arch = cfg.arch;
    arch.input_dim = cfg.heat_input_dim;
    json manifest;
    manifest["kind"] = "fused";
    manifest["arch"] = jsonutil::model_config_to_json(arch, true);
    manifest["aux_input_dim"] = cfg.aux_input_dim;
    manifest["mode"] = fusion_mode_name(cfg.mode);
    manifest["supervise_branches"] = cfg.supervise_branches;
    manifest["params"] = params_manifest(model);
    write_file(path, manifest, model.params());
}

SegModel<float> load_single_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open checkpoint: " + path);
    const json manifest = read_manifest(in, path);
    if (manifest.value("kind", std::string()) != "single")
        throw RuntimeError("expected a single-branch checkpoint: " + path);
    ModelConfig cfg;
    try {
        jsonutil::model_config_from_json(manifest.at("model"), cfg, true, "model");
    } catch (const ValidationError& e) {
        throw RuntimeError("bad checkpoint manifest: " + path + ": " + e.what());
    }
    SegModel<float> model(cfg);
    read_payload(in, path, manifest, model.params());
    return model;
}

FusionModel<float> load_fused_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open checkpoint: " + path);
    const json manifest = read_manifest(in, path);
    if (manifest.value("kind", std::string()) != "fused")
        throw RuntimeError("expected a fused checkpoint: " + path);
    FusionConfig cfg;
    try {
        ModelConfig arch;
        jsonutil::model_config_from_json(manifest.at("arch"), arch, true, "arch");
        cfg.arch = arch;
        cfg.heat_input_dim = arch.input_dim;
        if (!manifest.contains("aux_input_dim") ||
            !manifest.at("aux_input_dim").is_number_integer())
            throw ValidationError("aux_input_dim missing");
        cfg.aux_input_dim = manifest.at("aux_input_dim").get<int>();
        cfg.mode = parse_fusion_mode(manifest.value("mode", std::string("recurrent")));
        cfg.supervise_branches = manifest.value("supervise_branches", false);
    } catch (const ValidationError& e) {
        throw RuntimeError("bad checkpoint manifest: " + path + ": " + e.what());
    }
    FusionModel<float> model(cfg);
    read_payload(in, path, manifest, model.params());
    return model;
}

} // namespace segtcn
