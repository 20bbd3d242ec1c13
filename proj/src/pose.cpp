// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#include "segtcn/pose.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "segtcn/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace segtcn {

namespace {

json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot open file for writing: " + path);
    out << text;
    if (!out) throw RuntimeError("write failed: " + path);
}

} // namespace

const char* limb_group_name(LimbGroup g) {
    switch (g) {
        case LimbGroup::left_arm: return "left-arm";
        case LimbGroup::right_arm: return "right-arm";
        case LimbGroup::left_leg: return "left-leg";
        case LimbGroup::right_leg: return "right-leg";
        case LimbGroup::torso_head: return "torso-head";
    }
    return "torso-head";
}

LimbGroup parse_limb_group(const std::string& name) {
    if (name == "left-arm") return LimbGroup::left_arm;
    if (name == "right-arm") return LimbGroup::right_arm;
    if (name == "left-leg") return LimbGroup::left_leg;
    if (name == "right-leg") return LimbGroup::right_leg;
    if (name == "torso-head") return LimbGroup::torso_head;
    throw ValidationError("unknown limb group: " + name);
}

void validate_sequence(const SkeletonSequence& seq) {
    if (seq.width < 1 || seq.height < 1)
        throw ValidationError("frame dimensions must be at least 1x1");
    const int K = seq.joint_count();
    if (K < 1) throw ValidationError("topology has no joints");
    if (seq.frames.empty()) throw ValidationError("sequence has no frames");

    std::set<std::pair<int, int>> seen;
    for (std::size_t l = 0; l < seq.topology.limbs.size(); ++l) {
        const Limb& limb = seq.topology.limbs[l];
        if (limb.a < 0 || limb.a >= K || limb.b < 0 || limb.b >= K)
            throw ValidationError("limb " + std::to_string(l) + " joint index out of range");
        if (limb.a == limb.b)
            throw ValidationError("limb " + std::to_string(l) + " is a self-loop");
        const auto key = std::minmax(limb.a, limb.b);
        if (!seen.insert(key).second)
            throw ValidationError("duplicate limb pair at index " + std::to_string(l));
    }

    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
        if (static_cast<int>(seq.frames[f].size()) != K)
            throw ValidationError("frame " + std::to_string(f) + " has " +
                                  std::to_string(seq.frames[f].size()) + " joints, expected " +
                                  std::to_string(K));
        for (std::size_t k = 0; k < seq.frames[f].size(); ++k) {
            const Joint& j = seq.frames[f][k];
            if (!std::isfinite(j.x) || !std::isfinite(j.y))
                throw ValidationError("non-finite coordinate at frame " + std::to_string(f) +
                                      " joint " + std::to_string(k));
            if (!(j.c >= 0.0 && j.c <= 1.0))
                throw ValidationError("confidence outside [0,1] at frame " + std::to_string(f) +
                                      " joint " + std::to_string(k));
        }
    }
}

SkeletonSequence load_skeleton_sequence(const std::string& path) {
    const json j = parse_json_file(path);
    SkeletonSequence seq;
    try {
        seq.width = j.at("width").get<int>();
        seq.height = j.at("height").get<int>();
        seq.topology.joint_names = j.at("joint_names").get<std::vector<std::string>>();
        for (const json& limb : j.at("limbs")) {
            if (!limb.is_array() || limb.size() != 3)
                throw ValidationError("limb entries must be [a, b, \"group\"]");
            seq.topology.limbs.push_back({limb[0].get<int>(), limb[1].get<int>(),
                                          parse_limb_group(limb[2].get<std::string>())});
        }
        for (const json& frame : j.at("frames")) {
            std::vector<Joint> joints;
            joints.reserve(frame.size());
            for (const json& triplet : frame) {
                if (!triplet.is_array() || triplet.size() != 3)
                    throw ValidationError("joints must be [x, y, c] triplets");
                joints.push_back({triplet[0].get<double>(), triplet[1].get<double>(),
                                  triplet[2].get<double>()});
            }
            seq.frames.push_back(std::move(joints));
        }
    } catch (const json::exception& e) {
        throw ValidationError("invalid skeleton file " + path + ": " + e.what());
    }
    try {
        validate_sequence(seq);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return seq;
}

void save_skeleton_sequence(const std::string& path, const SkeletonSequence& seq) {
    validate_sequence(seq);
    json j;
    j["width"] = seq.width;
    j["height"] = seq.height;
    j["joint_names"] = seq.topology.joint_names;
    json limbs = json::array();
    for (const Limb& limb : seq.topology.limbs)
        limbs.push_back({limb.a, limb.b, limb_group_name(limb.group)});
    j["limbs"] = std::move(limbs);
    json frames = json::array();
    for (const auto& frame : seq.frames) {
        json fj = json::array();
        for (const Joint& joint : frame) fj.push_back({joint.x, joint.y, joint.c});
        frames.push_back(std::move(fj));
    }
    j["frames"] = std::move(frames);
    write_text_file(path, j.dump() + "\n");
}

int ClassMap::id_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

ClassMap load_class_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open class map: " + path);
    std::vector<std::pair<std::string, int>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw ValidationError("class map line " + std::to_string(line_no) +
                                  " is not \"name<TAB>id\"");
        const std::string name = line.substr(0, tab);
        int id = 0;
        try {
            id = std::stoi(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw ValidationError("class map line " + std::to_string(line_no) + " has a bad id");
        }
        rows.emplace_back(name, id);
    }
    if (rows.empty()) throw ValidationError("empty class map: " + path);

    ClassMap map;
    map.names.assign(rows.size(), "");
    for (const auto& [name, id] : rows) {
        if (id < 0 || id >= static_cast<int>(rows.size()))
            throw ValidationError("class ids must be contiguous from 0: " + name);
        if (!map.names[id].empty())
            throw ValidationError("duplicate class id " + std::to_string(id));
        if (map.id_of(name) >= 0) throw ValidationError("duplicate class name " + name);
        map.names[id] = name;
    }
    return map;
}

void save_class_map(const std::string& path, const ClassMap& map) {
    std::ostringstream out;
    for (std::size_t i = 0; i < map.names.size(); ++i)
        out << map.names[i] << '\t' << i << '\n';
    write_text_file(path, out.str());
}

LabelTrack load_label_track(const std::string& path, const ClassMap& map) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open label file: " + path);
    LabelTrack track;
    track.class_names = map.names;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const int id = map.id_of(line);
        if (id < 0)
            throw ValidationError("unknown action name \"" + line + "\" at line " +
                                  std::to_string(line_no) + " of " + path);
        track.labels.push_back(id);
    }
    if (track.labels.empty()) throw ValidationError("empty label track: " + path);
    return track;
}

void save_label_track(const std::string& path, const LabelTrack& track) {
    std::ostringstream out;
    for (int id : track.labels) {
        if (id < 0 || id >= track.class_count())
            throw ValidationError("label id out of range: " + std::to_string(id));
        out << track.class_names[id] << '\n';
    }
    write_text_file(path, out.str());
}

std::vector<Segment> segments_of(const std::vector<int>& labels) {
    std::vector<Segment> segments;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (segments.empty() || segments.back().cls != labels[i])
            segments.push_back({labels[i], static_cast<int>(i), static_cast<int>(i)});
        else
            segments.back().end = static_cast<int>(i);
    }
    return segments;
}

std::string DatasetManifest::resolve(const std::string& relative) const {
    const fs::path p(relative);
    if (p.is_absolute() || base_dir.empty()) return relative;
    return (fs::path(base_dir) / p).string();
}

std::vector<const ManifestEntry*> DatasetManifest::split(const std::string& name) const {
    std::vector<const ManifestEntry*> out;
    for (const ManifestEntry& e : entries)
        if (e.split == name) out.push_back(&e);
    return out;
}

DatasetManifest load_manifest(const std::string& path) {
    const json j = parse_json_file(path);
    if (!j.is_array()) throw ValidationError("manifest must be a JSON list: " + path);
    DatasetManifest manifest;
    manifest.base_dir = fs::path(path).parent_path().string();
    std::set<std::string> ids;
    try {
        for (const json& item : j) {
            ManifestEntry e;
            e.id = item.at("id").get<std::string>();
            e.skeleton = item.at("skeleton").get<std::string>();
            e.labels = item.at("labels").get<std::string>();
            if (item.contains("features")) e.features = item["features"].get<std::string>();
            e.split = item.at("split").get<std::string>();
            if (e.split != "train" && e.split != "test")
                throw ValidationError("entry " + e.id + " has unknown split \"" + e.split + "\"");
            if (!ids.insert(e.id).second)
                throw ValidationError("duplicate sequence id " + e.id);
            manifest.entries.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw ValidationError("invalid manifest " + path + ": " + e.what());
    }
    for (const ManifestEntry& e : manifest.entries) {
        for (const std::string& rel : {e.skeleton, e.labels, e.features}) {
            if (rel.empty()) continue;
            const std::string full = manifest.resolve(rel);
            if (!fs::exists(full))
                throw ValidationError("manifest entry " + e.id + " references missing file " + full);
        }
    }
    return manifest;
}

void save_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
    json j = json::array();
    for (const ManifestEntry& e : entries) {
        json item;
        item["id"] = e.id;
        item["skeleton"] = e.skeleton;
        item["labels"] = e.labels;
        if (!e.features.empty()) item["features"] = e.features;
        item["split"] = e.split;
        j.push_back(std::move(item));
    }
    write_text_file(path, j.dump(2) + "\n");
}

} // namespace segtcn
