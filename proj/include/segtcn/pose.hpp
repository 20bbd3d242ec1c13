// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// Data model and file I/O for skeleton sequences, framewise labels, class
// maps, and dataset manifests.

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace segtcn {

struct Joint {
    double x = 0.0;
    double y = 0.0;
    double c = 0.0; // detection confidence in [0,1]; 0 marks a missing joint
};

enum class LimbGroup { left_arm, right_arm, left_leg, right_leg, torso_head };

const char* limb_group_name(LimbGroup g);
LimbGroup parse_limb_group(const std::string& name); // throws ValidationError

struct Limb {
    int a = 0;
    int b = 0;
    LimbGroup group = LimbGroup::torso_head;
};

struct LimbTopology {
    std::vector<std::string> joint_names; // size K
    std::vector<Limb> limbs;              // size L
    int joint_count() const { return static_cast<int>(joint_names.size()); }
    int limb_count() const { return static_cast<int>(limbs.size()); }
};

struct SkeletonSequence {
    int width = 0;  // frame width W in pixels
    int height = 0; // frame height H
    LimbTopology topology;
    std::vector<std::vector<Joint>> frames; // M frames of K joints each
    int frame_count() const { return static_cast<int>(frames.size()); }
    int joint_count() const { return topology.joint_count(); }
};

// Throws ValidationError naming the offending frame/joint/limb.
void validate_sequence(const SkeletonSequence& seq);

SkeletonSequence load_skeleton_sequence(const std::string& path);
void save_skeleton_sequence(const std::string& path, const SkeletonSequence& seq);

struct ClassMap {
    std::vector<std::string> names; // index = class id; ids are contiguous from 0
    int class_count() const { return static_cast<int>(names.size()); }
    int id_of(const std::string& name) const; // -1 when absent
};

ClassMap load_class_map(const std::string& path);
void save_class_map(const std::string& path, const ClassMap& map);

struct LabelTrack {
    std::vector<int> labels; // per-frame class ids in [0, C)
    std::vector<std::string> class_names;
    int frame_count() const { return static_cast<int>(labels.size()); }
    int class_count() const { return static_cast<int>(class_names.size()); }
};

LabelTrack load_label_track(const std::string& path, const ClassMap& map);
void save_label_track(const std::string& path, const LabelTrack& track);

struct Segment {
    int cls = 0;
    int start = 0; // first frame
    int end = 0;   // last frame, inclusive
    bool operator==(const Segment&) const = default;
};

// Maximal runs of equal labels, ordered by start frame.
std::vector<Segment> segments_of(const std::vector<int>& labels);

struct ManifestEntry {
    std::string id;
    std::string skeleton;
    std::string labels;
    std::string features; // optional auxiliary feature file; empty when absent
    std::string split;    // "train" or "test"
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::string base_dir; // directory of the manifest file; paths resolve against it

    std::string resolve(const std::string& relative) const;
    std::vector<const ManifestEntry*> split(const std::string& name) const;
};

DatasetManifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);

} // namespace segtcn
