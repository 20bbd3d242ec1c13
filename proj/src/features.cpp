// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#include "segtcn/features.hpp"

#include <fstream>
#include <sstream>

#include "segtcn/error.hpp"

namespace segtcn {

FeatureTrack load_feature_track(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open feature file: " + path);
    std::string header;
    if (!std::getline(in, header))
        throw ValidationError("missing FEAT header in " + path);
    std::istringstream hs(header);
    std::string magic, version, layout;
    long frames = 0, dim = 0;
    hs >> magic >> version >> frames >> dim >> layout;
    if (!hs || magic != "FEAT" || version != "v1" || layout != "f32le")
        throw ValidationError("bad FEAT header in " + path + ": " + header);
    if (frames < 1 || dim < 1)
        throw ValidationError("FEAT dimensions must be positive in " + path);
    FeatureTrack track;
    track.dim = static_cast<int>(dim);
    track.values.resize(static_cast<std::size_t>(frames) * dim);
    in.read(reinterpret_cast<char*>(track.values.data()),
            static_cast<std::streamsize>(track.values.size() * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(track.values.size() * sizeof(float)))
        throw ValidationError("truncated feature payload in " + path);
    return track;
}

void save_feature_track(const std::string& path, const FeatureTrack& track) {
    if (track.dim < 1 || track.values.size() % track.dim != 0)
        throw ValidationError("feature track shape is inconsistent");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot open file for writing: " + path);
    out << "FEAT v1 " << track.frame_count() << ' ' << track.dim << " f32le\n";
    out.write(reinterpret_cast<const char*>(track.values.data()),
              static_cast<std::streamsize>(track.values.size() * sizeof(float)));
    if (!out) throw RuntimeError("write failed: " + path);
}

} // namespace segtcn
