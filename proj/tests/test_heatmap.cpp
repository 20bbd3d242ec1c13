// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// The raster oracles here recompute Gaussian values from scratch in double
// (including an independent point-to-segment distance) rather than calling
// any library helper, so a sign slip in the production kernels cannot hide.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"

#include "segtcn/error.hpp"
#include "segtcn/heatmap.hpp"
#include "segtcn/rng.hpp"
#include "test_util.hpp"

using namespace segtcn;
using testutil::TempDir;

namespace {

SkeletonSequence one_joint_sequence(double x, double y, double c, int w = 24, int h = 24) {
    SkeletonSequence seq;
    seq.width = w;
    seq.height = h;
    seq.topology.joint_names = {"p"};
    seq.frames = {{{x, y, c}}};
    return seq;
}

SkeletonSequence one_limb_sequence(double ax, double ay, double ca, double bx, double by,
                                   double cb, int w = 24, int h = 24) {
    SkeletonSequence seq;
    seq.width = w;
    seq.height = h;
    seq.topology.joint_names = {"a", "b"};
    seq.topology.limbs = {{0, 1, LimbGroup::torso_head}};
    seq.frames = {{{ax, ay, ca}, {bx, by, cb}}};
    return seq;
}

// Random three-joint, two-limb skeleton clip with coordinates on a 0.25 px
// grid (exactly representable, so mirrored differences stay exact).
SkeletonSequence random_sequence(Rng& rng, int frames, int w = 32, int h = 28) {
    SkeletonSequence seq;
    seq.width = w;
    seq.height = h;
    seq.topology.joint_names = {"a", "b", "c"};
    seq.topology.limbs = {{0, 1, LimbGroup::torso_head}, {1, 2, LimbGroup::left_arm}};
    for (int f = 0; f < frames; ++f) {
        std::vector<Joint> joints;
        for (int k = 0; k < 3; ++k) {
            Joint j;
            j.x = 0.25 * static_cast<double>(rng.below(static_cast<std::uint64_t>(4 * (w - 1))));
            j.y = 0.25 * static_cast<double>(rng.below(static_cast<std::uint64_t>(4 * (h - 1))));
            j.c = rng.below(8) == 0 ? 0.0 : rng.uniform(0.3, 1.0);
            joints.push_back(j);
        }
        seq.frames.push_back(joints);
    }
    return seq;
}

double oracle_point_segment_dist(double px, double py, double ax, double ay, double bx,
                                 double by) {
    const double vx = bx - ax, vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

float at(const HeatmapClip& clip, int frame, int ch, int col, int row) {
    return clip.channel(frame, ch)[row * clip.width + col];
}

} // namespace

TEST_CASE("joint heatmap matches the closed form") {
    RasterConfig cfg;
    const SkeletonSequence seq = one_joint_sequence(10.0, 10.0, 1.0);
    const HeatmapClip clip = joint_heatmap(seq, cfg);
    REQUIRE(clip.channels == 1);
    CHECK(at(clip, 0, 0, 10, 10) == 1.0f);
    CHECK(at(clip, 0, 0, 11, 10) ==
          doctest::Approx(std::exp(-1.0 / 0.72)).epsilon(0).scale(0).epsilon(1e-6));
    CHECK(at(clip, 0, 0, 11, 10) == doctest::Approx(0.24935).epsilon(1e-4));

    // Peak equals the confidence exactly for integral joint coordinates.
    const HeatmapClip dim = joint_heatmap(one_joint_sequence(10.0, 10.0, 0.7), cfg);
    CHECK(at(dim, 0, 0, 10, 10) == 0.7f);

    // Zero confidence blanks the channel.
    const HeatmapClip off = joint_heatmap(one_joint_sequence(10.0, 10.0, 0.0), cfg);
    for (float v : off.frames[0]) CHECK(v == 0.0f);
}

TEST_CASE("randomized joint probes agree with a double oracle") {
    RasterConfig cfg;
    cfg.sigma = 0.9;
    Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const SkeletonSequence seq = random_sequence(rng, 2);
        const HeatmapClip clip = joint_heatmap(seq, cfg);
        for (int probe = 0; probe < 30; ++probe) {
            const int f = static_cast<int>(rng.below(2));
            const int k = static_cast<int>(rng.below(3));
            const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(seq.width)));
            const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(seq.height)));
            const Joint& joint = seq.frames[f][k];
            const double dx = i - joint.x, dy = j - joint.y;
            const double want =
                joint.c == 0.0
                    ? 0.0
                    : std::exp(-(dx * dx + dy * dy) / (2.0 * cfg.sigma * cfg.sigma)) * joint.c;
            CHECK(std::fabs(at(clip, f, k, i, j) - want) <= 1e-6);
        }
    }
}

TEST_CASE("limb heatmap matches the segment-distance form in both modes") {
    RasterConfig cfg;
    // Horizontal limb from (5,10) to (15,10).
    const SkeletonSequence seq = one_limb_sequence(5, 10, 1.0, 15, 10, 0.5);

    const HeatmapClip lin = limb_heatmap(seq, cfg);
    REQUIRE(lin.channels == 1);
    // On the segment: value is min(c_a, c_b).
    CHECK(at(lin, 0, 0, 10, 10) == 0.5f);
    // Perpendicular distance 1 from the interior, linear mode.
    CHECK(at(lin, 0, 0, 10, 11) == doctest::Approx(std::exp(-1.0 / 0.72) * 0.5).epsilon(1e-6));
    CHECK(at(lin, 0, 0, 10, 11) == doctest::Approx(0.12468).epsilon(1e-4));
    // Beyond the endpoint the distance runs to the endpoint itself.
    CHECK(at(lin, 0, 0, 18, 14) ==
          doctest::Approx(std::exp(-5.0 / 0.72) * 0.5).epsilon(1e-6));

    RasterConfig sq = cfg;
    sq.distance_mode = DistanceMode::squared;
    const HeatmapClip sqr = limb_heatmap(seq, sq);
    // At distance 1 both modes coincide; at the endpoint-offset pixel the
    // squared mode uses dist^2 = 25.
    CHECK(at(sqr, 0, 0, 10, 11) == doctest::Approx(std::exp(-1.0 / 0.72) * 0.5).epsilon(1e-6));
    CHECK(at(sqr, 0, 0, 18, 14) ==
          doctest::Approx(std::exp(-25.0 / 0.72) * 0.5).epsilon(1e-6));

    // Either endpoint at zero confidence blanks the channel.
    const HeatmapClip off = limb_heatmap(one_limb_sequence(5, 10, 1.0, 15, 10, 0.0), cfg);
    for (float v : off.frames[0]) CHECK(v == 0.0f);

    CHECK_THROWS_AS(limb_heatmap(one_joint_sequence(3, 3, 1.0), cfg), ValidationError);
}

TEST_CASE("randomized limb probes agree with a double oracle") {
    Rng rng(202);
    for (int trial = 0; trial < 20; ++trial) {
        RasterConfig cfg;
        cfg.sigma = 0.8;
        cfg.distance_mode = trial % 2 == 0 ? DistanceMode::linear : DistanceMode::squared;
        const SkeletonSequence seq = random_sequence(rng, 2);
        const HeatmapClip clip = limb_heatmap(seq, cfg);
        for (int probe = 0; probe < 30; ++probe) {
            const int f = static_cast<int>(rng.below(2));
            const int l = static_cast<int>(rng.below(2));
            const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(seq.width)));
            const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(seq.height)));
            const Limb& limb = seq.topology.limbs[l];
            const Joint& a = seq.frames[f][limb.a];
            const Joint& b = seq.frames[f][limb.b];
            const double conf = std::min(a.c, b.c);
            const double dist = oracle_point_segment_dist(i, j, a.x, a.y, b.x, b.y);
            const double arg = cfg.distance_mode == DistanceMode::linear ? dist : dist * dist;
            const double want =
                conf == 0.0 ? 0.0 : std::exp(-arg / (2.0 * cfg.sigma * cfg.sigma)) * conf;
            CHECK(std::fabs(at(clip, f, l, i, j) - want) <= 1e-6);
        }
    }
}

TEST_CASE("combined heatmap concatenates joint then limb channels exactly") {
    RasterConfig cfg;
    Rng rng(303);
    const SkeletonSequence seq = random_sequence(rng, 3);
    const HeatmapClip joints = joint_heatmap(seq, cfg);
    const HeatmapClip limbs = limb_heatmap(seq, cfg);
    const HeatmapClip both = combined_heatmap(seq, cfg);
    REQUIRE(both.channels == joints.channels + limbs.channels);
    const std::size_t plane = static_cast<std::size_t>(both.width) * both.height;
    for (int f = 0; f < 3; ++f) {
        CHECK(std::memcmp(both.channel(f, 0), joints.frames[f].data(),
                          plane * joints.channels * sizeof(float)) == 0);
        CHECK(std::memcmp(both.channel(f, joints.channels), limbs.frames[f].data(),
                          plane * limbs.channels * sizeof(float)) == 0);
    }
}

TEST_CASE("crop box covers confident joints with padding and clamps") {
    RasterConfig cfg; // crop_padding 2
    SkeletonSequence seq;
    seq.topology.joint_names = {"a", "b", "c"};
    seq.frames = {{{20, 10, 1.0}, {40, 80, 0.9}, {90, 90, 0.0}}}; // c=0 ignored
    seq.width = 100;
    seq.height = 100;
    CropBox box = video_crop_box(seq, cfg);
    CHECK(box.x0 == 18);
    CHECK(box.y0 == 8);
    CHECK(box.x1 == 42);
    CHECK(box.y1 == 82);

    seq.width = 41;
    seq.height = 81;
    box = video_crop_box(seq, cfg);
    CHECK(box.x0 == 18);
    CHECK(box.y0 == 8);
    CHECK(box.x1 == 40);
    CHECK(box.y1 == 80);

    for (Joint& j : seq.frames[0]) j.c = 0.0;
    CHECK_THROWS_WITH_AS(video_crop_box(seq, cfg), "empty skeleton video", ValidationError);
}

TEST_CASE("collapse_and_resize replicates channels and guards zero videos") {
    RasterConfig cfg;
    const SkeletonSequence seq = one_joint_sequence(12.0, 9.0, 1.0);
    const HeatmapClip raw = joint_heatmap(seq, cfg);
    const HeatmapClip out = collapse_and_resize(raw, video_crop_box(seq, cfg), cfg);
    REQUIRE(out.channels == 3);
    CHECK(out.width == 56);
    CHECK(out.height == 56);
    const std::size_t plane = 56u * 56u;
    for (int f = 0; f < out.frame_count(); ++f) {
        CHECK(std::memcmp(out.channel(f, 0), out.channel(f, 1), plane * sizeof(float)) == 0);
        CHECK(std::memcmp(out.channel(f, 0), out.channel(f, 2), plane * sizeof(float)) == 0);
        for (std::size_t p = 0; p < plane; ++p) {
            CHECK(out.channel(f, 0)[p] >= 0.0f);
            CHECK(out.channel(f, 0)[p] <= 1.0f);
        }
    }

    // With an identity-sized resize the per-video peak divides to exactly 1.
    RasterConfig same = cfg;
    const CropBox box = video_crop_box(seq, cfg);
    REQUIRE(box.width() == box.height()); // padded square span by construction
    same.out_size = box.width();
    const HeatmapClip exact = collapse_and_resize(raw, box, same);
    float peak = 0.0f;
    for (float v : exact.frames[0]) peak = std::max(peak, v);
    CHECK(peak == 1.0f);

    HeatmapClip zeros = raw;
    for (auto& frame : zeros.frames) std::fill(frame.begin(), frame.end(), 0.0f);
    const HeatmapClip blank = collapse_and_resize(zeros, video_crop_box(seq, cfg), cfg);
    for (const auto& frame : blank.frames)
        for (float v : frame) CHECK(v == 0.0f);
}

TEST_CASE("bilinear resize matches a brute-force resampler") {
    Rng rng(404);
    for (int trial = 0; trial < 10; ++trial) {
        const int sw = 3 + static_cast<int>(rng.below(30));
        const int sh = 3 + static_cast<int>(rng.below(30));
        const int dw = 1 + static_cast<int>(rng.below(40));
        const int dh = 1 + static_cast<int>(rng.below(40));
        std::vector<float> src(static_cast<std::size_t>(sw) * sh);
        for (float& v : src) v = static_cast<float>(rng.uniform01());
        std::vector<float> dst(static_cast<std::size_t>(dw) * dh);
        bilinear_resize(src.data(), sw, sh, dst.data(), dw, dh);

        for (int j = 0; j < dh; ++j)
            for (int i = 0; i < dw; ++i) {
                const double sx = (i + 0.5) * sw / dw - 0.5;
                const double sy = (j + 0.5) * sh / dh - 0.5;
                const double cx = std::clamp(sx, 0.0, sw - 1.0);
                const double cy = std::clamp(sy, 0.0, sh - 1.0);
                const int x0 = static_cast<int>(std::floor(cx));
                const int y0 = static_cast<int>(std::floor(cy));
                const int x1 = std::min(x0 + 1, sw - 1);
                const int y1 = std::min(y0 + 1, sh - 1);
                const double fx = cx - x0, fy = cy - y0;
                const double want =
                    (1 - fy) * ((1 - fx) * src[y0 * sw + x0] + fx * src[y0 * sw + x1]) +
                    fy * ((1 - fx) * src[y1 * sw + x0] + fx * src[y1 * sw + x1]);
                CHECK(std::fabs(dst[static_cast<std::size_t>(j) * dw + i] - want) <= 1e-6);
            }
    }
}

TEST_CASE("downsample then upsample keeps the peak within one pixel") {
    // A broad Gaussian on a 112x112 grid survives a 56px round trip.
    const int n = 112;
    std::vector<float> big(static_cast<std::size_t>(n) * n);
    const double px = 40.0, py = 67.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            big[static_cast<std::size_t>(j) * n + i] = static_cast<float>(
                std::exp(-((i - px) * (i - px) + (j - py) * (j - py)) / (2.0 * 36.0)));
    std::vector<float> small(56u * 56u), back(big.size());
    bilinear_resize(big.data(), n, n, small.data(), 56, 56);
    bilinear_resize(small.data(), 56, 56, back.data(), n, n);
    const auto argmax = std::max_element(back.begin(), back.end()) - back.begin();
    const int ax = static_cast<int>(argmax % n), ay = static_cast<int>(argmax / n);
    CHECK(std::abs(ax - 40) <= 1);
    CHECK(std::abs(ay - 67) <= 1);
}

TEST_CASE("streaming pipeline is bit-identical to the composed ops") {
    Rng rng(505);
    for (int trial = 0; trial < 5; ++trial) {
        RasterConfig cfg;
        cfg.sigma = 0.6 + 0.3 * trial;
        const SkeletonSequence seq = random_sequence(rng, 4);
        for (HeatmapMode mode : {HeatmapMode::joint, HeatmapMode::limb, HeatmapMode::combined}) {
            const HeatmapClip streamed = rasterize_pipeline(seq, cfg, mode);
            const HeatmapClip raw = mode == HeatmapMode::joint  ? joint_heatmap(seq, cfg)
                                    : mode == HeatmapMode::limb ? limb_heatmap(seq, cfg)
                                                                : combined_heatmap(seq, cfg);
            const HeatmapClip composed =
                collapse_and_resize(raw, video_crop_box(seq, cfg), cfg);
            REQUIRE(streamed.frame_count() == composed.frame_count());
            for (int f = 0; f < streamed.frame_count(); ++f)
                CHECK(std::memcmp(streamed.frames[f].data(), composed.frames[f].data(),
                                  streamed.frames[f].size() * sizeof(float)) == 0);
        }
    }
}

TEST_CASE("confidence scaling by a power of two scales rasters exactly") {
    RasterConfig cfg;
    cfg.sigma = 2.0; // keeps every raster value comfortably normal
    Rng rng(606);
    SkeletonSequence seq = random_sequence(rng, 2, 12, 12);
    for (auto& frame : seq.frames)
        for (Joint& j : frame)
            if (j.c > 0.0) j.c = std::max(j.c, 0.5);
    SkeletonSequence half = seq;
    for (auto& frame : half.frames)
        for (Joint& j : frame) j.c *= 0.5;

    for (auto make : {joint_heatmap, limb_heatmap}) {
        const HeatmapClip full = make(seq, cfg);
        const HeatmapClip scaled = make(half, cfg);
        for (int f = 0; f < full.frame_count(); ++f)
            for (std::size_t p = 0; p < full.frames[f].size(); ++p)
                CHECK(scaled.frames[f][p] == 0.5f * full.frames[f][p]);
    }
}

TEST_CASE("mirrored skeletons rasterize to mirrored joint heatmaps") {
    RasterConfig cfg;
    Rng rng(707);
    const SkeletonSequence seq = random_sequence(rng, 2);
    SkeletonSequence mirror = seq;
    for (auto& frame : mirror.frames)
        for (Joint& j : frame) j.x = (seq.width - 1) - j.x;
    const HeatmapClip a = joint_heatmap(seq, cfg);
    const HeatmapClip b = joint_heatmap(mirror, cfg);
    for (int f = 0; f < a.frame_count(); ++f)
        for (int k = 0; k < a.channels; ++k)
            for (int row = 0; row < a.height; ++row)
                for (int col = 0; col < a.width; ++col)
                    CHECK(at(a, f, k, col, row) == at(b, f, k, a.width - 1 - col, row));
}

TEST_CASE("joint channel argmax lands on the nearest pixel") {
    RasterConfig cfg;
    Rng rng(808);
    for (int trial = 0; trial < 25; ++trial) {
        // Keep the joint away from exact .5 ties so the nearest pixel is unique.
        const double x = 2.0 + rng.below(20) + 0.25;
        const double y = 2.0 + rng.below(20) + 0.25;
        const HeatmapClip clip = joint_heatmap(one_joint_sequence(x, y, 0.9, 28, 28), cfg);
        const auto& f = clip.frames[0];
        const auto argmax = std::max_element(f.begin(), f.end()) - f.begin();
        CHECK(argmax % clip.width == std::lround(x));
        CHECK(argmax / clip.width == std::lround(y));
    }
}

TEST_CASE("pooled encoder averages cells row-major") {
    RasterConfig cfg;
    HeatmapClip clip;
    clip.width = clip.height = 56;
    clip.channels = 1;
    clip.frames.assign(2, std::vector<float>(56u * 56u, 0.0f));

    SUBCASE("constant frame pools to the constant") {
        std::fill(clip.frames[0].begin(), clip.frames[0].end(), 0.25f);
        const FeatureTrack feat = pooled_encoder(clip, 7);
        CHECK(feat.dim == 49);
        CHECK(feat.frame_count() == 2);
        for (int d = 0; d < 49; ++d) CHECK(feat.frame(0)[d] == 0.25f);
    }
    SUBCASE("unit pixel contributes 1/64 of its cell") {
        clip.frames[0][0] = 1.0f;
        const FeatureTrack feat = pooled_encoder(clip, 7);
        CHECK(feat.frame(0)[0] == 1.0f / 64.0f);
        for (int d = 1; d < 49; ++d) CHECK(feat.frame(0)[d] == 0.0f);
    }
    SUBCASE("grid must divide the side length") {
        CHECK_THROWS_AS(pooled_encoder(clip, 9), ValidationError);
        CHECK_THROWS_AS(pooled_encoder(clip, 5), ValidationError);
        CHECK(pooled_encoder(clip, 8).dim == 64);
        CHECK(pooled_encoder(clip, 7).dim == 49);
    }
}

TEST_CASE("hmap files round trip bit-exactly and reject corruption") {
    TempDir dir("heatmap_io");
    RasterConfig cfg;
    Rng rng(909);
    const SkeletonSequence seq = random_sequence(rng, 3);
    const HeatmapClip clip = rasterize_pipeline(seq, cfg, HeatmapMode::combined);
    const std::string path = dir.file("clip.hmap");
    save_hmap(path, clip);

    const std::string raw = testutil::slurp(path);
    CHECK(raw.substr(0, raw.find('\n')) == "HMAP v1 3 56 56 3 f32le");

    const HeatmapClip back = load_hmap(path);
    REQUIRE(back.frame_count() == clip.frame_count());
    CHECK(back.width == clip.width);
    CHECK(back.height == clip.height);
    CHECK(back.channels == clip.channels);
    for (int f = 0; f < clip.frame_count(); ++f)
        CHECK(std::memcmp(back.frames[f].data(), clip.frames[f].data(),
                          clip.frames[f].size() * sizeof(float)) == 0);

    testutil::spit(dir.file("bad.hmap"), "FEAT v1 1 2 f32le\n\0\0\0\0");
    CHECK_THROWS_AS(load_hmap(dir.file("bad.hmap")), ValidationError);
    testutil::spit(dir.file("short.hmap"), "HMAP v1 2 4 4 1 f32le\nxx");
    CHECK_THROWS_AS(load_hmap(dir.file("short.hmap")), ValidationError);
}

TEST_CASE("heatmap mode names round trip") {
    CHECK(parse_heatmap_mode("joint") == HeatmapMode::joint);
    CHECK(parse_heatmap_mode("limb") == HeatmapMode::limb);
    CHECK(parse_heatmap_mode("joint+limb") == HeatmapMode::combined);
    CHECK(parse_heatmap_mode(heatmap_mode_name(HeatmapMode::combined)) == HeatmapMode::combined);
    CHECK_THROWS_AS(parse_heatmap_mode("rgb"), ValidationError);
}
