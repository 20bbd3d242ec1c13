// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#include "segtcn/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "segtcn/error.hpp"
#include "segtcn/kernels.hpp"

namespace segtcn {

namespace {

float decay_rate(const RasterConfig& cfg) {
    return static_cast<float>(1.0 / (2.0 * cfg.sigma * cfg.sigma));
}

// Squared distance from each pixel center in the window to the joint.
void joint_distance_sq(const Joint& j, int x0, int y0, int w, int h, float* out) {
    for (int yy = 0; yy < h; ++yy) {
        const double dy = (y0 + yy) - j.y;
        const double dy2 = dy * dy;
        float* row = out + static_cast<std::size_t>(yy) * w;
        for (int xx = 0; xx < w; ++xx) {
            const double dx = (x0 + xx) - j.x;
            row[xx] = static_cast<float>(dx * dx + dy2);
        }
    }
}

// Point-to-segment distance (or its square) per pixel center.
void limb_distance(const Joint& a, const Joint& b, bool squared, int x0, int y0,
                   int w, int h, float* out) {
    const double vx = b.x - a.x;
    const double vy = b.y - a.y;
    const double vv = vx * vx + vy * vy;
    for (int yy = 0; yy < h; ++yy) {
        const double py = y0 + yy;
        float* row = out + static_cast<std::size_t>(yy) * w;
        for (int xx = 0; xx < w; ++xx) {
            const double wx = (x0 + xx) - a.x;
            const double wy = py - a.y;
            double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            const double dx = wx - t * vx;
            const double dy = wy - t * vy;
            const double d2 = dx * dx + dy * dy;
            row[xx] = static_cast<float>(squared ? d2 : std::sqrt(d2));
        }
    }
}

int mode_channels(const SkeletonSequence& seq, HeatmapMode mode) {
    switch (mode) {
        case HeatmapMode::joint: return seq.joint_count();
        case HeatmapMode::limb: return seq.topology.limb_count();
        case HeatmapMode::combined: return seq.joint_count() + seq.topology.limb_count();
    }
    return 0;
}

// Rasterizes the selected channels of one frame into out (channel-major,
// window [x0,x0+w) x [y0,y0+h)). Shared by the full-frame ops and the
// streaming pipeline so both produce identical bits.
void raster_frame(const std::vector<Joint>& joints, const LimbTopology& topo,
                  const RasterConfig& cfg, HeatmapMode mode, int x0, int y0,
                  int w, int h, std::vector<float>& dist_scratch, float* out) {
    const float rate = decay_rate(cfg);
    const std::size_t plane = static_cast<std::size_t>(w) * h;
    dist_scratch.resize(plane);
    std::size_t ch = 0;
    if (mode == HeatmapMode::joint || mode == HeatmapMode::combined) {
        for (std::size_t k = 0; k < joints.size(); ++k, ++ch) {
            float* dst = out + ch * plane;
            const Joint& j = joints[k];
            if (j.c == 0.0) {
                std::fill(dst, dst + plane, 0.0f);
                continue;
            }
            joint_distance_sq(j, x0, y0, w, h, dist_scratch.data());
            kernels::exp_decay(dist_scratch.data(), plane, rate,
                               static_cast<float>(j.c), dst);
        }
    }
    if (mode == HeatmapMode::limb || mode == HeatmapMode::combined) {
        const bool squared = cfg.distance_mode == DistanceMode::squared;
        for (const Limb& limb : topo.limbs) {
            float* dst = out + ch * plane;
            ++ch;
            const Joint& a = joints[limb.a];
            const Joint& b = joints[limb.b];
            const double conf = std::min(a.c, b.c);
            if (conf == 0.0) {
                std::fill(dst, dst + plane, 0.0f);
                continue;
            }
            limb_distance(a, b, squared, x0, y0, w, h, dist_scratch.data());
            kernels::exp_decay(dist_scratch.data(), plane, rate,
                               static_cast<float>(conf), dst);
        }
    }
}

HeatmapClip full_frame_clip(const SkeletonSequence& seq, const RasterConfig& cfg,
                            HeatmapMode mode) {
    if (cfg.sigma <= 0.0) throw ValidationError("sigma must be positive");
    HeatmapClip clip;
    clip.width = seq.width;
    clip.height = seq.height;
    clip.channels = mode_channels(seq, mode);
    clip.frames.resize(seq.frame_count());
    std::vector<float> scratch;
    const std::size_t frame_size =
        static_cast<std::size_t>(clip.channels) * clip.height * clip.width;
    for (int m = 0; m < seq.frame_count(); ++m) {
        clip.frames[m].resize(frame_size);
        raster_frame(seq.frames[m], seq.topology, cfg, mode, 0, 0, clip.width,
                     clip.height, scratch, clip.frames[m].data());
    }
    return clip;
}

// Peak-normalize the per-frame summed maps, resize, replicate.
HeatmapClip finalize_summed(std::vector<std::vector<float>>&& summed, int bw, int bh,
                            const RasterConfig& cfg) {
    float peak = 0.0f;
    for (const auto& map : summed)
        for (float v : map) peak = std::max(peak, v);
    const float denom = std::max(peak, 1e-12f);

    HeatmapClip out;
    out.width = cfg.out_size;
    out.height = cfg.out_size;
    out.channels = cfg.replicate_channels;
    out.frames.resize(summed.size());
    const std::size_t plane = static_cast<std::size_t>(cfg.out_size) * cfg.out_size;
    std::vector<float> resized(plane);
    for (std::size_t m = 0; m < summed.size(); ++m) {
        for (float& v : summed[m]) v = v / denom;
        bilinear_resize(summed[m].data(), bw, bh, resized.data(), cfg.out_size,
                        cfg.out_size);
        out.frames[m].resize(plane * cfg.replicate_channels);
        for (int ch = 0; ch < cfg.replicate_channels; ++ch)
            std::copy(resized.begin(), resized.end(),
                      out.frames[m].begin() + ch * plane);
    }
    return out;
}

} // namespace

const char* heatmap_mode_name(HeatmapMode mode) {
    switch (mode) {
        case HeatmapMode::joint: return "joint";
        case HeatmapMode::limb: return "limb";
        case HeatmapMode::combined: return "joint+limb";
    }
    return "joint+limb";
}

HeatmapMode parse_heatmap_mode(const std::string& name) {
    if (name == "joint") return HeatmapMode::joint;
    if (name == "limb") return HeatmapMode::limb;
    if (name == "joint+limb" || name == "combined") return HeatmapMode::combined;
    throw ValidationError("unknown heatmap mode: " + name);
}

HeatmapClip joint_heatmap(const SkeletonSequence& seq, const RasterConfig& cfg) {
    return full_frame_clip(seq, cfg, HeatmapMode::joint);
}

HeatmapClip limb_heatmap(const SkeletonSequence& seq, const RasterConfig& cfg) {
    if (seq.topology.limb_count() < 1)
        throw ValidationError("topology has no limbs");
    return full_frame_clip(seq, cfg, HeatmapMode::limb);
}

HeatmapClip combined_heatmap(const SkeletonSequence& seq, const RasterConfig& cfg) {
    return full_frame_clip(seq, cfg, HeatmapMode::combined);
}

CropBox video_crop_box(const SkeletonSequence& seq, const RasterConfig& cfg) {
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
    bool any = false;
    for (const auto& frame : seq.frames) {
        for (const Joint& j : frame) {
            if (j.c <= 0.0) continue;
            if (!any) {
                min_x = max_x = j.x;
                min_y = max_y = j.y;
                any = true;
            } else {
                min_x = std::min(min_x, j.x);
                max_x = std::max(max_x, j.x);
                min_y = std::min(min_y, j.y);
                max_y = std::max(max_y, j.y);
            }
        }
    }
    if (!any) throw ValidationError("empty skeleton video");

    CropBox box;
    box.x0 = std::max(0, static_cast<int>(std::floor(min_x)) - cfg.crop_padding);
    box.y0 = std::max(0, static_cast<int>(std::floor(min_y)) - cfg.crop_padding);
    box.x1 = std::min(seq.width - 1, static_cast<int>(std::ceil(max_x)) + cfg.crop_padding);
    box.y1 = std::min(seq.height - 1, static_cast<int>(std::ceil(max_y)) + cfg.crop_padding);
    // box edges can collapse when joints sit on a frame border with zero padding
    if (box.x0 >= box.x1) {
        if (box.x1 < seq.width - 1) ++box.x1;
        else if (box.x0 > 0) --box.x0;
        else throw ValidationError("degenerate crop box: frame too small");
    }
    if (box.y0 >= box.y1) {
        if (box.y1 < seq.height - 1) ++box.y1;
        else if (box.y0 > 0) --box.y0;
        else throw ValidationError("degenerate crop box: frame too small");
    }
    return box;
}

HeatmapClip collapse_and_resize(const HeatmapClip& clip, const CropBox& box,
                                const RasterConfig& cfg) {
    if (box.x0 < 0 || box.y0 < 0 || box.x1 >= clip.width || box.y1 >= clip.height ||
        box.x0 >= box.x1 || box.y0 >= box.y1)
        throw ValidationError("crop box outside raster extent");
    const int bw = box.width();
    const int bh = box.height();
    std::vector<std::vector<float>> summed(clip.frame_count());
    for (int m = 0; m < clip.frame_count(); ++m) {
        summed[m].assign(static_cast<std::size_t>(bw) * bh, 0.0f);
        for (int ch = 0; ch < clip.channels; ++ch) {
            const float* src = clip.channel(m, ch);
            for (int yy = 0; yy < bh; ++yy)
                kernels::accumulate(src + static_cast<std::size_t>(box.y0 + yy) * clip.width + box.x0,
                                    bw, summed[m].data() + static_cast<std::size_t>(yy) * bw);
        }
    }
    return finalize_summed(std::move(summed), bw, bh, cfg);
}

HeatmapClip rasterize_pipeline(const SkeletonSequence& seq, const RasterConfig& cfg,
                               HeatmapMode mode) {
    if (cfg.sigma <= 0.0) throw ValidationError("sigma must be positive");
    if (mode != HeatmapMode::joint && seq.topology.limb_count() < 1)
        throw ValidationError("topology has no limbs");
    const CropBox box = video_crop_box(seq, cfg);
    const int bw = box.width();
    const int bh = box.height();
    const std::size_t plane = static_cast<std::size_t>(bw) * bh;
    const int channels = mode_channels(seq, mode);

    std::vector<std::vector<float>> summed(seq.frame_count());
    std::vector<float> scratch;
    std::vector<float> chan(plane * channels);
    for (int m = 0; m < seq.frame_count(); ++m) {
        raster_frame(seq.frames[m], seq.topology, cfg, mode, box.x0, box.y0, bw, bh,
                     scratch, chan.data());
        summed[m].assign(plane, 0.0f);
        for (int ch = 0; ch < channels; ++ch)
            kernels::accumulate(chan.data() + ch * plane, plane, summed[m].data());
    }
    return finalize_summed(std::move(summed), bw, bh, cfg);
}

FeatureTrack pooled_encoder(const HeatmapClip& clip, int grid) {
    if (clip.width != clip.height)
        throw ValidationError("pooled encoder requires square frames");
    if (grid < 1 || clip.width % grid != 0)
        throw ValidationError("grid " + std::to_string(grid) + " does not divide side length " +
                              std::to_string(clip.width));
    if (clip.channels < 1) throw ValidationError("clip has no channels");
    const int cell = clip.width / grid;
    const double inv_area = 1.0 / (static_cast<double>(cell) * cell);

    FeatureTrack track;
    track.dim = grid * grid;
    track.values.resize(static_cast<std::size_t>(clip.frame_count()) * track.dim);
    for (int m = 0; m < clip.frame_count(); ++m) {
        const float* src = clip.channel(m, 0);
        float* dst = track.values.data() + static_cast<std::size_t>(m) * track.dim;
        for (int gy = 0; gy < grid; ++gy) {
            for (int gx = 0; gx < grid; ++gx) {
                double acc = 0.0;
                for (int yy = 0; yy < cell; ++yy) {
                    const float* row = src + static_cast<std::size_t>(gy * cell + yy) * clip.width +
                                       static_cast<std::size_t>(gx) * cell;
                    for (int xx = 0; xx < cell; ++xx) acc += row[xx];
                }
                dst[gy * grid + gx] = static_cast<float>(acc * inv_area);
            }
        }
    }
    return track;
}

void bilinear_resize(const float* src, int src_w, int src_h, float* dst,
                     int dst_w, int dst_h) {
    const double sx_scale = static_cast<double>(src_w) / dst_w;
    const double sy_scale = static_cast<double>(src_h) / dst_h;
    for (int oy = 0; oy < dst_h; ++oy) {
        const double sy = (oy + 0.5) * sy_scale - 0.5;
        const int y0 = static_cast<int>(std::floor(sy));
        const double fy = sy - y0;
        const int y0c = std::clamp(y0, 0, src_h - 1);
        const int y1c = std::clamp(y0 + 1, 0, src_h - 1);
        for (int ox = 0; ox < dst_w; ++ox) {
            const double sx = (ox + 0.5) * sx_scale - 0.5;
            const int x0 = static_cast<int>(std::floor(sx));
            const double fx = sx - x0;
            const int x0c = std::clamp(x0, 0, src_w - 1);
            const int x1c = std::clamp(x0 + 1, 0, src_w - 1);
            const double top = (1.0 - fx) * src[y0c * src_w + x0c] + fx * src[y0c * src_w + x1c];
            const double bot = (1.0 - fx) * src[y1c * src_w + x0c] + fx * src[y1c * src_w + x1c];
            dst[oy * dst_w + ox] = static_cast<float>((1.0 - fy) * top + fy * bot);
        }
    }
}

void save_hmap(const std::string& path, const HeatmapClip& clip) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot open file for writing: " + path);
    out << "HMAP v1 " << clip.frame_count() << ' ' << clip.height << ' ' << clip.width
        << ' ' << clip.channels << " f32le\n";
    const std::size_t plane = static_cast<std::size_t>(clip.height) * clip.width;
    std::vector<float> interleaved(plane * clip.channels);
    for (int m = 0; m < clip.frame_count(); ++m) {
        const std::vector<float>& frame = clip.frames[m];
        for (std::size_t p = 0; p < plane; ++p)
            for (int ch = 0; ch < clip.channels; ++ch)
                interleaved[p * clip.channels + ch] = frame[ch * plane + p];
        out.write(reinterpret_cast<const char*>(interleaved.data()),
                  static_cast<std::streamsize>(interleaved.size() * sizeof(float)));
    }
    if (!out) throw RuntimeError("write failed: " + path);
}

HeatmapClip load_hmap(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open raster file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw ValidationError("missing HMAP header in " + path);
    std::istringstream hs(header);
    std::string magic, version, layout;
    long frames = 0, h = 0, w = 0, ch = 0;
    hs >> magic >> version >> frames >> h >> w >> ch >> layout;
    if (!hs || magic != "HMAP" || version != "v1" || layout != "f32le")
        throw ValidationError("bad HMAP header in " + path + ": " + header);
    if (frames < 1 || h < 1 || w < 1 || ch < 1)
        throw ValidationError("HMAP dimensions must be positive in " + path);

    HeatmapClip clip;
    clip.width = static_cast<int>(w);
    clip.height = static_cast<int>(h);
    clip.channels = static_cast<int>(ch);
    clip.frames.resize(frames);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    std::vector<float> interleaved(plane * ch);
    for (long m = 0; m < frames; ++m) {
        in.read(reinterpret_cast<char*>(interleaved.data()),
                static_cast<std::streamsize>(interleaved.size() * sizeof(float)));
        if (in.gcount() != static_cast<std::streamsize>(interleaved.size() * sizeof(float)))
            throw ValidationError("truncated HMAP payload in " + path);
        clip.frames[m].resize(interleaved.size());
        for (std::size_t p = 0; p < plane; ++p)
            for (long c = 0; c < ch; ++c)
                clip.frames[m][c * plane + p] = interleaved[p * ch + c];
    }
    return clip;
}

} // namespace segtcn
