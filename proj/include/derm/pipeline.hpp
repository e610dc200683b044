#pragma once

#include <chrono>

#include "derm/common.hpp"
#include "derm/features.hpp"
#include "derm/gaussian.hpp"
#include "derm/image.hpp"
#include "derm/level_set.hpp"

namespace derm {

struct PreprocessConfig {
    int kernel_size = 5;
    double sigma = 1.0;
    int resize_long_edge = 0;  // 0 = keep native resolution (dataset images)
};

struct PipelineConfig {
    PreprocessConfig pre;
    SegmentationParams seg;
    FeatureConfig feat;
};

// Optional resize for captured photos, then Y'UV conversion and Gaussian
// smoothing of all three planes. The returned image is what was actually
// processed (post-resize), for feature color analysis and overlays.
inline RgbImage apply_resize(const RgbImage& img, const PreprocessConfig& cfg) {
    if (cfg.resize_long_edge <= 0) return img;
    const int long_edge = std::max(img.width, img.height);
    if (long_edge == cfg.resize_long_edge) return img;
    const double s = static_cast<double>(cfg.resize_long_edge) / long_edge;
    const int w = std::max(8, static_cast<int>(std::lround(img.width * s)));
    const int h = std::max(8, static_cast<int>(std::lround(img.height * s)));
    return resize_bilinear(img, w, h);
}

// Nearest-neighbor companion to apply_resize so ground-truth masks track the
// processed image geometry.
inline BinaryMask apply_resize_mask(const BinaryMask& mask, const PreprocessConfig& cfg) {
    if (cfg.resize_long_edge <= 0) return mask;
    const int long_edge = std::max(mask.width, mask.height);
    if (long_edge == cfg.resize_long_edge) return mask;
    const double s = static_cast<double>(cfg.resize_long_edge) / long_edge;
    const int w = std::max(8, static_cast<int>(std::lround(mask.width * s)));
    const int h = std::max(8, static_cast<int>(std::lround(mask.height * s)));
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        const int sy = std::min(mask.height - 1,
                                static_cast<int>(std::lround(static_cast<double>(y) *
                                                             (mask.height - 1) /
                                                             std::max(1, h - 1))));
        for (int x = 0; x < w; ++x) {
            const int sx = std::min(mask.width - 1,
                                    static_cast<int>(std::lround(static_cast<double>(x) *
                                                                 (mask.width - 1) /
                                                                 std::max(1, w - 1))));
            out.set(x, y, mask.at(sx, sy));
        }
    }
    return out;
}

inline PlanarImage preprocess(const RgbImage& img, const PreprocessConfig& cfg) {
    const Kernel ker = gaussian_kernel(cfg.kernel_size, cfg.sigma);
    return convolve(rgb_to_yuv(img), ker);
}

struct StageTimesMs {
    double preprocess = 0.0;
    double segment = 0.0;
    double features = 0.0;
    double classify = 0.0;
    double total = 0.0;
};

struct AnalyzeResult {
    RgbImage processed;  // post-resize input
    BinaryMask mask;
    int iterations = 0;
    FeatureAnalysis analysis;
    StageTimesMs times;
};

namespace pipe_detail {
inline double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}
}  // namespace pipe_detail

// Full image -> features run with per-stage wall-clock times.
inline AnalyzeResult analyze_image(const RgbImage& input, const PipelineConfig& cfg,
                                   const SnapshotFn& snapshot = nullptr) {
    AnalyzeResult out;
    out.processed = apply_resize(input, cfg.pre);

    auto t0 = std::chrono::steady_clock::now();
    const PlanarImage planes = preprocess(out.processed, cfg.pre);
    out.times.preprocess = pipe_detail::ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    EvolveResult seg = evolve(planes, cfg.seg, snapshot);
    out.times.segment = pipe_detail::ms_since(t0);
    out.mask = std::move(seg.mask);
    out.iterations = seg.iterations_used;

    t0 = std::chrono::steady_clock::now();
    out.analysis = extract_features_full(out.processed, out.mask, cfg.feat);
    out.times.features = pipe_detail::ms_since(t0);

    out.times.total = out.times.preprocess + out.times.segment + out.times.features;
    return out;
}

}  // namespace derm
