#pragma once

#include <cmath>
#include <vector>

#include "derm/common.hpp"
#include "derm/image.hpp"

namespace derm {

// Square kernel, row-major, unit sum.
struct Kernel {
    int size = 0;
    std::vector<double> w;
    double at(int i, int j) const { return w[static_cast<size_t>(i) * size + j]; }
};

// Isotropic zero-mean Gaussian sampled at integer offsets, then normalized.
inline Kernel gaussian_kernel(int k, double sigma) {
    if (k < 3 || (k % 2) == 0) throw Error("gaussian_kernel: size must be odd and >= 3");
    if (!(sigma > 0.0)) throw Error("gaussian_kernel: sigma must be positive");
    Kernel ker;
    ker.size = k;
    ker.w.resize(static_cast<size_t>(k) * k);
    const double c = (k - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            const double d2 = sq(i - c) + sq(j - c);
            const double v = std::exp(-d2 / (2.0 * sigma * sigma));
            ker.w[static_cast<size_t>(i) * k + j] = v;
            sum += v;
        }
    }
    for (double& v : ker.w) v /= sum;
    return ker;
}

// Direct 2-D convolution with clamp-to-edge borders. Interior pixels take the
// unclamped fast path; only the border band pays for clamping.
inline std::vector<float> convolve(const std::vector<float>& in, int width, int height,
                                   const Kernel& ker) {
    if (width < ker.size || height < ker.size)
        throw Error("convolve: plane smaller than kernel");
    if (in.size() != static_cast<size_t>(width) * height)
        throw Error("convolve: plane size mismatch");
    std::vector<float> out(in.size());
    const int k = ker.size;
    const int r = k / 2;

    auto clamped = [&](int x, int y) {
        x = std::max(0, std::min(width - 1, x));
        y = std::max(0, std::min(height - 1, y));
        return in[static_cast<size_t>(y) * width + x];
    };

    for (int y = 0; y < height; ++y) {
        const bool y_interior = y >= r && y < height - r;
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            if (y_interior && x >= r && x < width - r) {
                const float* base = in.data() + static_cast<size_t>(y - r) * width + (x - r);
                const double* kw = ker.w.data();
                for (int i = 0; i < k; ++i, base += width) {
                    for (int j = 0; j < k; ++j) acc += kw[j] * base[j];
                    kw += k;
                }
            } else {
                for (int i = 0; i < k; ++i)
                    for (int j = 0; j < k; ++j)
                        acc += ker.at(i, j) * clamped(x + j - r, y + i - r);
            }
            out[static_cast<size_t>(y) * width + x] = static_cast<float>(acc);
        }
    }
    return out;
}

inline PlanarImage convolve(const PlanarImage& img, const Kernel& ker) {
    PlanarImage out(img.width, img.height);
    for (int c = 0; c < 3; ++c) out.plane[c] = convolve(img.plane[c], img.width, img.height, ker);
    return out;
}

}  // namespace derm
