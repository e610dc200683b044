#pragma once

#include <cstdint>
#include <vector>

#include "derm/common.hpp"

namespace derm {

// Dense binary raster; uint8 cells (not vector<bool>) for scan speed.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<size_t>(w) * h, 0) {}

    bool at(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    bool empty() const { return bits.empty(); }

    size_t area() const {
        size_t n = 0;
        for (uint8_t b : bits) n += b;
        return n;
    }

    bool operator==(const BinaryMask&) const = default;
};

inline PointD centroid(const BinaryMask& m) {
    double sx = 0.0, sy = 0.0;
    size_t n = 0;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.at(x, y)) {
                sx += x;
                sy += y;
                ++n;
            }
    if (n == 0) throw Error("centroid: empty mask");
    return {sx / n, sy / n};
}

// Keeps only the largest 4-connected component (first in scan order on ties).
inline BinaryMask largest_component(const BinaryMask& m) {
    BinaryMask out(m.width, m.height);
    std::vector<int32_t> label(m.bits.size(), -1);
    std::vector<uint32_t> stack;
    int32_t next = 0;
    size_t best_count = 0;
    int32_t best_label = -1;

    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            const size_t i = static_cast<size_t>(y) * m.width + x;
            if (!m.bits[i] || label[i] >= 0) continue;
            const int32_t cur = next++;
            size_t count = 0;
            stack.clear();
            stack.push_back(static_cast<uint32_t>(i));
            label[i] = cur;
            while (!stack.empty()) {
                const uint32_t p = stack.back();
                stack.pop_back();
                ++count;
                const int px = static_cast<int>(p % m.width);
                const int py = static_cast<int>(p / m.width);
                const int nx[4] = {px - 1, px + 1, px, px};
                const int ny[4] = {py, py, py - 1, py + 1};
                for (int k = 0; k < 4; ++k) {
                    if (!m.in_bounds(nx[k], ny[k])) continue;
                    const size_t q = static_cast<size_t>(ny[k]) * m.width + nx[k];
                    if (m.bits[q] && label[q] < 0) {
                        label[q] = cur;
                        stack.push_back(static_cast<uint32_t>(q));
                    }
                }
            }
            if (count > best_count) {
                best_count = count;
                best_label = cur;
            }
        }
    }
    if (best_label >= 0)
        for (size_t i = 0; i < label.size(); ++i) out.bits[i] = label[i] == best_label ? 1 : 0;
    return out;
}

}  // namespace derm
