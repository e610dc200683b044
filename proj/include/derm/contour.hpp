#pragma once

#include <cmath>
#include <vector>

#include "derm/common.hpp"
#include "derm/mask.hpp"

namespace derm {

using Contour = std::vector<PointI>;  // consecutive points are 8-adjacent

// Moore-neighbor boundary trace, clockwise from the topmost-then-leftmost
// pixel, terminated by Jacob's criterion (re-entering the start the same way).
// On a ring-shaped region this follows the outer boundary only.
inline Contour trace_contour(const BinaryMask& mask) {
    PointI start{-1, -1};
    for (int y = 0; y < mask.height && start.x < 0; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                start = {x, y};
                break;
            }
    if (start.x < 0) throw Error("trace_contour: empty mask");

    // Clockwise ring starting at W (y grows downward).
    static constexpr int dx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
    static constexpr int dy[8] = {0, -1, -1, -1, 0, 1, 1, 1};
    auto fg = [&](int x, int y) { return mask.in_bounds(x, y) && mask.at(x, y); };

    bool isolated = true;
    for (int k = 0; k < 8; ++k)
        if (fg(start.x + dx[k], start.y + dy[k])) {
            isolated = false;
            break;
        }
    if (isolated) return {start};

    Contour pts{start};
    PointI cur = start;
    int prev_dir = 0;  // direction pointing back where we came from; W is
                       // background at the start pixel by construction
    PointI first_next{-1, -1};
    const size_t cap = mask.bits.size() * 4 + 16;
    while (true) {
        int d = -1;
        PointI p;
        for (int t = 1; t <= 8; ++t) {
            const int cand = (prev_dir + t) % 8;
            const PointI q{cur.x + dx[cand], cur.y + dy[cand]};
            if (fg(q.x, q.y)) {
                d = cand;
                p = q;
                break;
            }
        }
        if (first_next.x < 0) {
            first_next = p;
        } else if (cur == start && p == first_next) {
            pts.pop_back();  // the re-visited start was appended last round
            break;
        }
        pts.push_back(p);
        prev_dir = (d + 4) % 8;
        cur = p;
        if (pts.size() > cap) throw Error("trace_contour: runaway trace");
    }
    return pts;
}

// Closed polygonal arc length; steps between 8-adjacent pixels are 1 or sqrt(2).
inline double contour_perimeter(const Contour& c) {
    if (c.size() < 2) return 0.0;
    double p = 0.0;
    for (size_t i = 0; i < c.size(); ++i) {
        const PointI& a = c[i];
        const PointI& b = c[(i + 1) % c.size()];
        p += std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
    }
    return p;
}

}  // namespace derm
