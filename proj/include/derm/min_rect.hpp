#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "derm/common.hpp"
#include "derm/contour.hpp"

namespace derm {

// Minimum-area bounding rectangle. Sides use the pixel-footprint convention
// (extent between centers + 1), so an axis-aligned w x h block reports (w, h).
// `angle` is the tilt of the long side, normalized to (-pi/2, pi/2].
struct MinAreaRect {
    PointD center;
    double long_side = 0.0;
    double short_side = 0.0;
    double angle = 0.0;

    std::array<PointD, 4> corners() const {
        const double c = std::cos(angle), s = std::sin(angle);
        const double hl = long_side / 2.0, hs = short_side / 2.0;
        std::array<PointD, 4> out;
        const double ox[4] = {-hl, hl, hl, -hl};
        const double oy[4] = {-hs, -hs, hs, hs};
        for (int i = 0; i < 4; ++i)
            out[i] = {center.x + ox[i] * c - oy[i] * s, center.y + ox[i] * s + oy[i] * c};
        return out;
    }
};

namespace mr_detail {

inline long long cross(PointI o, PointI a, PointI b) {
    return static_cast<long long>(a.x - o.x) * (b.y - o.y) -
           static_cast<long long>(a.y - o.y) * (b.x - o.x);
}

// Andrew monotone chain; returns hull in counterclockwise order, no collinear
// interior points.
inline std::vector<PointI> convex_hull(std::vector<PointI> pts) {
    std::sort(pts.begin(), pts.end(), [](PointI a, PointI b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const size_t n = pts.size();
    if (n <= 2) return pts;
    std::vector<PointI> h(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    const size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

}  // namespace mr_detail

// Rotating-calipers over hull edges: the optimal rectangle is flush with one
// hull edge. Hulls here are tiny, so the O(h^2) projection scan is fine.
inline MinAreaRect min_area_rect(const Contour& contour) {
    if (contour.empty()) throw Error("min_area_rect: no points");
    const std::vector<PointI> hull = mr_detail::convex_hull(contour);

    if (hull.size() == 1) {
        return {{static_cast<double>(hull[0].x), static_cast<double>(hull[0].y)}, 1.0, 1.0, 0.0};
    }

    double best_area = std::numeric_limits<double>::infinity();
    MinAreaRect best;
    const size_t n = hull.size();
    const size_t edges = n == 2 ? 1 : n;
    for (size_t i = 0; i < edges; ++i) {
        const PointI a = hull[i];
        const PointI b = hull[(i + 1) % n];
        const double ex = b.x - a.x, ey = b.y - a.y;
        const double len = std::hypot(ex, ey);
        if (len == 0.0) continue;
        const double dx = ex / len, dy = ey / len;  // edge dir; normal (-dy, dx)
        double tmin = 1e300, tmax = -1e300, smin = 1e300, smax = -1e300;
        for (const PointI& p : hull) {
            const double t = p.x * dx + p.y * dy;
            const double s = -p.x * dy + p.y * dx;
            tmin = std::min(tmin, t);
            tmax = std::max(tmax, t);
            smin = std::min(smin, s);
            smax = std::max(smax, s);
        }
        const double et = tmax - tmin, es = smax - smin;
        const double area = (et + 1.0) * (es + 1.0);
        if (area < best_area) {
            best_area = area;
            const double tc = (tmin + tmax) / 2.0, sc = (smin + smax) / 2.0;
            best.center = {tc * dx - sc * dy, tc * dy + sc * dx};
            double ang;
            if (et >= es) {
                best.long_side = et + 1.0;
                best.short_side = es + 1.0;
                ang = std::atan2(dy, dx);
            } else {
                best.long_side = es + 1.0;
                best.short_side = et + 1.0;
                ang = std::atan2(dx, -dy);
            }
            while (ang > M_PI / 2.0) ang -= M_PI;
            while (ang <= -M_PI / 2.0) ang += M_PI;
            best.angle = ang;
        }
    }
    return best;
}

}  // namespace derm
