#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "derm/common.hpp"
#include "derm/gaussian.hpp"
#include "derm/image.hpp"
#include "derm/mask.hpp"

namespace derm {

// Sparse level-set state. phi takes four values: -3 interior, -1 inner
// boundary (l_in), +1 outer boundary (l_out), +3 exterior. Both lists hold
// linear indices and are kept sorted (scan order) between passes, which makes
// every sweep deterministic.
struct LevelSetGrid {
    int width = 0;
    int height = 0;
    std::vector<int8_t> phi;
    std::vector<uint32_t> l_in, l_out;

    size_t idx(int x, int y) const { return static_cast<size_t>(y) * width + x; }
    int8_t at(int x, int y) const { return phi[idx(x, y)]; }
    bool is_frame(int x, int y) const {
        return x == 0 || y == 0 || x == width - 1 || y == height - 1;
    }
};

struct SegmentationParams {
    double lambda1 = 2.0;           // weight on the interior fit term
    double lambda2 = 1.0;           // weight on the exterior fit term
    std::array<double, 3> channel_weights{1.0, 1.0, 1.0};
    int n_a = 40;                   // data passes per cycle
    int n_s = 2;                    // smoothing passes per cycle
    int max_iterations = 400;       // total pass budget (data + smoothing)
    double init_fraction = 0.65;    // initial ellipse, fraction of each dimension
    int smooth_kernel = 5;
    double smooth_sigma = 1.0;

    void validate() const {
        if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
            throw Error("segmentation: lambda weights must be positive");
        if (n_a < 1 || n_s < 0) throw Error("segmentation: need n_a >= 1, n_s >= 0");
        if (max_iterations < 1) throw Error("segmentation: max_iterations must be positive");
        if (!(init_fraction > 0.0 && init_fraction < 1.0))
            throw Error("segmentation: init_fraction must be in (0,1)");
    }
};

struct EvolveResult {
    BinaryMask mask;
    int iterations_used = 0;
};

// Called after every pass; `iteration` counts passes from 1.
using SnapshotFn = std::function<void(int iteration, const LevelSetGrid&)>;

inline BinaryMask to_mask(const LevelSetGrid& g) {
    BinaryMask m(g.width, g.height);
    for (size_t i = 0; i < g.phi.size(); ++i) m.bits[i] = g.phi[i] < 0 ? 1 : 0;
    return m;
}

// Builds a valid four-value grid from an arbitrary mask. The one-pixel frame
// is forced exterior and never enters either list, so neighbor lookups cannot
// leave the grid and the curve cannot exit the image.
inline LevelSetGrid init_from_mask(const BinaryMask& mask) {
    if (mask.width < 3 || mask.height < 3) throw Error("init_from_mask: grid too small");
    LevelSetGrid g;
    g.width = mask.width;
    g.height = mask.height;
    g.phi.assign(mask.bits.size(), 3);

    bool any_inside = false;
    for (int y = 1; y < g.height - 1; ++y)
        for (int x = 1; x < g.width - 1; ++x)
            if (mask.at(x, y)) {
                g.phi[g.idx(x, y)] = -3;
                any_inside = true;
            }
    if (!any_inside) throw Error("init_from_mask: mask has no interior pixels");

    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const size_t i = g.idx(x, y);
            const bool inside = g.phi[i] < 0;
            bool has_opposite = false;
            const int nx[4] = {x - 1, x + 1, x, x};
            const int ny[4] = {y, y, y - 1, y + 1};
            for (int k = 0; k < 4; ++k) {
                const bool nb_inside = nx[k] >= 0 && nx[k] < g.width && ny[k] >= 0 &&
                                       ny[k] < g.height && g.phi[g.idx(nx[k], ny[k])] < 0;
                if (nb_inside != inside) {
                    has_opposite = true;
                    break;
                }
            }
            if (!has_opposite) continue;
            if (inside) {
                g.phi[i] = -1;
                g.l_in.push_back(static_cast<uint32_t>(i));
            } else if (!g.is_frame(x, y)) {
                g.phi[i] = 1;
                g.l_out.push_back(static_cast<uint32_t>(i));
            }
        }
    }
    return g;
}

// Centered ellipse with semi-axes fraction*dim/2, strict interior.
inline LevelSetGrid init_ellipse(int width, int height, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw Error("init_ellipse: fraction must be in (0,1)");
    const double a = fraction * width / 2.0;
    const double b = fraction * height / 2.0;
    if (a < 2.0 || b < 2.0) throw Error("init_ellipse: semi-axes degenerate (< 2px)");
    const double cx = (width - 1) / 2.0;
    const double cy = (height - 1) / 2.0;
    BinaryMask m(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (sq((x - cx) / a) + sq((y - cy) / b) < 1.0) m.set(x, y, true);
    return init_from_mask(m);
}

namespace ls_detail {

constexpr uint32_t kRemoved = std::numeric_limits<uint32_t>::max();

// Shared sweep machinery for the data and smoothing cycles. Keeps running
// interior/exterior sums of the combined field so region means are O(1) per
// pass; all float inputs accumulate exactly in double (mantissa headroom).
struct Engine {
    LevelSetGrid& g;
    const std::vector<float>& u;
    double lambda1, lambda2;
    double sum_in = 0.0, sum_out = 0.0;
    int64_t n_in = 0, n_out = 0;
    int64_t switches = 0;
    int pass_count = 0;

    Engine(LevelSetGrid& grid, const std::vector<float>& field, double l1, double l2)
        : g(grid), u(field), lambda1(l1), lambda2(l2) {
        if (u.size() != g.phi.size()) throw Error("level set: field size mismatch");
        for (size_t i = 0; i < g.phi.size(); ++i) {
            if (g.phi[i] < 0) {
                sum_in += u[i];
                ++n_in;
            } else {
                sum_out += u[i];
                ++n_out;
            }
        }
    }

    void require_two_regions() const {
        if (n_in == 0)
            throw SegmentationError("curve collapsed: empty interior", pass_count);
        if (n_out == 0)
            throw SegmentationError("curve collapsed: empty exterior", pass_count);
    }

    void neighbors(uint32_t p, uint32_t out[4], int& n) const {
        const int x = static_cast<int>(p % g.width);
        const int y = static_cast<int>(p / g.width);
        n = 0;
        if (x > 0) out[n++] = p - 1;
        if (x < g.width - 1) out[n++] = p + 1;
        if (y > 0) out[n++] = p - static_cast<uint32_t>(g.width);
        if (y < g.height - 1) out[n++] = p + static_cast<uint32_t>(g.width);
    }

    // L_out -> L_in; exterior 4-neighbors become new L_out points (frame stays put).
    void switch_in(uint32_t p) {
        g.phi[p] = -1;
        g.l_in.push_back(p);
        sum_in += u[p];
        ++n_in;
        sum_out -= u[p];
        --n_out;
        ++switches;
        uint32_t nb[4];
        int n;
        neighbors(p, nb, n);
        for (int k = 0; k < n; ++k) {
            const uint32_t q = nb[k];
            if (g.phi[q] == 3 &&
                !g.is_frame(static_cast<int>(q % g.width), static_cast<int>(q / g.width))) {
                g.phi[q] = 1;
                g.l_out.push_back(q);
            }
        }
    }

    // L_in -> L_out; interior 4-neighbors become new L_in points.
    void switch_out(uint32_t p) {
        g.phi[p] = 1;
        g.l_out.push_back(p);
        sum_in -= u[p];
        --n_in;
        sum_out += u[p];
        ++n_out;
        ++switches;
        uint32_t nb[4];
        int n;
        neighbors(p, nb, n);
        for (int k = 0; k < n; ++k) {
            const uint32_t q = nb[k];
            if (g.phi[q] == -3) {
                g.phi[q] = -1;
                g.l_in.push_back(q);
            }
        }
    }

    static void compact(std::vector<uint32_t>& v) {
        v.erase(std::remove(v.begin(), v.end(), kRemoved), v.end());
    }

    // Deletes l_in points with no exterior 4-neighbor (they sink to -3).
    void clean_in() {
        std::sort(g.l_in.begin(), g.l_in.end());
        for (auto& pref : g.l_in) {
            const uint32_t p = pref;
            uint32_t nb[4];
            int n;
            neighbors(p, nb, n);
            bool any_out = false;
            for (int k = 0; k < n; ++k)
                if (g.phi[nb[k]] > 0) {
                    any_out = true;
                    break;
                }
            if (!any_out) {
                g.phi[p] = -3;
                pref = kRemoved;
            }
        }
        compact(g.l_in);
    }

    // Mirror rule: l_out points with no interior 4-neighbor rise to +3.
    void clean_out() {
        std::sort(g.l_out.begin(), g.l_out.end());
        for (auto& pref : g.l_out) {
            const uint32_t p = pref;
            uint32_t nb[4];
            int n;
            neighbors(p, nb, n);
            bool any_in = false;
            for (int k = 0; k < n; ++k)
                if (g.phi[nb[k]] < 0) {
                    any_in = true;
                    break;
                }
            if (!any_in) {
                g.phi[p] = 3;
                pref = kRemoved;
            }
        }
        compact(g.l_out);
    }

    // One data pass: region means are fixed at pass entry, then l_out points
    // with F_d > 0 switch inward and l_in points with F_d < 0 switch outward,
    // each sweep followed by redundant-point deletion in scan order.
    bool data_pass() {
        require_two_regions();
        const double c1 = sum_in / static_cast<double>(n_in);
        const double c2 = sum_out / static_cast<double>(n_out);
        auto speed = [&](uint32_t p) {
            const double v = u[p];
            return lambda2 * sq(v - c2) - lambda1 * sq(v - c1);
        };
        bool changed = false;

        for (size_t i = 0, n0 = g.l_out.size(); i < n0; ++i) {
            const uint32_t p = g.l_out[i];
            if (speed(p) > 0.0) {
                g.l_out[i] = kRemoved;
                switch_in(p);
                changed = true;
            }
        }
        compact(g.l_out);
        clean_in();

        for (size_t i = 0, n1 = g.l_in.size(); i < n1; ++i) {
            const uint32_t p = g.l_in[i];
            if (speed(p) < 0.0) {
                g.l_in[i] = kRemoved;
                switch_out(p);
                changed = true;
            }
        }
        compact(g.l_in);
        clean_out();

        std::sort(g.l_in.begin(), g.l_in.end());
        ++pass_count;
        return changed;
    }

    // Gaussian-filtered inside-indicator at p; off-grid counts as exterior.
    double blur_at(uint32_t p, const Kernel& ker) const {
        const int x = static_cast<int>(p % g.width);
        const int y = static_cast<int>(p / g.width);
        const int r = ker.size / 2;
        double acc = 0.0;
        for (int i = 0; i < ker.size; ++i) {
            const int yy = y + i - r;
            if (yy < 0 || yy >= g.height) continue;
            for (int j = 0; j < ker.size; ++j) {
                const int xx = x + j - r;
                if (xx < 0 || xx >= g.width) continue;
                if (g.phi[g.idx(xx, yy)] < 0) acc += ker.at(i, j);
            }
        }
        return acc;
    }

    // One smoothing pass: the curve relaxes toward the 1/2 level of the
    // blurred indicator. Sweeps read phi as it mutates (fixed scan order keeps
    // this deterministic).
    bool smoothing_pass(const Kernel& ker) {
        require_two_regions();
        bool changed = false;

        for (size_t i = 0, n0 = g.l_out.size(); i < n0; ++i) {
            const uint32_t p = g.l_out[i];
            if (blur_at(p, ker) > 0.5) {
                g.l_out[i] = kRemoved;
                switch_in(p);
                changed = true;
            }
        }
        compact(g.l_out);
        clean_in();

        for (size_t i = 0, n1 = g.l_in.size(); i < n1; ++i) {
            const uint32_t p = g.l_in[i];
            if (blur_at(p, ker) < 0.5) {
                g.l_in[i] = kRemoved;
                switch_out(p);
                changed = true;
            }
        }
        compact(g.l_in);
        clean_out();

        std::sort(g.l_in.begin(), g.l_in.end());
        ++pass_count;
        return changed;
    }
};

}  // namespace ls_detail

// Mean of the combined field over interior (phi < 0) and exterior (phi > 0).
inline std::pair<double, double> region_means(const LevelSetGrid& g, const PlanarImage& planes,
                                              const std::array<double, 3>& weights) {
    const std::vector<float> u = combine_channels(planes, weights);
    if (u.size() != g.phi.size()) throw Error("region_means: size mismatch");
    double sum_in = 0.0, sum_out = 0.0;
    int64_t n_in = 0, n_out = 0;
    for (size_t i = 0; i < u.size(); ++i) {
        if (g.phi[i] < 0) {
            sum_in += u[i];
            ++n_in;
        } else {
            sum_out += u[i];
            ++n_out;
        }
    }
    if (n_in == 0) throw SegmentationError("region_means: empty interior", 0);
    if (n_out == 0) throw SegmentationError("region_means: empty exterior", 0);
    return {sum_in / n_in, sum_out / n_out};
}

// Runs up to n_a data passes in place; stops early at a fixpoint (a pass with
// no switches repeats forever, so nothing is lost). Returns whether any pass
// switched a point.
inline bool data_cycle(LevelSetGrid& g, const PlanarImage& planes,
                       const SegmentationParams& params) {
    params.validate();
    const std::vector<float> u = combine_channels(planes, params.channel_weights);
    ls_detail::Engine eng(g, u, params.lambda1, params.lambda2);
    bool changed = false;
    for (int i = 0; i < params.n_a; ++i) {
        if (!eng.data_pass()) break;
        changed = true;
    }
    return changed;
}

inline void smoothing_cycle(LevelSetGrid& g, const SegmentationParams& params) {
    params.validate();
    const Kernel ker = gaussian_kernel(params.smooth_kernel, params.smooth_sigma);
    const std::vector<float> zero(g.phi.size(), 0.0f);
    ls_detail::Engine eng(g, zero, params.lambda1, params.lambda2);
    for (int i = 0; i < params.n_s; ++i) eng.smoothing_pass(ker);
}

// Full evolution from the centered ellipse. Alternates data and smoothing
// cycles until a data cycle makes no switch at all or the pass budget runs
// out. The mask is the largest 4-connected interior component.
inline EvolveResult evolve(const PlanarImage& planes, const SegmentationParams& params,
                           const SnapshotFn& snapshot = nullptr) {
    params.validate();
    const std::vector<float> u = combine_channels(planes, params.channel_weights);
    LevelSetGrid g = init_ellipse(planes.width, planes.height, params.init_fraction);
    const Kernel ker = gaussian_kernel(params.smooth_kernel, params.smooth_sigma);
    ls_detail::Engine eng(g, u, params.lambda1, params.lambda2);

    bool converged = false;
    while (eng.pass_count < params.max_iterations) {
        bool cycle_changed = false;
        for (int a = 0; a < params.n_a && eng.pass_count < params.max_iterations; ++a) {
            const bool ch = eng.data_pass();
            if (snapshot) snapshot(eng.pass_count, g);
            if (!ch) break;
            cycle_changed = true;
        }
        if (!cycle_changed) {
            converged = true;
            break;
        }
        for (int s = 0; s < params.n_s && eng.pass_count < params.max_iterations; ++s) {
            eng.smoothing_pass(ker);
            if (snapshot) snapshot(eng.pass_count, g);
        }
    }
    (void)converged;

    if (eng.switches == 0)
        throw SegmentationError("level set never moved: no contrast between regions",
                                eng.pass_count);
    BinaryMask mask = largest_component(to_mask(g));
    const size_t area = mask.area();
    if (area == 0) throw SegmentationError("curve collapsed: empty interior", eng.pass_count);
    if (area == mask.bits.size())
        throw SegmentationError("curve collapsed: empty exterior", eng.pass_count);
    return {std::move(mask), eng.pass_count};
}

// Structural checks used by tests: value set, list/phi agreement, redundancy
// rules, frame exteriority, sorted unique lists. The +3 neighbor rule is not
// enforced on the frame itself (the curve may legitimately touch the border).
inline std::vector<std::string> level_set_audit(const LevelSetGrid& g) {
    std::vector<std::string> bad;
    auto flag = [&](int x, int y, const std::string& why) {
        if (bad.size() < 32)
            bad.push_back("(" + std::to_string(x) + "," + std::to_string(y) + "): " + why);
    };
    std::vector<uint8_t> in_list(g.phi.size(), 0);
    auto check_list = [&](const std::vector<uint32_t>& v, int8_t want, uint8_t tag,
                          const char* name) {
        for (size_t i = 0; i < v.size(); ++i) {
            if (i > 0 && v[i] <= v[i - 1]) {
                bad.push_back(std::string(name) + " not sorted/unique");
                break;
            }
        }
        for (uint32_t p : v) {
            if (p >= g.phi.size()) {
                bad.push_back(std::string(name) + " index out of range");
                continue;
            }
            in_list[p] = tag;
            if (g.phi[p] != want)
                flag(static_cast<int>(p % g.width), static_cast<int>(p / g.width),
                     std::string(name) + " entry has wrong phi");
        }
    };
    check_list(g.l_in, -1, 1, "l_in");
    check_list(g.l_out, 1, 2, "l_out");

    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const size_t i = g.idx(x, y);
            const int8_t v = g.phi[i];
            if (v != -3 && v != -1 && v != 1 && v != 3) {
                flag(x, y, "phi outside {-3,-1,1,3}");
                continue;
            }
            if (g.is_frame(x, y) && v != 3) flag(x, y, "frame pixel not exterior");
            if (v == -1 && in_list[i] != 1) flag(x, y, "phi=-1 but not in l_in");
            if (v == 1 && in_list[i] != 2) flag(x, y, "phi=+1 but not in l_out");
            const int nx[4] = {x - 1, x + 1, x, x};
            const int ny[4] = {y, y, y - 1, y + 1};
            bool any_pos = false, any_neg = false;
            for (int k = 0; k < 4; ++k) {
                if (nx[k] < 0 || nx[k] >= g.width || ny[k] < 0 || ny[k] >= g.height) continue;
                const int8_t nv = g.phi[g.idx(nx[k], ny[k])];
                any_pos |= nv > 0;
                any_neg |= nv < 0;
            }
            if (v == -3 && any_pos) flag(x, y, "phi=-3 with positive neighbor");
            if (v == 3 && any_neg && !g.is_frame(x, y)) flag(x, y, "phi=+3 with negative neighbor");
            if (v == -1 && !any_pos) flag(x, y, "redundant l_in survivor");
            if (v == 1 && !any_neg) flag(x, y, "redundant l_out survivor");
        }
    }
    return bad;
}

}  // namespace derm
