#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "derm/common.hpp"

namespace derm {

struct SmoteConfig {
    int k_neighbors = 5;
    double target_ratio = 1.0;  // minority/majority after augmentation
    uint64_t seed = 1;
};

// Interpolates new minority samples on segments to k-nearest minority
// neighbors: s = x + u * (nb - x), u ~ U[0,1). Synthetic rows therefore stay
// inside the minority convex hull. Bit-reproducible for a fixed seed.
inline std::vector<std::vector<double>> smote_synthesize(
    const std::vector<std::vector<double>>& minority, size_t n_synth, const SmoteConfig& cfg) {
    if (n_synth == 0) return {};
    const size_t n = minority.size();
    if (n < 2) throw Error("smote: need at least 2 minority samples");
    const size_t k = std::min<size_t>(cfg.k_neighbors, n - 1);

    // Neighbor lists once per base point; ties break on index for determinism.
    std::vector<std::vector<uint32_t>> nn(n);
    std::vector<std::pair<double, uint32_t>> d(n);
    for (size_t i = 0; i < n; ++i) {
        d.clear();
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double acc = 0.0;
            for (size_t f = 0; f < minority[i].size(); ++f)
                acc += sq(minority[i][f] - minority[j][f]);
            d.emplace_back(acc, static_cast<uint32_t>(j));
        }
        std::sort(d.begin(), d.end());
        nn[i].reserve(k);
        for (size_t t = 0; t < k; ++t) nn[i].push_back(d[t].second);
    }

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> out;
    out.reserve(n_synth);
    for (size_t t = 0; t < n_synth; ++t) {
        const std::vector<double>& base = minority[t % n];
        const std::vector<uint32_t>& cand = nn[t % n];
        const size_t pick = static_cast<size_t>(rng() % cand.size());
        const std::vector<double>& nb = minority[cand[pick]];
        const double u = unit(rng);
        std::vector<double> s(base.size());
        for (size_t f = 0; f < base.size(); ++f) s[f] = base[f] + u * (nb[f] - base[f]);
        out.push_back(std::move(s));
    }
    return out;
}

// Appends synthetic minority rows until minority/majority reaches the target
// ratio (parity by default). Labels are +1 melanoma / -1 benign.
inline void smote_balance(std::vector<std::vector<double>>& rows, std::vector<int>& labels,
                          const SmoteConfig& cfg = {}) {
    if (rows.size() != labels.size()) throw Error("smote: rows/labels mismatch");
    size_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y > 0 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0) throw Error("smote: both classes required");
    const int minority_label = n_pos <= n_neg ? 1 : -1;
    const size_t n_min = std::min(n_pos, n_neg);
    const size_t n_maj = std::max(n_pos, n_neg);
    const size_t target = static_cast<size_t>(cfg.target_ratio * static_cast<double>(n_maj));
    if (target <= n_min) return;

    std::vector<std::vector<double>> minority;
    minority.reserve(n_min);
    for (size_t i = 0; i < rows.size(); ++i)
        if (labels[i] == minority_label) minority.push_back(rows[i]);

    auto synth = smote_synthesize(minority, target - n_min, cfg);
    for (auto& s : synth) {
        rows.push_back(std::move(s));
        labels.push_back(minority_label);
    }
}

}  // namespace derm
