#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "derm/common.hpp"
#include "derm/mask.hpp"

namespace derm {

// Positive class is melanoma (+1).
struct ConfusionCounts {
    long tp = 0, fp = 0, tn = 0, fn = 0;

    void add(int truth, int predicted) {
        if (truth > 0)
            (predicted > 0 ? tp : fn)++;
        else
            (predicted > 0 ? fp : tn)++;
    }
    long total() const { return tp + fp + tn + fn; }
};

// Undefined ratios (zero denominators) stay empty rather than faking a value.
struct Metrics {
    std::optional<double> sensitivity, specificity, accuracy, precision;
};

inline Metrics compute_metrics(const ConfusionCounts& c) {
    Metrics m;
    if (c.tp + c.fn > 0) m.sensitivity = static_cast<double>(c.tp) / (c.tp + c.fn);
    if (c.tn + c.fp > 0) m.specificity = static_cast<double>(c.tn) / (c.tn + c.fp);
    if (c.total() > 0) m.accuracy = static_cast<double>(c.tp + c.tn) / c.total();
    if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / (c.tp + c.fp);
    return m;
}

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // from (0,0) to (1,1), fpr nondecreasing
    double auc = 0.0;
};

// Threshold sweep over unique scores (descending); tied scores move as one
// group, so the curve is exact under ties. AUC is the trapezoidal area.
inline RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw Error("roc_auc: need matching nonempty scores/labels");
    long n_pos = 0, n_neg = 0;
    for (int y : labels) (y > 0 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0) throw Error("roc_auc: both classes required");

    std::vector<size_t> order(scores.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    RocCurve out;
    out.points.push_back({0.0, 0.0});
    long tp = 0, fp = 0;
    double auc = 0.0;
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        long dtp = 0, dfp = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] > 0 ? dtp : dfp)++;
            ++j;
        }
        const double tpr0 = static_cast<double>(tp) / n_pos;
        const double fpr0 = static_cast<double>(fp) / n_neg;
        tp += dtp;
        fp += dfp;
        const double tpr1 = static_cast<double>(tp) / n_pos;
        const double fpr1 = static_cast<double>(fp) / n_neg;
        auc += (fpr1 - fpr0) * (tpr0 + tpr1) / 2.0;
        out.points.push_back({fpr1, tpr1});
        i = j;
    }
    out.auc = auc;
    return out;
}

// Mann-Whitney statistic U/(n+ * n-), ties counted half. Equals the
// trapezoidal AUC exactly; kept as an independent cross-check.
inline double mann_whitney_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    long n_pos = 0, n_neg = 0;
    for (int y : labels) (y > 0 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0) throw Error("mann_whitney_auc: both classes required");
    double u = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] <= 0) continue;
        for (size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] > 0) continue;
            if (scores[i] > scores[j])
                u += 1.0;
            else if (scores[i] == scores[j])
                u += 0.5;
        }
    }
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Overlap score in [0,1]; two empty masks are identical, so 1.
inline double dice(const BinaryMask& a, const BinaryMask& b) {
    if (a.width != b.width || a.height != b.height) throw Error("dice: size mismatch");
    size_t inter = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.bits.size(); ++i) {
        na += a.bits[i];
        nb += b.bits[i];
        inter += (a.bits[i] & b.bits[i]);
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

}  // namespace derm
