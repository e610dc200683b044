#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "derm/common.hpp"

namespace derm {

struct KernelSpec {
    enum class Type { Linear, Rbf, Poly };
    Type type = Type::Rbf;
    double gamma = 1.0 / 11.0;  // 1/n_features default
    double coef0 = 0.0;
    int degree = 3;
};

inline const char* kernel_name(KernelSpec::Type t) {
    switch (t) {
        case KernelSpec::Type::Linear: return "linear";
        case KernelSpec::Type::Rbf: return "rbf";
        case KernelSpec::Type::Poly: return "poly";
    }
    return "?";
}

inline double kernel_eval(const KernelSpec& k, const std::vector<double>& a,
                          const std::vector<double>& b) {
    if (a.size() != b.size()) throw Error("kernel_eval: dimension mismatch");
    switch (k.type) {
        case KernelSpec::Type::Linear: {
            double dot = 0.0;
            for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
            return dot;
        }
        case KernelSpec::Type::Rbf: {
            double d2 = 0.0;
            for (size_t i = 0; i < a.size(); ++i) d2 += sq(a[i] - b[i]);
            return std::exp(-k.gamma * d2);
        }
        case KernelSpec::Type::Poly: {
            double dot = 0.0;
            for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
            return std::pow(k.gamma * dot + k.coef0, k.degree);
        }
    }
    throw Error("kernel_eval: bad kernel type");
}

struct SvmParams {
    KernelSpec kernel;
    double C = 1.0;
    double tol = 1e-3;        // KKT gap tolerance
    long max_iter = 200000;   // pairwise update budget
    uint64_t seed = 1;        // partner fallback draws
    bool track_objective = false;
};

struct SvmModel {
    KernelSpec kernel;
    double C = 1.0;
    double bias = 0.0;
    std::vector<std::vector<double>> sv;
    std::vector<double> coef;  // alpha_i * y_i per support vector
    double dual_objective = 0.0;
    long iterations = 0;
    std::vector<double> objective_trace;  // filled when track_objective is set
};

inline double svm_decision(const SvmModel& m, const std::vector<double>& x) {
    double f = m.bias;
    for (size_t i = 0; i < m.sv.size(); ++i) f += m.coef[i] * kernel_eval(m.kernel, m.sv[i], x);
    return f;
}

// Ties at exactly 0 go to +1: for a screening decision the costly miss is the
// melanoma called benign.
inline int svm_predict(const SvmModel& m, const std::vector<double>& x) {
    return svm_decision(m, x) >= 0.0 ? 1 : -1;
}

// SMO with maximal-violating-pair selection: the pair realizing the KKT gap
// (argmax F over I_low, argmin F over I_up), which also maximizes |E_i - E_j|
// among violators. Seeded random partners are the fallback when the extreme
// pair cannot move.
inline SvmModel svm_train(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                          const SvmParams& params) {
    const size_t n = X.size();
    if (n < 2 || y.size() != n) throw Error("svm_train: need matching rows and labels");
    bool has_pos = false, has_neg = false;
    for (int v : y) {
        if (v == 1) has_pos = true;
        else if (v == -1) has_neg = true;
        else throw Error("svm_train: labels must be +1/-1");
    }
    if (!has_pos || !has_neg) throw Error("svm_train: both classes required");
    if (!(params.C > 0.0)) throw Error("svm_train: C must be positive");

    // Dense kernel matrix: training sets here are a few hundred rows.
    std::vector<double> K(n * n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j <= i; ++j) {
            const double v = kernel_eval(params.kernel, X[i], X[j]);
            K[i * n + j] = v;
            K[j * n + i] = v;
        }
    }
    auto k_at = [&](size_t i, size_t j) { return K[i * n + j]; };

    const double C = params.C;
    std::vector<double> alpha(n, 0.0);
    // F_i = sum_j alpha_j y_j K_ij - y_i; KKT gap = max_low F - min_up F.
    std::vector<double> F(n);
    for (size_t i = 0; i < n; ++i) F[i] = -y[i];

    // A clamped step can leave an alpha one ulp shy of its bound; an exact
    // comparison would then treat the pinned variable as free and stall the
    // pair selection, so bound membership carries a small margin.
    const double margin = 1e-10 * std::max(1.0, C);
    auto in_up = [&](size_t i) {
        return (y[i] > 0 && alpha[i] < C - margin) || (y[i] < 0 && alpha[i] > margin);
    };
    auto in_low = [&](size_t i) {
        return (y[i] > 0 && alpha[i] > margin) || (y[i] < 0 && alpha[i] < C - margin);
    };

    auto objective = [&]() {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) {
            if (alpha[i] == 0.0) continue;
            s += alpha[i];
            for (size_t j = 0; j < n; ++j)
                s -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * k_at(i, j);
        }
        return s;
    };

    // Takes an SMO step on (i, j); returns false if clipping kills the move.
    auto take_step = [&](size_t i, size_t j) {
        if (i == j) return false;
        const double s = y[i] * y[j];
        double L, H;
        if (y[i] != y[j]) {
            L = std::max(0.0, alpha[j] - alpha[i]);
            H = std::min(C, C + alpha[j] - alpha[i]);
        } else {
            L = std::max(0.0, alpha[i] + alpha[j] - C);
            H = std::min(C, alpha[i] + alpha[j]);
        }
        if (L >= H) return false;
        const double eta = k_at(i, i) + k_at(j, j) - 2.0 * k_at(i, j);
        double aj;
        if (eta > 1e-12) {
            aj = alpha[j] + y[j] * (F[i] - F[j]) / eta;
            aj = std::clamp(aj, L, H);
        } else {
            // Flat direction: move to whichever box end improves the objective.
            const double grad = y[j] * (F[i] - F[j]);
            aj = grad > 0 ? H : L;
        }
        if (std::abs(aj - alpha[j]) < 1e-14) return false;
        const double ai = std::clamp(alpha[i] + s * (alpha[j] - aj), 0.0, C);
        const double di = (ai - alpha[i]) * y[i];
        const double dj = (aj - alpha[j]) * y[j];
        alpha[i] = ai;
        alpha[j] = aj;
        for (size_t t = 0; t < n; ++t) F[t] += di * k_at(i, t) + dj * k_at(j, t);
        return true;
    };

    std::mt19937_64 rng(params.seed);
    SvmModel model;
    long iter = 0;
    while (iter < params.max_iter) {
        // Maximal violating pair.
        double b_up = 1e300, b_low = -1e300;
        size_t i_up = n, i_low = n;
        for (size_t t = 0; t < n; ++t) {
            if (in_up(t) && F[t] < b_up) {
                b_up = F[t];
                i_up = t;
            }
            if (in_low(t) && F[t] > b_low) {
                b_low = F[t];
                i_low = t;
            }
        }
        if (i_up == n || i_low == n || b_low - b_up <= 2.0 * params.tol) break;

        bool moved = take_step(i_low, i_up);
        if (!moved) {
            // Random violating partners for the stuck extreme.
            for (int attempt = 0; attempt < 16 && !moved; ++attempt) {
                const size_t j = static_cast<size_t>(rng() % n);
                if (in_up(j)) moved = take_step(i_low, j);
                if (!moved && in_low(j)) moved = take_step(j, i_up);
            }
        }
        if (!moved) break;  // numerically stuck; KKT gap is already tiny
        ++iter;
        if (params.track_objective) model.objective_trace.push_back(objective());
    }

    // Bias from interior SVs (y_i - s_i = -F_i); else the feasibility midpoint.
    double bsum = 0.0;
    int bcount = 0;
    for (size_t i = 0; i < n; ++i) {
        if (alpha[i] > 1e-8 && alpha[i] < C - 1e-8) {
            bsum += -F[i];
            ++bcount;
        }
    }
    if (bcount > 0) {
        model.bias = bsum / bcount;
    } else {
        double b_up = 1e300, b_low = -1e300;
        for (size_t t = 0; t < n; ++t) {
            if (in_up(t)) b_up = std::min(b_up, F[t]);
            if (in_low(t)) b_low = std::max(b_low, F[t]);
        }
        model.bias = -(b_up + b_low) / 2.0;
    }

    model.kernel = params.kernel;
    model.C = C;
    model.iterations = iter;
    model.dual_objective = objective();
    for (size_t i = 0; i < n; ++i) {
        if (alpha[i] > 1e-8) {
            model.sv.push_back(X[i]);
            model.coef.push_back(alpha[i] * y[i]);
        }
    }
    if (model.sv.empty()) throw Error("svm_train: no support vectors (degenerate problem)");
    return model;
}

}  // namespace derm
