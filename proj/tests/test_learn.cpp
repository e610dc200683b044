#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "derm/scaler.hpp"
#include "derm/smote.hpp"
#include "derm/svm.hpp"
#include "support/qp_oracle.hpp"

using namespace derm;

namespace {

// Jacobi eigenvalue sweep for small symmetric matrices (used only to check
// kernel Gram matrices for positive semidefiniteness).
std::vector<double> symmetric_eigenvalues(std::vector<double> a, size_t n) {
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
        if (off < 1e-22) break;
        for (size_t p = 0; p < n; ++p)
            for (size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p * n + q]) < 1e-14) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * a[p * n + q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (size_t i = 0; i < n; ++i) ev[i] = a[i * n + i];
    return ev;
}

}  // namespace

TEST_CASE("scaler standardizes a two-point column to plus/minus one") {
    Scaler s;
    s.fit({{2.0}, {4.0}});
    CHECK_THAT(s.mean[0], Catch::Matchers::WithinAbs(3.0, 1e-12));
    CHECK_THAT(s.stdev[0], Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(s.apply({2.0})[0], Catch::Matchers::WithinAbs(-1.0, 1e-12));
    CHECK_THAT(s.apply({4.0})[0], Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("scaled columns have zero mean and unit variance") {
    std::mt19937_64 rng(61);
    std::normal_distribution<double> d(5.0, 3.0);
    std::vector<std::vector<double>> rows(40, std::vector<double>(3));
    for (auto& r : rows)
        for (double& v : r) v = d(rng);
    Scaler s;
    s.fit(rows);
    const auto scaled = s.apply_all(rows);
    for (size_t j = 0; j < 3; ++j) {
        double mean = 0.0, var = 0.0;
        for (const auto& r : scaled) mean += r[j];
        mean /= scaled.size();
        for (const auto& r : scaled) var += sq(r[j] - mean);
        var /= scaled.size();
        CHECK_THAT(mean, Catch::Matchers::WithinAbs(0.0, 1e-10));
        CHECK_THAT(var, Catch::Matchers::WithinAbs(1.0, 1e-10));
    }
}

TEST_CASE("scaler rejects degenerate input") {
    Scaler s;
    CHECK_THROWS_AS(s.fit({}), Error);
    CHECK_THROWS_AS(s.fit({{1.0, 2.0}, {1.0, 5.0}}), Error);  // zero variance col 0
    CHECK_THROWS_WITH(s.fit({{1.0, 2.0}, {1.0, 5.0}}),
                      Catch::Matchers::ContainsSubstring("feature 0"));
    CHECK_THROWS_AS(s.fit({{1.0, 2.0}, {3.0}}), Error);  // ragged
    s.fit({{0.0, 1.0}, {2.0, 3.0}});
    CHECK_THROWS_AS(s.apply({1.0}), Error);  // dimension mismatch
}

TEST_CASE("scaler can tolerate constant columns on request") {
    Scaler s;
    s.fit({{1.0, 2.0}, {1.0, 5.0}}, /*allow_constant=*/true);
    CHECK(s.stdev[0] == 1.0);
    const auto row = s.apply({1.0, 2.0});
    CHECK(row[0] == 0.0);  // constant column maps to constant zero
    CHECK_THAT(row[1], Catch::Matchers::WithinAbs(-1.0, 1e-12));
}

TEST_CASE("smote synthetics lie on segments inside the minority bounding box") {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> d(-4.0, 9.0);
    std::vector<std::vector<double>> minority(12, std::vector<double>(4));
    for (auto& r : minority)
        for (double& v : r) v = d(rng);

    SmoteConfig cfg;
    cfg.seed = 5;
    const auto synth = smote_synthesize(minority, 40, cfg);
    REQUIRE(synth.size() == 40);
    for (size_t j = 0; j < 4; ++j) {
        double lo = 1e300, hi = -1e300;
        for (const auto& r : minority) {
            lo = std::min(lo, r[j]);
            hi = std::max(hi, r[j]);
        }
        for (const auto& s : synth) {
            CHECK(s[j] >= lo - 1e-12);
            CHECK(s[j] <= hi + 1e-12);
        }
    }
}

TEST_CASE("smote with two points interpolates the segment exactly") {
    const std::vector<std::vector<double>> minority{{0.0, 0.0}, {2.0, 4.0}};
    SmoteConfig cfg;
    const auto synth = smote_synthesize(minority, 10, cfg);
    for (const auto& s : synth) {
        // s = a + u*(b-a): proportions match across coordinates.
        CHECK_THAT(s[1], Catch::Matchers::WithinAbs(2.0 * s[0], 1e-12));
        CHECK(s[0] >= 0.0);
        CHECK(s[0] <= 2.0);
    }
}

TEST_CASE("smote balances 28 melanoma against 112 benign") {
    std::mt19937_64 rng(81);
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 112; ++i) {
        rows.push_back({d(rng), d(rng)});
        labels.push_back(-1);
    }
    for (int i = 0; i < 28; ++i) {
        rows.push_back({d(rng) + 3.0, d(rng) + 3.0});
        labels.push_back(1);
    }
    SmoteConfig cfg;
    smote_balance(rows, labels, cfg);
    REQUIRE(rows.size() == 224);
    size_t n_pos = 0;
    for (int y : labels) n_pos += y > 0;
    CHECK(n_pos == 112);
    // Appended rows are all minority.
    for (size_t i = 140; i < labels.size(); ++i) CHECK(labels[i] == 1);
}

TEST_CASE("smote is reproducible per seed") {
    std::vector<std::vector<double>> minority(8, std::vector<double>(3));
    std::mt19937_64 rng(91);
    for (auto& r : minority)
        for (double& v : r) v = std::uniform_real_distribution<double>(0, 1)(rng);
    SmoteConfig a;
    a.seed = 7;
    SmoteConfig b;
    b.seed = 7;
    SmoteConfig c;
    c.seed = 8;
    CHECK(smote_synthesize(minority, 16, a) == smote_synthesize(minority, 16, b));
    CHECK(smote_synthesize(minority, 16, a) != smote_synthesize(minority, 16, c));
}

TEST_CASE("smote validates input") {
    SmoteConfig cfg;
    CHECK_THROWS_AS(smote_synthesize({{1.0}}, 4, cfg), Error);
    std::vector<std::vector<double>> rows{{1.0}, {2.0}};
    std::vector<int> labels{1, 1};
    CHECK_THROWS_AS(smote_balance(rows, labels, cfg), Error);  // single class
}

TEST_CASE("kernel evaluations match closed forms") {
    KernelSpec lin;
    lin.type = KernelSpec::Type::Linear;
    CHECK_THAT(kernel_eval(lin, {1.0, 2.0}, {3.0, -1.0}),
               Catch::Matchers::WithinAbs(1.0, 1e-12));

    KernelSpec rbf;
    rbf.type = KernelSpec::Type::Rbf;
    rbf.gamma = 1.0;
    CHECK_THAT(kernel_eval(rbf, {0.4, -0.7}, {0.4, -0.7}),
               Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(kernel_eval(rbf, {0.0, 0.0}, {1.0, 0.0}),
               Catch::Matchers::WithinAbs(std::exp(-1.0), 1e-12));

    KernelSpec poly;
    poly.type = KernelSpec::Type::Poly;
    poly.gamma = 0.5;
    poly.coef0 = 1.0;
    poly.degree = 3;
    // (0.5 * (1*2 + 2*1) + 1)^3 = 3^3
    CHECK_THAT(kernel_eval(poly, {1.0, 2.0}, {2.0, 1.0}),
               Catch::Matchers::WithinAbs(27.0, 1e-12));
}

TEST_CASE("rbf gram matrices are positive semidefinite") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    const size_t n = 12;
    std::vector<std::vector<double>> x(n, std::vector<double>(5));
    for (auto& r : x)
        for (double& v : r) v = d(rng);
    KernelSpec rbf;
    std::vector<double> gram(n * n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) gram[i * n + j] = kernel_eval(rbf, x[i], x[j]);
    for (double ev : symmetric_eigenvalues(gram, n)) CHECK(ev >= -1e-8);
}

TEST_CASE("smo solves the symmetric two-point problem exactly") {
    const std::vector<std::vector<double>> x{{-1.0, 0.0}, {1.0, 0.0}};
    const std::vector<int> y{-1, 1};
    SvmParams params;
    params.kernel.type = KernelSpec::Type::Linear;
    params.C = 10.0;
    const SvmModel m = svm_train(x, y, params);
    CHECK_THAT(m.bias, Catch::Matchers::WithinAbs(0.0, 1e-6));
    CHECK_THAT(svm_decision(m, {1.0, 0.0}), Catch::Matchers::WithinAbs(1.0, 1e-3));
    CHECK_THAT(svm_decision(m, {-1.0, 0.0}), Catch::Matchers::WithinAbs(-1.0, 1e-3));
    CHECK_THAT(svm_decision(m, {3.0, 0.0}), Catch::Matchers::WithinAbs(3.0, 1e-3));
    CHECK(svm_predict(m, {0.5, 0.0}) == 1);
    CHECK(svm_predict(m, {-0.5, 0.0}) == -1);
}

TEST_CASE("xor needs the rbf kernel") {
    const std::vector<std::vector<double>> x{{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
    const std::vector<int> y{1, 1, -1, -1};

    SvmParams lin;
    lin.kernel.type = KernelSpec::Type::Linear;
    lin.C = 10.0;
    const SvmModel ml = svm_train(x, y, lin);
    int correct_lin = 0;
    for (size_t i = 0; i < 4; ++i) correct_lin += svm_predict(ml, x[i]) == y[i];
    CHECK(correct_lin <= 3);  // not linearly separable

    SvmParams rbf;
    rbf.kernel.type = KernelSpec::Type::Rbf;
    rbf.kernel.gamma = 1.0;
    rbf.C = 10.0;
    const SvmModel mr = svm_train(x, y, rbf);
    for (size_t i = 0; i < 4; ++i) CHECK(svm_predict(mr, x[i]) == y[i]);
}

TEST_CASE("smo dual objective never decreases") {
    std::mt19937_64 rng(111);
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 30; ++i) {
        const int label = i % 2 ? 1 : -1;
        x.push_back({d(rng) + 1.2 * label, d(rng) - 0.7 * label});
        y.push_back(label);
    }
    SvmParams params;
    params.C = 2.0;
    params.track_objective = true;
    const SvmModel m = svm_train(x, y, params);
    REQUIRE(m.objective_trace.size() >= 2);
    for (size_t i = 1; i < m.objective_trace.size(); ++i)
        CHECK(m.objective_trace[i] >= m.objective_trace[i - 1] - 1e-9);
    CHECK_THAT(m.dual_objective, Catch::Matchers::WithinAbs(m.objective_trace.back(), 1e-12));
}

TEST_CASE("smo is stable under row permutation") {
    std::mt19937_64 rng(121);
    std::normal_distribution<double> d(0.0, 0.8);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 24; ++i) {
        const int label = i < 12 ? 1 : -1;
        x.push_back({d(rng) + 2.0 * label, d(rng)});
        y.push_back(label);
    }
    SvmParams params;
    params.C = 1.0;
    const SvmModel a = svm_train(x, y, params);

    std::vector<size_t> order(x.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<double>> xp;
    std::vector<int> yp;
    for (size_t i : order) {
        xp.push_back(x[i]);
        yp.push_back(y[i]);
    }
    const SvmModel b = svm_train(xp, yp, params);

    for (double qx = -3.0; qx <= 3.0; qx += 0.5)
        for (double qy = -2.0; qy <= 2.0; qy += 1.0) {
            const double fa = svm_decision(a, {qx, qy});
            const double fb = svm_decision(b, {qx, qy});
            CAPTURE(qx, qy, fa, fb);
            CHECK_THAT(fa, Catch::Matchers::WithinAbs(fb, 2e-2));
        }
}

TEST_CASE("smo validates its input") {
    SvmParams params;
    CHECK_THROWS_AS(svm_train({{1.0}}, {1}, params), Error);
    CHECK_THROWS_AS(svm_train({{1.0}, {2.0}}, {1, 0}, params), Error);
    CHECK_THROWS_AS(svm_train({{1.0}, {2.0}}, {1, 1}, params), Error);
    params.C = 0.0;
    CHECK_THROWS_AS(svm_train({{1.0}, {2.0}}, {1, -1}, params), Error);
}

TEST_CASE("smo agrees with the projected-gradient oracle on small problems") {
    std::mt19937_64 rng(131);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const size_t n = 4 + rng() % 8;
        const size_t dims = 2 + rng() % 4;
        std::vector<std::vector<double>> x(n, std::vector<double>(dims));
        std::vector<int> y(n);
        bool pos = false, neg = false;
        for (size_t i = 0; i < n; ++i) {
            y[i] = rng() % 2 ? 1 : -1;
            (y[i] > 0 ? pos : neg) = true;
            for (double& v : x[i]) v = d(rng) + 0.8 * y[i];
        }
        if (!pos) y[0] = 1;
        if (!neg) y[1] = -1;

        SvmParams params;
        params.kernel.type = trial % 2 ? KernelSpec::Type::Rbf : KernelSpec::Type::Linear;
        params.kernel.gamma = 0.5;
        params.C = trial % 3 == 0 ? 0.5 : 5.0;
        const SvmModel m = svm_train(x, y, params);
        const testutil::QpSolution sol = testutil::qp_solve(x, y, params.kernel, params.C);

        CAPTURE(trial, n, dims, m.dual_objective, sol.objective);
        CHECK_THAT(m.dual_objective, Catch::Matchers::WithinAbs(sol.objective, 1e-3));
        for (size_t i = 0; i < n; ++i) {
            const double fs = svm_decision(m, x[i]);
            const double fq = testutil::qp_decision(sol, x, y, params.kernel, x[i]);
            if (std::abs(fs) < 1e-4 || std::abs(fq) < 1e-4) continue;
            CHECK((fs >= 0) == (fq >= 0));
        }
    }
}
