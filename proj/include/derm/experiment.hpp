#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "derm/dataset.hpp"
#include "derm/metrics.hpp"
#include "derm/model_io.hpp"
#include "derm/pipeline.hpp"
#include "derm/scaler.hpp"
#include "derm/smote.hpp"
#include "derm/svm.hpp"
#include "derm/synth.hpp"

namespace derm {

// One image run end to end: features plus segmentation quality and timings.
struct FeatureRow {
    std::string image;
    Label label = Label::Benign;
    bool ok = false;
    std::string error;
    std::vector<double> x;
    double dice = std::numeric_limits<double>::quiet_NaN();  // NaN without ground truth
    int iterations = 0;
    StageTimesMs times;
};

struct ExperimentConfig {
    KernelSpec kernel;  // rbf by default
    std::vector<double> c_grid{0.1, 1.0, 10.0};
    int n_seeds = 20;
    uint64_t base_seed = 1;
    double train_ratio = 0.7;
    bool use_smote = true;
    int smote_k = 5;
    double svm_tol = 1e-3;
    int svm_max_iter = 200000;
};

inline FeatureRow analyze_manifest_entry(const ManifestEntry& entry,
                                         const PipelineConfig& cfg) {
    FeatureRow row;
    row.image = entry.image_path;
    row.label = entry.label;
    try {
        const RgbImage img = load_image(entry.image_path);
        const AnalyzeResult res = analyze_image(img, cfg);
        row.x = res.analysis.vec.flat();
        row.iterations = res.iterations;
        row.times = res.times;
        if (!entry.mask_path.empty()) {
            BinaryMask gt = mask_from_image(load_image(entry.mask_path));
            if (cfg.pre.resize_long_edge > 0) gt = apply_resize_mask(gt, cfg.pre);
            row.dice = dice(res.mask, gt);
        }
        row.ok = true;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

inline std::vector<FeatureRow> extract_all_features(const std::vector<ManifestEntry>& entries,
                                                    const PipelineConfig& cfg, int jobs) {
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 0) jobs = 1;
    jobs = std::min<int>(jobs, static_cast<int>(entries.size()));
    std::vector<FeatureRow> rows(entries.size());
    if (entries.empty()) return rows;

    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= entries.size()) return;
            rows[i] = analyze_manifest_entry(entries[i], cfg);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return rows;
}

struct Agg {
    double mean = 0.0;
    double stdev = 0.0;
    int n = 0;
};

inline Agg aggregate(const std::vector<double>& v) {
    Agg a;
    a.n = static_cast<int>(v.size());
    if (v.empty()) return a;
    for (double x : v) a.mean += x;
    a.mean /= a.n;
    if (a.n > 1) {
        double ss = 0.0;
        for (double x : v) ss += sq(x - a.mean);
        a.stdev = std::sqrt(ss / (a.n - 1));
    }
    return a;
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Mean metrics over the seed repetitions of one train/test configuration.
struct CellMetrics {
    Agg sensitivity, specificity, accuracy, precision, auc;
    int seeds = 0;
};

namespace exp_detail {

struct SeedOutcome {
    double sens, spec, acc, auc;
    std::optional<double> prec;
};

inline SeedOutcome eval_seed(const std::vector<FeatureRow>& rows,
                             const std::vector<size_t>& usable,
                             const std::vector<int>& feat_idx, const ExperimentConfig& cfg,
                             double c, uint64_t seed, bool use_smote) {
    std::vector<Label> labels;
    labels.reserve(usable.size());
    for (size_t r : usable) labels.push_back(rows[r].label);
    const Split split = stratified_split(labels, cfg.train_ratio, seed);

    auto take = [&](const std::vector<size_t>& ids, std::vector<std::vector<double>>& xs,
                    std::vector<int>& ys) {
        for (size_t id : ids) {
            const FeatureRow& row = rows[usable[id]];
            std::vector<double> v;
            v.reserve(feat_idx.size());
            for (int f : feat_idx) v.push_back(row.x[static_cast<size_t>(f)]);
            xs.push_back(std::move(v));
            ys.push_back(row.label == Label::Melanoma ? 1 : -1);
        }
    };
    std::vector<std::vector<double>> x_train, x_test;
    std::vector<int> y_train, y_test;
    take(split.train, x_train, y_train);
    take(split.test, x_test, y_test);

    Scaler scaler;
    scaler.fit(x_train, /*allow_constant=*/true);
    x_train = scaler.apply_all(x_train);
    x_test = scaler.apply_all(x_test);

    if (use_smote) {
        SmoteConfig sc;
        sc.k_neighbors = cfg.smote_k;
        sc.target_ratio = 1.0;
        sc.seed = seed;
        smote_balance(x_train, y_train, sc);
    }

    SvmParams params;
    params.kernel = cfg.kernel;
    params.C = c;
    params.tol = cfg.svm_tol;
    params.max_iter = cfg.svm_max_iter;
    params.seed = seed;
    const SvmModel model = svm_train(x_train, y_train, params);

    ConfusionCounts counts;
    std::vector<double> scores;
    std::vector<int> truth;
    for (size_t i = 0; i < x_test.size(); ++i) {
        const double f = svm_decision(model, x_test[i]);
        counts.add(y_test[i] == 1, f >= 0.0);
        scores.push_back(f);
        truth.push_back(y_test[i]);
    }
    const Metrics m = compute_metrics(counts);
    SeedOutcome out;
    out.sens = m.sensitivity.value_or(0.0);
    out.spec = m.specificity.value_or(0.0);
    out.acc = m.accuracy.value_or(0.0);
    out.prec = m.precision;
    out.auc = roc_auc(scores, truth).auc;
    return out;
}

inline CellMetrics eval_cell(const std::vector<FeatureRow>& rows,
                             const std::vector<size_t>& usable,
                             const std::vector<int>& feat_idx, const ExperimentConfig& cfg,
                             double c, bool use_smote) {
    std::vector<double> sens, spec, acc, prec, auc;
    for (int s = 0; s < cfg.n_seeds; ++s) {
        const SeedOutcome o =
            eval_seed(rows, usable, feat_idx, cfg, c, cfg.base_seed + static_cast<uint64_t>(s),
                      use_smote);
        sens.push_back(o.sens);
        spec.push_back(o.spec);
        acc.push_back(o.acc);
        auc.push_back(o.auc);
        if (o.prec) prec.push_back(*o.prec);
    }
    CellMetrics cm;
    cm.seeds = cfg.n_seeds;
    cm.sensitivity = aggregate(sens);
    cm.specificity = aggregate(spec);
    cm.accuracy = aggregate(acc);
    cm.precision = aggregate(prec);
    cm.auc = aggregate(auc);
    return cm;
}

}  // namespace exp_detail

struct GridCell {
    double c = 1.0;
    CellMetrics metrics;
};

struct AblationRow {
    std::string name;
    std::vector<int> feature_idx;
    CellMetrics metrics;
};

struct SegmentationSummary {
    int n_total = 0;
    int n_failed = 0;
    int n_with_gt = 0;
    double dice_median = std::numeric_limits<double>::quiet_NaN();
    double dice_mean = std::numeric_limits<double>::quiet_NaN();
    double frac_dice_ge_070 = std::numeric_limits<double>::quiet_NaN();
    double failure_rate = 0.0;
};

struct ExperimentReport {
    std::vector<GridCell> grid;
    double best_c = 1.0;
    CellMetrics best_metrics;
    CellMetrics smote_on;   // at best_c
    CellMetrics smote_off;  // at best_c
    std::vector<AblationRow> ablation;
    SegmentationSummary segmentation;
    std::vector<std::string> failures;
    int n_rows = 0;
};

// Feature-group slices of the 11-dim vector; "all" must come last so the
// report reads base rows first.
inline std::vector<std::pair<std::string, std::vector<int>>> feature_groups() {
    return {
        {"asymmetry", {0, 1, 2, 3, 4, 5, 6, 7}},
        {"border", {8}},
        {"color", {9}},
        {"diameter", {10}},
        {"all", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10}},
    };
}

inline SegmentationSummary summarize_segmentation(const std::vector<FeatureRow>& rows) {
    SegmentationSummary s;
    s.n_total = static_cast<int>(rows.size());
    std::vector<double> dices;
    for (const FeatureRow& r : rows) {
        if (!r.ok) {
            ++s.n_failed;
            continue;
        }
        if (!std::isnan(r.dice)) dices.push_back(r.dice);
    }
    s.n_with_gt = static_cast<int>(dices.size());
    if (s.n_total > 0) s.failure_rate = static_cast<double>(s.n_failed) / s.n_total;
    if (!dices.empty()) {
        s.dice_median = median_of(dices);
        s.dice_mean = aggregate(dices).mean;
        int ge = 0;
        for (double d : dices) ge += d >= 0.70;
        s.frac_dice_ge_070 = static_cast<double>(ge) / dices.size();
    }
    return s;
}

inline ExperimentReport run_experiment(const std::vector<FeatureRow>& rows,
                                       const ExperimentConfig& cfg) {
    ExperimentReport rep;
    rep.n_rows = static_cast<int>(rows.size());
    std::vector<size_t> usable;
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].ok)
            usable.push_back(i);
        else
            rep.failures.push_back(rows[i].image + ": " + rows[i].error);
    }
    if (usable.size() < 8) throw Error("run_experiment: too few analyzable images");

    const std::vector<int> all_idx = feature_groups().back().second;
    double best_acc = -1.0;
    for (double c : cfg.c_grid) {
        GridCell cell;
        cell.c = c;
        cell.metrics = exp_detail::eval_cell(rows, usable, all_idx, cfg, c, cfg.use_smote);
        if (cell.metrics.accuracy.mean > best_acc) {
            best_acc = cell.metrics.accuracy.mean;
            rep.best_c = c;
            rep.best_metrics = cell.metrics;
        }
        rep.grid.push_back(std::move(cell));
    }

    rep.smote_on = cfg.use_smote
                       ? rep.best_metrics
                       : exp_detail::eval_cell(rows, usable, all_idx, cfg, rep.best_c, true);
    rep.smote_off = !cfg.use_smote
                        ? rep.best_metrics
                        : exp_detail::eval_cell(rows, usable, all_idx, cfg, rep.best_c, false);

    for (const auto& [name, idx] : feature_groups()) {
        AblationRow row;
        row.name = name;
        row.feature_idx = idx;
        row.metrics =
            exp_detail::eval_cell(rows, usable, idx, cfg, rep.best_c, cfg.use_smote);
        rep.ablation.push_back(std::move(row));
    }

    rep.segmentation = summarize_segmentation(rows);
    return rep;
}

namespace exp_detail {

inline nlohmann::json agg_json(const Agg& a) {
    return {{"mean", a.mean}, {"stdev", a.stdev}, {"n", a.n}};
}

inline nlohmann::json cell_json(const CellMetrics& m) {
    return {{"sensitivity", agg_json(m.sensitivity)}, {"specificity", agg_json(m.specificity)},
            {"accuracy", agg_json(m.accuracy)},       {"precision", agg_json(m.precision)},
            {"auc", agg_json(m.auc)},                 {"seeds", m.seeds}};
}

}  // namespace exp_detail

// Everything here is deterministic for a fixed manifest and config; callers
// may add a "metadata" object for timestamps and wall-clock timings.
inline nlohmann::json experiment_report_json(const ExperimentReport& rep,
                                             const ExperimentConfig& cfg) {
    using nlohmann::json;
    json j;
    j["schema_version"] = 1;
    j["config"] = {{"kernel", kernel_name(cfg.kernel.type)},
                   {"gamma", cfg.kernel.gamma},
                   {"c_grid", cfg.c_grid},
                   {"n_seeds", cfg.n_seeds},
                   {"base_seed", cfg.base_seed},
                   {"train_ratio", cfg.train_ratio},
                   {"use_smote", cfg.use_smote}};
    j["n_images"] = rep.n_rows;
    j["failures"] = rep.failures;
    json grid = json::array();
    for (const GridCell& cell : rep.grid)
        grid.push_back({{"c", cell.c}, {"metrics", exp_detail::cell_json(cell.metrics)}});
    j["grid"] = grid;
    j["best_c"] = rep.best_c;
    j["best_metrics"] = exp_detail::cell_json(rep.best_metrics);
    j["smote"] = {{"with", exp_detail::cell_json(rep.smote_on)},
                  {"without", exp_detail::cell_json(rep.smote_off)},
                  {"sensitivity_gain",
                   rep.smote_on.sensitivity.mean - rep.smote_off.sensitivity.mean}};
    json abl = json::array();
    for (const AblationRow& row : rep.ablation)
        abl.push_back({{"features", row.name},
                       {"indices", row.feature_idx},
                       {"metrics", exp_detail::cell_json(row.metrics)}});
    j["ablation"] = abl;
    const SegmentationSummary& s = rep.segmentation;
    j["segmentation"] = {{"n_total", s.n_total},
                         {"n_failed", s.n_failed},
                         {"n_with_ground_truth", s.n_with_gt},
                         {"dice_median", s.dice_median},
                         {"dice_mean", s.dice_mean},
                         {"frac_dice_ge_070", s.frac_dice_ge_070},
                         {"failure_rate", s.failure_rate}};
    return j;
}

// ---- Benchmark ------------------------------------------------------------

struct BenchGroup {
    int n = 0;
    Agg preprocess, segment, features, classify, total;
};

struct BenchReport {
    BenchGroup all, benign, melanoma;
    int n_failed = 0;
};

namespace exp_detail {

inline BenchGroup bench_group(const std::vector<const FeatureRow*>& rows) {
    BenchGroup g;
    g.n = static_cast<int>(rows.size());
    std::vector<double> pre, seg, feat, cls, tot;
    for (const FeatureRow* r : rows) {
        pre.push_back(r->times.preprocess);
        seg.push_back(r->times.segment);
        feat.push_back(r->times.features);
        cls.push_back(r->times.classify);
        tot.push_back(r->times.total);
    }
    g.preprocess = aggregate(pre);
    g.segment = aggregate(seg);
    g.features = aggregate(feat);
    g.classify = aggregate(cls);
    g.total = aggregate(tot);
    return g;
}

}  // namespace exp_detail

// Sequential timing sweep. The first `warmup` images are re-run once before
// timing so cold caches do not pollute the numbers.
inline BenchReport bench_run(const std::vector<ManifestEntry>& entries,
                             const PipelineConfig& cfg, const ClassifierBundle* bundle,
                             int warmup = 1) {
    std::vector<FeatureRow> rows;
    for (size_t i = 0; i < entries.size(); ++i) {
        if (static_cast<int>(i) < warmup) analyze_manifest_entry(entries[i], cfg);
        FeatureRow row = analyze_manifest_entry(entries[i], cfg);
        if (row.ok && bundle) {
            const auto t0 = std::chrono::steady_clock::now();
            svm_decision(bundle->model, bundle->scaler.apply(row.x));
            row.times.classify = pipe_detail::ms_since(t0);
            row.times.total += row.times.classify;
        }
        rows.push_back(std::move(row));
    }
    BenchReport rep;
    std::vector<const FeatureRow*> all, ben, mel;
    for (const FeatureRow& r : rows) {
        if (!r.ok) {
            ++rep.n_failed;
            continue;
        }
        all.push_back(&r);
        (r.label == Label::Melanoma ? mel : ben).push_back(&r);
    }
    rep.all = exp_detail::bench_group(all);
    rep.benign = exp_detail::bench_group(ben);
    rep.melanoma = exp_detail::bench_group(mel);
    return rep;
}

inline nlohmann::json bench_report_json(const BenchReport& rep) {
    using nlohmann::json;
    auto group = [](const BenchGroup& g) {
        return json{{"n", g.n},
                    {"preprocess_ms", exp_detail::agg_json(g.preprocess)},
                    {"segment_ms", exp_detail::agg_json(g.segment)},
                    {"features_ms", exp_detail::agg_json(g.features)},
                    {"classify_ms", exp_detail::agg_json(g.classify)},
                    {"total_ms", exp_detail::agg_json(g.total)}};
    };
    return json{{"schema_version", 1},
                {"all", group(rep.all)},
                {"benign", group(rep.benign)},
                {"melanoma", group(rep.melanoma)},
                {"n_failed", rep.n_failed}};
}

}  // namespace derm
