#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "derm/config.hpp"
#include "derm/dataset.hpp"
#include "derm/experiment.hpp"
#include "derm/image_io.hpp"
#include "derm/metrics.hpp"
#include "derm/model_io.hpp"
#include "support/tmpdir.hpp"

using namespace derm;

TEST_CASE("confusion counts and derived metrics") {
    ConfusionCounts c;
    for (int i = 0; i < 8; ++i) c.add(1, 1);    // tp
    for (int i = 0; i < 2; ++i) c.add(1, -1);   // fn
    for (int i = 0; i < 15; ++i) c.add(-1, -1); // tn
    for (int i = 0; i < 5; ++i) c.add(-1, 1);   // fp
    CHECK(c.tp == 8);
    CHECK(c.fn == 2);
    CHECK(c.tn == 15);
    CHECK(c.fp == 5);
    CHECK(c.total() == 30);
    const Metrics m = compute_metrics(c);
    CHECK_THAT(*m.sensitivity, Catch::Matchers::WithinAbs(0.8, 1e-12));
    CHECK_THAT(*m.specificity, Catch::Matchers::WithinAbs(0.75, 1e-12));
    CHECK_THAT(*m.accuracy, Catch::Matchers::WithinAbs(23.0 / 30.0, 1e-12));
    CHECK_THAT(*m.precision, Catch::Matchers::WithinAbs(8.0 / 13.0, 1e-12));
}

TEST_CASE("undefined ratios stay empty") {
    ConfusionCounts all_neg;
    all_neg.add(-1, -1);
    all_neg.add(-1, -1);
    const Metrics m = compute_metrics(all_neg);
    CHECK_FALSE(m.sensitivity.has_value());
    CHECK_FALSE(m.precision.has_value());
    CHECK(m.specificity.has_value());
    CHECK_THAT(*m.accuracy, Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_FALSE(compute_metrics(ConfusionCounts{}).accuracy.has_value());
}

TEST_CASE("roc auc hits the three canonical values") {
    const std::vector<int> labels{1, 1, -1, -1};
    CHECK_THAT(roc_auc({4.0, 3.0, 2.0, 1.0}, labels).auc,
               Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(roc_auc({1.0, 2.0, 3.0, 4.0}, labels).auc,
               Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(roc_auc({5.0, 5.0, 5.0, 5.0}, labels).auc,
               Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("roc curve runs monotonically from origin to (1,1)") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
        const int y = i % 3 == 0 ? 1 : -1;
        scores.push_back(d(rng) + 0.8 * y);
        labels.push_back(y);
    }
    const RocCurve curve = roc_auc(scores, labels);
    REQUIRE(curve.points.size() >= 2);
    CHECK(curve.points.front().fpr == 0.0);
    CHECK(curve.points.front().tpr == 0.0);
    CHECK(curve.points.back().fpr == 1.0);
    CHECK(curve.points.back().tpr == 1.0);
    for (size_t i = 1; i < curve.points.size(); ++i) {
        CHECK(curve.points[i].fpr >= curve.points[i - 1].fpr);
        CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
    }
}

TEST_CASE("trapezoidal auc equals the mann-whitney statistic under ties") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 12; ++trial) {
        std::vector<double> scores;
        std::vector<int> labels;
        const size_t n = 20 + rng() % 40;
        for (size_t i = 0; i < n; ++i) {
            labels.push_back(rng() % 3 == 0 ? 1 : -1);
            // Quantized scores guarantee plenty of exact ties.
            scores.push_back(static_cast<double>(rng() % 7) / 2.0);
        }
        long pos = 0;
        for (int y : labels) pos += y > 0;
        if (pos == 0) labels[0] = 1;
        if (pos == static_cast<long>(n)) labels[0] = -1;
        CAPTURE(trial, n);
        CHECK_THAT(roc_auc(scores, labels).auc,
                   Catch::Matchers::WithinAbs(mann_whitney_auc(scores, labels), 1e-9));
    }
}

TEST_CASE("roc rejects degenerate input") {
    CHECK_THROWS_AS(roc_auc({}, {}), Error);
    CHECK_THROWS_AS(roc_auc({1.0, 2.0}, {1, 1}), Error);
    CHECK_THROWS_AS(mann_whitney_auc({1.0, 2.0}, {-1, -1}), Error);
}

TEST_CASE("dice overlap scores") {
    BinaryMask a(10, 10), b(10, 10);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 5; ++x) a.set(x, y, true);
    CHECK(dice(a, a) == 1.0);

    for (int y = 0; y < 10; ++y)
        for (int x = 5; x < 10; ++x) b.set(x, y, true);
    CHECK(dice(a, b) == 0.0);

    BinaryMask half(10, 10);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) half.set(x, y, true);
    CHECK_THAT(dice(a, half), Catch::Matchers::WithinAbs(2.0 * 25 / 75.0, 1e-12));

    CHECK(dice(BinaryMask(4, 4), BinaryMask(4, 4)) == 1.0);
    CHECK_THROWS_AS(dice(BinaryMask(4, 4), BinaryMask(5, 4)), Error);
}

namespace {

void write_dummy_png(const std::string& path, uint8_t level) {
    RgbImage img(16, 16);
    for (auto& b : img.data) b = level;
    save_png(img, path);
}

}  // namespace

TEST_CASE("manifest round-trips through csv") {
    testutil::TmpDir tmp("manifest");
    write_dummy_png(tmp.file("a.png"), 40);
    write_dummy_png(tmp.file("b.png"), 90);
    write_dummy_png(tmp.file("b_mask.png"), 255);

    std::vector<ManifestEntry> entries(2);
    entries[0].image_path = tmp.file("a.png");
    entries[0].label = Label::Benign;
    entries[1].image_path = tmp.file("b.png");
    entries[1].label = Label::Melanoma;
    entries[1].mask_path = tmp.file("b_mask.png");
    entries[1].gt_colors = {ColorClass::DarkBrown, ColorClass::Black};
    entries[1].subtype = "melanoma";

    const std::string path = tmp.file("manifest.csv");
    write_manifest(entries, path);
    const auto loaded = load_manifest(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].image_path == entries[0].image_path);
    CHECK(loaded[0].label == Label::Benign);
    CHECK(loaded[0].mask_path.empty());
    CHECK(loaded[1].label == Label::Melanoma);
    CHECK(loaded[1].mask_path == entries[1].mask_path);
    CHECK(loaded[1].gt_colors == entries[1].gt_colors);
    CHECK(loaded[1].subtype == "melanoma");
}

TEST_CASE("manifest resolves relative paths against its own directory") {
    testutil::TmpDir tmp("manifest_rel");
    write_dummy_png(tmp.file("img.png"), 64);
    std::ofstream(tmp.file("m.csv")) << "image,label\nimg.png,benign\n";
    const auto loaded = load_manifest(tmp.file("m.csv"));
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].image_path == tmp.file("img.png"));
}

TEST_CASE("manifest rejects malformed rows") {
    testutil::TmpDir tmp("manifest_bad");
    write_dummy_png(tmp.file("ok.png"), 10);

    auto write = [&](const std::string& body) {
        std::ofstream(tmp.file("m.csv")) << body;
        return tmp.file("m.csv");
    };

    CHECK_THROWS_AS(load_manifest(tmp.file("missing.csv")), IoError);
    CHECK_THROWS_AS(load_manifest(write("")), Error);
    CHECK_THROWS_AS(load_manifest(write("path,label\nok.png,benign\n")), Error);  // bad header
    CHECK_THROWS_AS(load_manifest(write("image,label\n")), Error);                // no rows
    CHECK_THROWS_WITH(load_manifest(write("image,label\nok.png,maybe\n")),
                      Catch::Matchers::ContainsSubstring("row 2"));
    CHECK_THROWS_WITH(load_manifest(write("image,label\nnope.png,benign\n")),
                      Catch::Matchers::ContainsSubstring("not found"));
    CHECK_THROWS_WITH(load_manifest(write("image,label,mask,colors\nok.png,benign,,teal\n")),
                      Catch::Matchers::ContainsSubstring("unknown color class"));
    // Comments and blank lines are skipped.
    const auto ok = load_manifest(write("image,label\n# note\n\nok.png,melanoma\n"));
    CHECK(ok.size() == 1);
}

TEST_CASE("stratified split keeps class proportions") {
    std::vector<Label> labels(200, Label::Benign);
    for (int i = 0; i < 40; ++i) labels[i * 5] = Label::Melanoma;
    const Split s = stratified_split(labels, 0.7, 9);
    CHECK(s.train.size() == 140);
    CHECK(s.test.size() == 60);
    auto count_melanoma = [&](const std::vector<size_t>& idx) {
        size_t k = 0;
        for (size_t i : idx) k += labels[i] == Label::Melanoma;
        return k;
    };
    CHECK(count_melanoma(s.train) == 28);
    CHECK(count_melanoma(s.test) == 12);

    // Exact partition of [0,200), both halves sorted.
    std::set<size_t> seen(s.train.begin(), s.train.end());
    seen.insert(s.test.begin(), s.test.end());
    CHECK(seen.size() == 200);
    CHECK(std::is_sorted(s.train.begin(), s.train.end()));
    CHECK(std::is_sorted(s.test.begin(), s.test.end()));
}

TEST_CASE("stratified split is seeded and clamps tiny classes") {
    std::vector<Label> labels(20, Label::Benign);
    labels[3] = labels[11] = Label::Melanoma;
    const Split a = stratified_split(labels, 0.7, 5);
    const Split b = stratified_split(labels, 0.7, 5);
    const Split c = stratified_split(labels, 0.7, 6);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.train != c.train);

    // Two melanoma members split one per side no matter the ratio.
    for (double ratio : {0.1, 0.5, 0.9}) {
        const Split s = stratified_split(labels, ratio, 1);
        size_t train_mel = 0, test_mel = 0;
        for (size_t i : s.train) train_mel += labels[i] == Label::Melanoma;
        for (size_t i : s.test) test_mel += labels[i] == Label::Melanoma;
        CHECK(train_mel == 1);
        CHECK(test_mel == 1);
    }
}

TEST_CASE("stratified split rejects impossible requests") {
    std::vector<Label> labels(10, Label::Benign);
    CHECK_THROWS_AS(stratified_split(labels, 0.7, 1), Error);  // one class only
    labels[0] = Label::Melanoma;
    CHECK_THROWS_AS(stratified_split(labels, 0.7, 1), Error);  // melanoma n=1
    labels[1] = Label::Melanoma;
    CHECK_THROWS_AS(stratified_split(labels, 0.0, 1), Error);
    CHECK_THROWS_AS(stratified_split(labels, 1.0, 1), Error);
}

TEST_CASE("model bundle round-trips with identical decisions") {
    std::mt19937_64 rng(51);
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 20; ++i) {
        const int label = i % 2 ? 1 : -1;
        x.push_back({d(rng) + label, d(rng) - 0.5 * label, d(rng)});
        y.push_back(label);
    }

    ClassifierBundle bundle;
    bundle.scaler.fit(x);
    SvmParams params;
    params.kernel.type = KernelSpec::Type::Rbf;
    params.kernel.gamma = 0.3;
    params.C = 2.0;
    bundle.model = svm_train(bundle.scaler.apply_all(x), y, params);

    testutil::TmpDir tmp("model");
    const std::string path = tmp.file("model.json");
    save_model(bundle, path);
    const ClassifierBundle back = load_model(path);

    CHECK(back.model.sv == bundle.model.sv);
    CHECK(back.model.coef == bundle.model.coef);
    CHECK(back.model.bias == bundle.model.bias);
    CHECK(back.scaler.mean == bundle.scaler.mean);
    CHECK(back.scaler.stdev == bundle.scaler.stdev);
    CHECK(back.pipeline.feat.table.rules.size() == bundle.pipeline.feat.table.rules.size());
    CHECK(back.pipeline.seg.max_iterations == bundle.pipeline.seg.max_iterations);

    for (int i = 0; i < 10; ++i) {
        const std::vector<double> q{d(rng), d(rng), d(rng)};
        CHECK(svm_decision(back.model, back.scaler.apply(q)) ==
              svm_decision(bundle.model, bundle.scaler.apply(q)));
    }
}

TEST_CASE("model loader rejects broken files") {
    testutil::TmpDir tmp("model_bad");
    CHECK_THROWS_AS(load_model(tmp.file("absent.json")), IoError);

    std::ofstream(tmp.file("junk.json")) << "not json {";
    CHECK_THROWS_AS(load_model(tmp.file("junk.json")), Error);

    std::ofstream(tmp.file("old.json")) << R"({"schema_version": 999})";
    CHECK_THROWS_WITH(load_model(tmp.file("old.json")),
                      Catch::Matchers::ContainsSubstring("schema"));

    // Valid model, then corrupt the sv/coef agreement.
    ClassifierBundle bundle;
    bundle.scaler.mean = {0.0};
    bundle.scaler.stdev = {1.0};
    bundle.model.sv = {{1.0}, {-1.0}};
    bundle.model.coef = {0.5, -0.5};
    const std::string path = tmp.file("model.json");
    save_model(bundle, path);
    nlohmann::json j;
    std::ifstream(path) >> j;
    j["dual_coefs"] = {0.5};
    std::ofstream(path) << j.dump();
    CHECK_THROWS_WITH(load_model(path), Catch::Matchers::ContainsSubstring("mismatch"));
}

TEST_CASE("default config text parses back to the built-in defaults") {
    const AppConfig parsed = parse_config_text(default_config_text(), "defaults");
    const AppConfig fresh;
    CHECK(parsed.pipeline.pre.kernel_size == fresh.pipeline.pre.kernel_size);
    CHECK(parsed.pipeline.pre.sigma == fresh.pipeline.pre.sigma);
    CHECK(parsed.pipeline.seg.lambda1 == fresh.pipeline.seg.lambda1);
    CHECK(parsed.pipeline.seg.lambda2 == fresh.pipeline.seg.lambda2);
    CHECK(parsed.pipeline.seg.n_a == fresh.pipeline.seg.n_a);
    CHECK(parsed.pipeline.seg.n_s == fresh.pipeline.seg.n_s);
    CHECK(parsed.pipeline.seg.max_iterations == fresh.pipeline.seg.max_iterations);
    CHECK(parsed.pipeline.seg.channel_weights == fresh.pipeline.seg.channel_weights);
    CHECK(parsed.pipeline.feat.mm_per_pixel == fresh.pipeline.feat.mm_per_pixel);
    CHECK(parsed.experiment.kernel.gamma == fresh.experiment.kernel.gamma);
    CHECK(parsed.experiment.c_grid == fresh.experiment.c_grid);
    CHECK(parsed.experiment.n_seeds == fresh.experiment.n_seeds);
    CHECK(parsed.experiment.train_ratio == fresh.experiment.train_ratio);
    CHECK(parsed.experiment.use_smote == fresh.experiment.use_smote);
    REQUIRE(parsed.pipeline.feat.table.rules.size() == fresh.pipeline.feat.table.rules.size());
}

TEST_CASE("config errors carry origin and line number") {
    auto expect_error = [](const std::string& text, const std::string& fragment) {
        try {
            parse_config_text(text, "test.ini");
            FAIL("expected ConfigError for: " << text);
        } catch (const ConfigError& e) {
            CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring(fragment));
        }
    };
    expect_error("kernel = rbf\n", "test.ini:1");                       // key before section
    expect_error("[svm]\nkernel rbf\n", "test.ini:2");                  // missing '='
    expect_error("[svm]\nkernel = rbf\nkernel = poly\n", "duplicate");  // duplicate key
    expect_error("[svm\nkernel = rbf\n", "unterminated");
    expect_error("[warp]\nfoo = 1\n", "unknown section");
    expect_error("[svm]\nbandwidth = 2\n", "unknown key");
    expect_error("[svm]\nkernel = sigmoid\n", "linear, rbf or poly");
    expect_error("[svm]\nc_grid = 1, -2\n", "positive");
    expect_error("[experiment]\nn_seeds = 0\n", "at least 1");
    expect_error("[svm]\ngamma = lots\n", "expects a number");
    expect_error("[color:red]\nhue = 10:20\n", "lo-hi");
    expect_error("[color:teal]\ns_min = 0\n", "unknown color class");
}

TEST_CASE("set overrides take precedence over file text") {
    const std::string text = "[svm]\nkernel = rbf\n[segmentation]\ndata_passes = 40\n";
    const AppConfig cfg = parse_config_text(
        text, "inline",
        {"svm.kernel=linear", "segmentation.data_passes=12", "color:black.v_max=0.2",
         "experiment.n_seeds=3"});
    CHECK(cfg.experiment.kernel.type == KernelSpec::Type::Linear);
    CHECK(cfg.pipeline.seg.n_a == 12);
    CHECK(cfg.experiment.n_seeds == 3);
    const ColorRule* black = nullptr;
    for (const auto& r : cfg.pipeline.feat.table.rules)
        if (r.cls == ColorClass::Black) black = &r;
    REQUIRE(black != nullptr);
    CHECK_THAT(black->v_max, Catch::Matchers::WithinAbs(0.2, 1e-12));

    CHECK_THROWS_AS(parse_config_text(text, "inline", {"svm.kernel"}), ConfigError);
    CHECK_THROWS_AS(parse_config_text(text, "inline", {"kernel=linear"}), ConfigError);
}

TEST_CASE("hue ranges parse from dashed pairs") {
    const AppConfig cfg =
        parse_config_text("[color:red]\nhue = 5-15, 340-355\n", "inline");
    const ColorRule* red = nullptr;
    for (const auto& r : cfg.pipeline.feat.table.rules)
        if (r.cls == ColorClass::Red) red = &r;
    REQUIRE(red != nullptr);
    REQUIRE(red->hue.size() == 2);
    CHECK(red->hue[0].first == 5.0);
    CHECK(red->hue[0].second == 15.0);
    CHECK(red->hue[1].first == 340.0);
    CHECK(red->hue[1].second == 355.0);
}

namespace {

// Synthetic 11-dim feature rows with a label-correlated signal. Mirrors the
// layout run_experiment expects without touching any images.
std::vector<FeatureRow> fake_rows(int n_benign, int n_melanoma, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<FeatureRow> rows;
    auto push = [&](Label label) {
        FeatureRow r;
        r.image = "row" + std::to_string(rows.size());
        r.label = label;
        r.ok = true;
        const double shift = label == Label::Melanoma ? 1.6 : 0.0;
        for (int j = 0; j < 11; ++j) r.x.push_back(noise(rng) + shift);
        r.dice = 0.9;
        rows.push_back(std::move(r));
    };
    for (int i = 0; i < n_benign; ++i) push(Label::Benign);
    for (int i = 0; i < n_melanoma; ++i) push(Label::Melanoma);
    return rows;
}

}  // namespace

TEST_CASE("experiment report covers grid, smote and ablation") {
    auto rows = fake_rows(26, 10, 77);
    rows[3].ok = false;
    rows[3].error = "boom";
    rows[3].x.clear();

    ExperimentConfig cfg;
    cfg.c_grid = {0.5, 2.0};
    cfg.n_seeds = 3;
    cfg.base_seed = 11;

    const ExperimentReport rep = run_experiment(rows, cfg);
    CHECK(rep.n_rows == 36);
    REQUIRE(rep.failures.size() == 1);
    CHECK_THAT(rep.failures[0], Catch::Matchers::ContainsSubstring("boom"));
    REQUIRE(rep.grid.size() == 2);
    CHECK((rep.best_c == 0.5 || rep.best_c == 2.0));
    CHECK(rep.best_metrics.seeds == 3);
    CHECK(rep.smote_on.seeds == 3);
    CHECK(rep.smote_off.seeds == 3);
    REQUIRE(rep.ablation.size() == 5);
    CHECK(rep.ablation.back().name == "all");
    CHECK(rep.ablation.back().feature_idx.size() == 11);
    CHECK(rep.segmentation.n_failed == 1);
    CHECK_THAT(rep.segmentation.dice_median, Catch::Matchers::WithinAbs(0.9, 1e-12));

    // Signal is strong: the full model should be clearly better than chance.
    CHECK(rep.best_metrics.accuracy.mean > 0.7);
    CHECK(rep.best_metrics.auc.mean > 0.7);
}

TEST_CASE("experiment with too few usable rows fails loudly") {
    auto rows = fake_rows(4, 3, 5);
    CHECK_THROWS_AS(run_experiment(rows, ExperimentConfig{}), Error);
}

TEST_CASE("experiment json is deterministic and free of wall-clock fields") {
    const auto rows = fake_rows(22, 9, 99);
    ExperimentConfig cfg;
    cfg.c_grid = {1.0};
    cfg.n_seeds = 2;

    const std::string a = experiment_report_json(run_experiment(rows, cfg), cfg).dump(2);
    const std::string b = experiment_report_json(run_experiment(rows, cfg), cfg).dump(2);
    CHECK(a == b);

    const nlohmann::json j = experiment_report_json(run_experiment(rows, cfg), cfg);
    CHECK_FALSE(j.contains("metadata"));
    CHECK(j.contains("schema_version"));
    CHECK(j.contains("grid"));
    CHECK(j.contains("smote"));
    CHECK(j.contains("ablation"));
    CHECK(j.contains("segmentation"));
    const std::string flat = j.dump();
    CHECK(flat.find("_ms") == std::string::npos);
    CHECK(flat.find("time") == std::string::npos);
}
