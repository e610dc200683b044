// derm: lesion screening pipeline CLI.
//
// Exit codes: 0 success (classify: benign), 2 classify: melanoma, 1 error.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "derm/config.hpp"
#include "derm/contour.hpp"
#include "derm/dataset.hpp"
#include "derm/experiment.hpp"
#include "derm/image_io.hpp"
#include "derm/model_io.hpp"
#include "derm/overlay.hpp"
#include "derm/pipeline.hpp"
#include "derm/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::vector<std::string> sets;
    int jobs = 0;
    uint64_t seed = 0;
    bool seed_given = false;
};

derm::AppConfig resolve_config(const GlobalOpts& g) {
    derm::AppConfig cfg =
        g.config_path.empty()
            ? derm::parse_config_text(derm::default_config_text(), "<defaults>", g.sets)
            : derm::load_config(g.config_path, g.sets);
    if (g.seed_given) cfg.experiment.base_seed = g.seed;
    return cfg;
}

std::string iso_utc_now() {
    const std::time_t tt = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    return buf;
}

void emit(const json& j, const std::string& out_path) {
    const std::string text = j.dump(2) + "\n";
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw derm::IoError("cannot write: " + out_path);
        out << text;
    }
    std::cout << text;
}

json features_json(const derm::FeatureVector& v) {
    json j;
    const auto names = derm::FeatureVector::names();
    const auto vals = v.flat();
    for (size_t i = 0; i < names.size(); ++i) j[names[i]] = vals[i];
    return j;
}

json times_json(const derm::StageTimesMs& t) {
    return {{"preprocess", t.preprocess},
            {"segment", t.segment},
            {"features", t.features},
            {"classify", t.classify},
            {"total", t.total}};
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

// ---- classify --------------------------------------------------------------

int cmd_classify(const GlobalOpts&, const std::string& image_path,
                 const std::string& model_path, const std::string& out_path,
                 const std::string& out_dir) {
    const derm::ClassifierBundle bundle = derm::load_model(model_path);
    const derm::RgbImage img = derm::load_image(image_path);
    derm::AnalyzeResult res = derm::analyze_image(img, bundle.pipeline);

    const auto t0 = std::chrono::steady_clock::now();
    const double f = derm::svm_decision(bundle.model, bundle.scaler.apply(res.analysis.vec.flat()));
    res.times.classify = derm::pipe_detail::ms_since(t0);
    res.times.total += res.times.classify;
    const bool melanoma = f >= 0.0;

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        derm::RgbImage overlay = res.processed;
        derm::draw_mask_outline(overlay, res.mask, {255, 255, 0});
        derm::save_png(overlay, (fs::path(out_dir) / (stem_of(image_path) + "_contour.png")).string());
    }

    json colors = json::array();
    for (const derm::ColorRegion& r : res.analysis.regions)
        colors.push_back(derm::color_class_name(r.cls));
    emit(json{{"schema_version", 1},
              {"image", image_path},
              {"label", melanoma ? "melanoma" : "benign"},
              {"decision_value", f},
              {"features", features_json(res.analysis.vec)},
              {"colors", colors},
              {"segmentation", {{"iterations", res.iterations}, {"area_px", res.mask.area()}}},
              {"times_ms", times_json(res.times)}},
         out_path);
    return melanoma ? 2 : 0;
}

// ---- segment ---------------------------------------------------------------

int cmd_segment(const GlobalOpts& g, const std::string& image_path, const std::string& out_dir,
                bool snapshots, const std::string& out_path) {
    const derm::AppConfig cfg = resolve_config(g);
    const derm::RgbImage input = derm::load_image(image_path);
    const derm::RgbImage processed = derm::apply_resize(input, cfg.pipeline.pre);

    const std::vector<int> snap_passes{50, 100, 200, 400};
    std::vector<std::pair<int, derm::BinaryMask>> snaps;
    derm::SnapshotFn cb;
    if (snapshots)
        cb = [&](int pass, const derm::LevelSetGrid& grid) {
            for (int p : snap_passes)
                if (pass == p) snaps.emplace_back(pass, derm::to_mask(grid));
        };

    const auto t0 = std::chrono::steady_clock::now();
    const derm::PlanarImage planes = derm::preprocess(processed, cfg.pipeline.pre);
    const derm::EvolveResult res = derm::evolve(planes, cfg.pipeline.seg, cb);
    const double ms = derm::pipe_detail::ms_since(t0);

    fs::create_directories(out_dir.empty() ? "." : out_dir);
    const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    const std::string stem = stem_of(image_path);

    const std::string mask_path = (dir / (stem + "_mask.png")).string();
    derm::RgbImage mask_img(res.mask.width, res.mask.height);
    for (size_t i = 0; i < res.mask.bits.size(); ++i)
        if (res.mask.bits[i])
            mask_img.data[i * 3] = mask_img.data[i * 3 + 1] = mask_img.data[i * 3 + 2] = 255;
    derm::save_png(mask_img, mask_path);

    json snap_json = json::array();
    if (snapshots) {
        const std::vector<derm::Rgb8> palette{
            {255, 0, 0}, {0, 255, 0}, {0, 255, 255}, {0, 0, 255}};
        std::vector<std::pair<derm::BinaryMask, derm::Rgb8>> layers;
        for (size_t i = 0; i < snaps.size(); ++i)
            layers.emplace_back(snaps[i].second, palette[i % palette.size()]);
        layers.emplace_back(res.mask, derm::Rgb8{255, 255, 255});
        const std::string overlay_path = (dir / (stem + "_evolution.png")).string();
        derm::save_png(derm::render_snapshots(processed, layers), overlay_path);
        for (const auto& [pass, mask] : snaps)
            snap_json.push_back({{"pass", pass}, {"area_px", mask.area()}});
        snap_json.push_back({{"pass", res.iterations_used}, {"area_px", res.mask.area()}});
    }

    const derm::Contour contour = derm::trace_contour(res.mask);
    json j{{"schema_version", 1},
           {"image", image_path},
           {"mask", mask_path},
           {"iterations", res.iterations_used},
           {"area_px", res.mask.area()},
           {"perimeter_px", derm::contour_perimeter(contour)},
           {"segment_ms", ms}};
    if (snapshots) j["snapshots"] = snap_json;
    emit(j, out_path);
    return 0;
}

// ---- features --------------------------------------------------------------

int cmd_features(const GlobalOpts& g, const std::string& image_path,
                 const std::string& mask_path, const std::string& out_dir,
                 const std::string& out_path) {
    const derm::AppConfig cfg = resolve_config(g);
    const derm::RgbImage input = derm::load_image(image_path);
    const derm::RgbImage processed = derm::apply_resize(input, cfg.pipeline.pre);

    derm::BinaryMask mask;
    int iterations = 0;
    if (!mask_path.empty()) {
        mask = derm::mask_from_image(derm::load_image(mask_path));
        if (cfg.pipeline.pre.resize_long_edge > 0)
            mask = derm::apply_resize_mask(mask, cfg.pipeline.pre);
        if (mask.width != processed.width || mask.height != processed.height)
            throw derm::Error("mask size does not match the processed image");
    } else {
        const derm::EvolveResult res =
            derm::evolve(derm::preprocess(processed, cfg.pipeline.pre), cfg.pipeline.seg);
        mask = res.mask;
        iterations = res.iterations_used;
    }

    const derm::FeatureAnalysis a =
        derm::extract_features_full(processed, mask, cfg.pipeline.feat);

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        const fs::path dir(out_dir);
        const std::string stem = stem_of(image_path);
        derm::RgbImage contour_img = processed;
        derm::draw_mask_outline(contour_img, mask, {255, 255, 0});
        derm::save_png(contour_img, (dir / (stem + "_contour.png")).string());
        derm::save_png(derm::render_asymmetry(a), (dir / (stem + "_asymmetry.png")).string());
        derm::save_png(derm::render_color_regions(processed, mask, cfg.pipeline.feat, a.regions),
                       (dir / (stem + "_regions.png")).string());
    }

    json colors = json::array();
    for (const derm::ColorRegion& r : a.regions) colors.push_back(derm::color_class_name(r.cls));
    emit(json{{"schema_version", 1},
              {"image", image_path},
              {"features", features_json(a.vec)},
              {"colors", colors},
              {"segmentation", {{"iterations", iterations}, {"area_px", mask.area()}}},
              {"min_area_rect",
               {{"cx", a.mar.center.x},
                {"cy", a.mar.center.y},
                {"long_side", a.mar.long_side},
                {"short_side", a.mar.short_side},
                {"angle_deg", a.mar.angle * 180.0 / M_PI}}}},
         out_path);
    return 0;
}

// ---- train -----------------------------------------------------------------

int cmd_train(const GlobalOpts& g, const std::string& manifest_path,
              const std::string& model_path, double fixed_c, bool no_smote,
              const std::string& out_path) {
    derm::AppConfig cfg = resolve_config(g);
    if (no_smote) cfg.experiment.use_smote = false;
    const auto entries = derm::load_manifest(manifest_path);
    const auto rows = derm::extract_all_features(entries, cfg.pipeline, g.jobs);

    std::vector<size_t> usable;
    json failures = json::array();
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].ok)
            usable.push_back(i);
        else
            failures.push_back(rows[i].image + ": " + rows[i].error);
    }
    if (usable.size() < 4) throw derm::Error("train: too few analyzable images");

    const std::vector<int> all_idx = derm::feature_groups().back().second;
    double best_c = fixed_c;
    json grid = json::array();
    if (fixed_c <= 0) {
        double best_acc = -1.0;
        for (double c : cfg.experiment.c_grid) {
            const derm::CellMetrics m = derm::exp_detail::eval_cell(
                rows, usable, all_idx, cfg.experiment, c, cfg.experiment.use_smote);
            grid.push_back({{"c", c},
                            {"accuracy_mean", m.accuracy.mean},
                            {"sensitivity_mean", m.sensitivity.mean},
                            {"specificity_mean", m.specificity.mean},
                            {"auc_mean", m.auc.mean}});
            if (m.accuracy.mean > best_acc) {
                best_acc = m.accuracy.mean;
                best_c = c;
            }
        }
    }

    // Final model: every analyzable image, standardized, balanced, one fit.
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (size_t i : usable) {
        x.push_back(rows[i].x);
        y.push_back(rows[i].label == derm::Label::Melanoma ? 1 : -1);
    }
    derm::ClassifierBundle bundle;
    bundle.scaler.fit(x, /*allow_constant=*/true);
    x = bundle.scaler.apply_all(x);
    if (cfg.experiment.use_smote) {
        derm::SmoteConfig sc;
        sc.k_neighbors = cfg.experiment.smote_k;
        sc.seed = cfg.experiment.base_seed;
        derm::smote_balance(x, y, sc);
    }
    derm::SvmParams params;
    params.kernel = cfg.experiment.kernel;
    params.C = best_c;
    params.tol = cfg.experiment.svm_tol;
    params.max_iter = cfg.experiment.svm_max_iter;
    params.seed = cfg.experiment.base_seed;
    bundle.model = derm::svm_train(x, y, params);
    bundle.pipeline = cfg.pipeline;
    derm::save_model(bundle, model_path);

    emit(json{{"schema_version", 1},
              {"model", model_path},
              {"kernel", derm::kernel_name(cfg.experiment.kernel.type)},
              {"best_c", best_c},
              {"grid", grid},
              {"smote", cfg.experiment.use_smote},
              {"n_images", rows.size()},
              {"n_support_vectors", bundle.model.sv.size()},
              {"failures", failures}},
         out_path);
    return 0;
}

// ---- eval ------------------------------------------------------------------

int cmd_eval(const GlobalOpts& g, const std::string& manifest_path,
             const std::string& out_path) {
    const derm::AppConfig cfg = resolve_config(g);
    const auto t0 = std::chrono::steady_clock::now();
    const auto entries = derm::load_manifest(manifest_path);
    const auto rows = derm::extract_all_features(entries, cfg.pipeline, g.jobs);
    const derm::ExperimentReport rep = derm::run_experiment(rows, cfg.experiment);

    json j = derm::experiment_report_json(rep, cfg.experiment);
    j["manifest"] = manifest_path;
    j["metadata"] = {{"generated_at", iso_utc_now()},
                     {"wall_ms", derm::pipe_detail::ms_since(t0)},
                     {"jobs", g.jobs}};
    emit(j, out_path);
    return 0;
}

// ---- bench -----------------------------------------------------------------

int cmd_bench(const GlobalOpts& g, const std::string& manifest_path, int limit, int warmup,
              const std::string& model_path, const std::string& out_path) {
    const derm::AppConfig cfg = resolve_config(g);
    auto entries = derm::load_manifest(manifest_path);

    if (limit > 0 && static_cast<size_t>(limit) < entries.size()) {
        // Proportional systematic sample so both labels stay represented.
        std::vector<size_t> ben, mel;
        for (size_t i = 0; i < entries.size(); ++i)
            (entries[i].label == derm::Label::Melanoma ? mel : ben).push_back(i);
        const double frac = static_cast<double>(limit) / entries.size();
        auto pick = [&](const std::vector<size_t>& src, std::vector<size_t>& dst) {
            const size_t want = std::max<size_t>(
                src.empty() ? 0 : 1,
                static_cast<size_t>(std::lround(frac * static_cast<double>(src.size()))));
            for (size_t k = 0; k < want && k < src.size(); ++k)
                dst.push_back(src[k * src.size() / want]);
        };
        std::vector<size_t> keep;
        pick(ben, keep);
        pick(mel, keep);
        std::sort(keep.begin(), keep.end());
        std::vector<derm::ManifestEntry> subset;
        for (size_t i : keep) subset.push_back(entries[i]);
        entries = std::move(subset);
    }

    std::unique_ptr<derm::ClassifierBundle> bundle;
    if (!model_path.empty())
        bundle = std::make_unique<derm::ClassifierBundle>(derm::load_model(model_path));
    const derm::BenchReport rep = derm::bench_run(entries, cfg.pipeline, bundle.get(), warmup);
    json j = derm::bench_report_json(rep);
    j["manifest"] = manifest_path;
    j["metadata"] = {{"generated_at", iso_utc_now()}};
    emit(j, out_path);
    return 0;
}

// ---- make-manifest ---------------------------------------------------------

std::map<std::string, std::pair<derm::Label, std::string>> parse_ph2_index(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw derm::IoError("cannot open index: " + path);
    std::map<std::string, std::pair<derm::Label, std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find('|') == std::string::npos) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, '|')) {
            cell = derm::cfg_detail::trim(cell);
            if (!cell.empty()) cells.push_back(cell);
        }
        if (cells.empty() || cells[0].rfind("IMD", 0) != 0) continue;
        std::string sub = "common_nevus";
        derm::Label label = derm::Label::Benign;
        // Clinical diagnosis is the first purely numeric cell: 0 common
        // nevus, 1 atypical nevus, 2 melanoma. A textual "Melanoma" cell
        // (histological diagnosis) also marks the positive class.
        bool diag_found = false;
        for (size_t i = 1; i < cells.size() && !diag_found; ++i) {
            if (cells[i] == "0" || cells[i] == "1" || cells[i] == "2") {
                diag_found = true;
                if (cells[i] == "1") sub = "atypical_nevus";
                if (cells[i] == "2") {
                    sub = "melanoma";
                    label = derm::Label::Melanoma;
                }
            }
        }
        for (size_t i = 1; i < cells.size(); ++i) {
            std::string low = cells[i];
            std::transform(low.begin(), low.end(), low.begin(), ::tolower);
            if (low.find("melanoma") != std::string::npos) {
                label = derm::Label::Melanoma;
                sub = "melanoma";
            }
        }
        out[cells[0]] = {label, sub};
    }
    if (out.empty()) throw derm::Error("no usable rows in index: " + path);
    return out;
}

std::map<std::string, derm::Label> parse_label_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw derm::IoError("cannot open labels: " + path);
    std::map<std::string, derm::Label> out;
    std::string line;
    while (std::getline(in, line)) {
        line = derm::cfg_detail::trim(line);
        if (line.empty() || line[0] == '#' || line.rfind("image", 0) == 0) continue;
        const size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw derm::Error("labels file expects 'name,label': " + line);
        const std::string name = derm::cfg_detail::trim(line.substr(0, comma));
        const std::string lab = derm::cfg_detail::trim(line.substr(comma + 1));
        if (lab == "melanoma")
            out[name] = derm::Label::Melanoma;
        else if (lab == "benign")
            out[name] = derm::Label::Benign;
        else
            throw derm::Error("label must be melanoma or benign: " + line);
    }
    return out;
}

int cmd_make_manifest(const std::string& dir, const std::string& out,
                      const std::string& labels_path) {
    std::vector<derm::ManifestEntry> entries;

    // PH2-style layout: <dir>/<name>/<name>_Dermoscopic_Image/<name>.bmp with
    // the lesion mask beside it in <name>_lesion/.
    std::vector<fs::path> ph2_dirs;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_directory()) continue;
        const fs::path img_dir = e.path() / (e.path().filename().string() + "_Dermoscopic_Image");
        if (fs::is_directory(img_dir)) ph2_dirs.push_back(e.path());
    }
    std::sort(ph2_dirs.begin(), ph2_dirs.end());

    if (!ph2_dirs.empty()) {
        std::map<std::string, std::pair<derm::Label, std::string>> index;
        if (!labels_path.empty()) {
            for (const auto& [k, v] : parse_label_csv(labels_path))
                index[k] = {v, v == derm::Label::Melanoma ? "melanoma" : "benign"};
        } else {
            fs::path idx;
            for (const fs::path cand :
                 {fs::path(dir) / "PH2_dataset.txt", fs::path(dir).parent_path() / "PH2_dataset.txt"})
                if (fs::exists(cand)) idx = cand;
            if (idx.empty())
                throw derm::Error("PH2 layout found but no PH2_dataset.txt; pass --labels");
            index = parse_ph2_index(idx.string());
        }
        for (const fs::path& d : ph2_dirs) {
            const std::string name = d.filename().string();
            const auto it = index.find(name);
            if (it == index.end()) continue;
            derm::ManifestEntry e;
            e.image_path = (d / (name + "_Dermoscopic_Image") / (name + ".bmp")).string();
            const fs::path mask = d / (name + "_lesion") / (name + "_lesion.bmp");
            if (fs::exists(mask)) e.mask_path = mask.string();
            if (!fs::exists(e.image_path)) continue;
            e.label = it->second.first;
            e.subtype = it->second.second;
            entries.push_back(std::move(e));
        }
    } else {
        // Generic layout: <dir>/images/* with optional <dir>/masks/<stem>_mask.*
        const fs::path images = fs::path(dir) / "images";
        if (!fs::is_directory(images))
            throw derm::Error("no PH2 layout and no images/ directory under: " + dir);
        if (labels_path.empty())
            throw derm::Error("generic layout needs --labels name,label csv");
        const auto labels = parse_label_csv(labels_path);
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(images))
            if (e.is_regular_file()) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const fs::path& f : files) {
            const std::string stem = f.stem().string();
            const auto it = labels.find(stem);
            if (it == labels.end()) continue;
            derm::ManifestEntry e;
            e.image_path = f.string();
            e.label = it->second;
            for (const char* ext : {".png", ".bmp", ".jpg"}) {
                const fs::path mask = fs::path(dir) / "masks" / (stem + "_mask" + ext);
                if (fs::exists(mask)) {
                    e.mask_path = mask.string();
                    break;
                }
            }
            entries.push_back(std::move(e));
        }
    }

    if (entries.empty()) throw derm::Error("no images matched under: " + dir);
    derm::write_manifest(entries, out);
    std::cout << json{{"schema_version", 1}, {"manifest", out}, {"n_images", entries.size()}}
                     .dump(2)
              << "\n";
    return 0;
}

// ---- make-synthetic / make-config -------------------------------------------

int cmd_make_synthetic(const std::string& out_dir, int n_benign, int n_melanoma,
                       uint64_t seed, int width, int height) {
    derm::SynthParams sp;
    sp.n_benign = n_benign;
    sp.n_melanoma = n_melanoma;
    sp.seed = seed;
    sp.width = width;
    sp.height = height;
    const std::string manifest = derm::write_synthetic_corpus(out_dir, sp);
    std::cout << json{{"schema_version", 1},
                      {"manifest", manifest},
                      {"n_benign", n_benign},
                      {"n_melanoma", n_melanoma}}
                     .dump(2)
              << "\n";
    return 0;
}

int cmd_make_config(const std::string& out) {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw derm::IoError("cannot write: " + out);
    f << derm::default_config_text();
    std::cout << json{{"schema_version", 1}, {"config", out}}.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"derm: melanoma screening pipeline (segmentation, features, SVM)"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "INI config file")->envname("DERM_CONFIG");
    app.add_option("--set", g.sets, "Override a config key: section.key=value (repeatable)")
        ->expected(1, -1)
        ->allow_extra_args(false);
    app.add_option("--jobs", g.jobs, "Worker threads (0 = hardware)");
    auto* seed_opt = app.add_option("--seed", g.seed, "Override experiment base seed");

    std::string image, model, manifest, mask, out, out_dir, dir, labels;
    bool snapshots = false, no_smote = false;
    double fixed_c = 0.0;
    int limit = 0, warmup = 1;
    int n_benign = 160, n_melanoma = 40, width = 768, height = 560;
    uint64_t synth_seed = 20260801;

    auto* c_classify = app.add_subcommand("classify", "Classify one image with a trained model");
    c_classify->add_option("image", image)->required()->check(CLI::ExistingFile);
    c_classify->add_option("--model", model, "model json")->required()->check(CLI::ExistingFile);
    c_classify->add_option("--out", out, "also write the json here");
    c_classify->add_option("--out-dir", out_dir, "write a contour overlay png here");

    auto* c_segment = app.add_subcommand("segment", "Segment one image, write the lesion mask");
    c_segment->add_option("image", image)->required()->check(CLI::ExistingFile);
    c_segment->add_option("--out-dir", out_dir, "output directory (default .)");
    c_segment->add_flag("--snapshots", snapshots, "save contour evolution overlay");
    c_segment->add_option("--out", out, "also write the json here");

    auto* c_features = app.add_subcommand("features", "Segment and extract the feature vector");
    c_features->add_option("image", image)->required()->check(CLI::ExistingFile);
    c_features->add_option("--mask", mask, "use this mask instead of segmenting")
        ->check(CLI::ExistingFile);
    c_features->add_option("--out-dir", out_dir, "write overlay renders here");
    c_features->add_option("--out", out, "also write the json here");

    auto* c_train = app.add_subcommand("train", "Train an SVM over a manifest");
    c_train->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
    c_train->add_option("--model", model, "output model path")->required();
    c_train->add_option("--c", fixed_c, "fix C instead of grid-searching");
    c_train->add_flag("--no-smote", no_smote, "train without minority oversampling");
    c_train->add_option("--out", out, "also write the summary json here");

    auto* c_eval = app.add_subcommand("eval", "Cross-validated evaluation report");
    c_eval->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
    c_eval->add_option("--out", out, "also write the report here");

    auto* c_bench = app.add_subcommand("bench", "Per-stage timing sweep");
    c_bench->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
    c_bench->add_option("--limit", limit, "sample this many images");
    c_bench->add_option("--warmup", warmup, "untimed warm-up runs");
    c_bench->add_option("--model", model, "include classify timing")->check(CLI::ExistingFile);
    c_bench->add_option("--out", out, "also write the json here");

    auto* c_mkman = app.add_subcommand("make-manifest", "Scan a dataset directory into a manifest");
    c_mkman->add_option("--dir", dir)->required()->check(CLI::ExistingDirectory);
    c_mkman->add_option("--out", out_dir, "")->required();
    c_mkman->add_option("--labels", labels, "name,label csv")->check(CLI::ExistingFile);

    auto* c_mksyn = app.add_subcommand("make-synthetic", "Generate a synthetic labelled corpus");
    c_mksyn->add_option("--out-dir", out_dir)->required();
    c_mksyn->add_option("--benign", n_benign, "benign image count");
    c_mksyn->add_option("--melanoma", n_melanoma, "melanoma image count");
    c_mksyn->add_option("--seed", synth_seed, "corpus seed");
    c_mksyn->add_option("--width", width);
    c_mksyn->add_option("--height", height);

    auto* c_mkcfg = app.add_subcommand("make-config", "Write the default config");
    c_mkcfg->add_option("--out", out, "output path")->required();

    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    g.seed_given = seed_opt->count() > 0;

    try {
        if (c_classify->parsed()) return cmd_classify(g, image, model, out, out_dir);
        if (c_segment->parsed()) return cmd_segment(g, image, out_dir, snapshots, out);
        if (c_features->parsed()) return cmd_features(g, image, mask, out_dir, out);
        if (c_train->parsed()) return cmd_train(g, manifest, model, fixed_c, no_smote, out);
        if (c_eval->parsed()) return cmd_eval(g, manifest, out);
        if (c_bench->parsed()) return cmd_bench(g, manifest, limit, warmup, model, out);
        if (c_mkman->parsed()) return cmd_make_manifest(dir, out_dir, labels);
        if (c_mksyn->parsed())
            return cmd_make_synthetic(out_dir, n_benign, n_melanoma, synth_seed, width, height);
        if (c_mkcfg->parsed()) return cmd_make_config(out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}
