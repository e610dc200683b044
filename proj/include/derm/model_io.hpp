#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "derm/common.hpp"
#include "derm/pipeline.hpp"
#include "derm/scaler.hpp"
#include "derm/svm.hpp"

namespace derm {

constexpr int kSchemaVersion = 1;

// Everything classify needs: the trained SVM, the feature scaler, and the
// exact pipeline configuration used at training time.
struct ClassifierBundle {
    SvmModel model;
    Scaler scaler;
    PipelineConfig pipeline;
};

namespace mio {

using nlohmann::json;

inline json to_json(const KernelSpec& k) {
    return {{"type", kernel_name(k.type)},
            {"gamma", k.gamma},
            {"coef0", k.coef0},
            {"degree", k.degree}};
}

inline KernelSpec kernel_from_json(const json& j) {
    KernelSpec k;
    const std::string t = j.at("type");
    if (t == "linear")
        k.type = KernelSpec::Type::Linear;
    else if (t == "rbf")
        k.type = KernelSpec::Type::Rbf;
    else if (t == "poly")
        k.type = KernelSpec::Type::Poly;
    else
        throw Error("model: unknown kernel type '" + t + "'");
    k.gamma = j.at("gamma");
    k.coef0 = j.at("coef0");
    k.degree = j.at("degree");
    return k;
}

inline json to_json(const SegmentationParams& s) {
    return {{"lambda1", s.lambda1},
            {"lambda2", s.lambda2},
            {"channel_weights", s.channel_weights},
            {"n_a", s.n_a},
            {"n_s", s.n_s},
            {"max_iterations", s.max_iterations},
            {"init_fraction", s.init_fraction},
            {"smooth_kernel", s.smooth_kernel},
            {"smooth_sigma", s.smooth_sigma}};
}

inline SegmentationParams seg_from_json(const json& j) {
    SegmentationParams s;
    s.lambda1 = j.at("lambda1");
    s.lambda2 = j.at("lambda2");
    s.channel_weights = j.at("channel_weights");
    s.n_a = j.at("n_a");
    s.n_s = j.at("n_s");
    s.max_iterations = j.at("max_iterations");
    s.init_fraction = j.at("init_fraction");
    s.smooth_kernel = j.at("smooth_kernel");
    s.smooth_sigma = j.at("smooth_sigma");
    return s;
}

inline json to_json(const ColorTable& t) {
    json rules = json::array();
    for (const ColorRule& r : t.rules) {
        json hue = json::array();
        for (const auto& [lo, hi] : r.hue) hue.push_back({{"lo", lo}, {"hi", hi}});
        rules.push_back({{"class", color_class_name(r.cls)},
                         {"hue", hue},
                         {"s_min", r.s_min},
                         {"s_max", r.s_max},
                         {"v_min", r.v_min},
                         {"v_max", r.v_max},
                         {"v_max_exclusive", r.v_max_exclusive}});
    }
    return rules;
}

inline ColorTable color_table_from_json(const json& j) {
    ColorTable t;
    for (const json& rj : j) {
        ColorRule r;
        const auto c = color_class_from_name(rj.at("class"));
        if (!c) throw Error("model: unknown color class in table");
        r.cls = *c;
        for (const json& h : rj.at("hue"))
            r.hue.emplace_back(h.at("lo").get<double>(), h.at("hi").get<double>());
        r.s_min = rj.at("s_min");
        r.s_max = rj.at("s_max");
        r.v_min = rj.at("v_min");
        r.v_max = rj.at("v_max");
        r.v_max_exclusive = rj.at("v_max_exclusive");
        t.rules.push_back(std::move(r));
    }
    return t;
}

inline json to_json(const PipelineConfig& p) {
    return {{"preprocess",
             {{"kernel_size", p.pre.kernel_size},
              {"sigma", p.pre.sigma},
              {"resize_long_edge", p.pre.resize_long_edge}}},
            {"segmentation", to_json(p.seg)},
            {"features",
             {{"min_region_fraction", p.feat.min_region_fraction},
              {"mm_per_pixel", p.feat.mm_per_pixel},
              {"color_table", to_json(p.feat.table)}}}};
}

inline PipelineConfig pipeline_from_json(const json& j) {
    PipelineConfig p;
    const json& pre = j.at("preprocess");
    p.pre.kernel_size = pre.at("kernel_size");
    p.pre.sigma = pre.at("sigma");
    p.pre.resize_long_edge = pre.at("resize_long_edge");
    p.seg = seg_from_json(j.at("segmentation"));
    const json& f = j.at("features");
    p.feat.min_region_fraction = f.at("min_region_fraction");
    p.feat.mm_per_pixel = f.at("mm_per_pixel");
    p.feat.table = color_table_from_json(f.at("color_table"));
    return p;
}

}  // namespace mio

inline void save_model(const ClassifierBundle& b, const std::string& path) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["kernel"] = mio::to_json(b.model.kernel);
    j["c"] = b.model.C;
    j["bias"] = b.model.bias;
    j["support_vectors"] = b.model.sv;
    j["dual_coefs"] = b.model.coef;
    j["scaler"] = {{"mean", b.scaler.mean}, {"stdev", b.scaler.stdev}};
    j["pipeline"] = mio::to_json(b.pipeline);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model '" + path + "'");
    out << j.dump(2) << '\n';
}

inline ClassifierBundle load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("model '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != kSchemaVersion)
        throw Error("model '" + path + "': unsupported schema version");
    ClassifierBundle b;
    b.model.kernel = mio::kernel_from_json(j.at("kernel"));
    b.model.C = j.at("c");
    b.model.bias = j.at("bias");
    b.model.sv = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    b.model.coef = j.at("dual_coefs").get<std::vector<double>>();
    if (b.model.sv.size() != b.model.coef.size())
        throw Error("model '" + path + "': svs/coefs length mismatch");
    b.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    b.scaler.stdev = j.at("scaler").at("stdev").get<std::vector<double>>();
    b.pipeline = mio::pipeline_from_json(j.at("pipeline"));
    return b;
}

}  // namespace derm
