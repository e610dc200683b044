#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "derm/common.hpp"
#include "derm/experiment.hpp"
#include "derm/pipeline.hpp"

namespace derm {

struct AppConfig {
    PipelineConfig pipeline;
    ExperimentConfig experiment;
};

namespace cfg_detail {

inline std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

struct IniEntry {
    std::string key, value;
    int line = 0;
};

struct IniSection {
    std::string name;
    int line = 0;
    std::vector<IniEntry> entries;

    IniEntry* find(const std::string& key) {
        for (IniEntry& e : entries)
            if (e.key == key) return &e;
        return nullptr;
    }
};

struct IniDoc {
    std::string origin = "<config>";
    std::vector<IniSection> sections;

    IniSection& section(const std::string& name) {
        for (IniSection& s : sections)
            if (s.name == name) return s;
        sections.push_back({name, 0, {}});
        return sections.back();
    }
};

[[noreturn]] inline void fail(const IniDoc& doc, int line, const std::string& msg) {
    throw ConfigError(doc.origin + ":" + std::to_string(line) + ": " + msg);
}

inline IniDoc parse_ini(const std::string& text, const std::string& origin) {
    IniDoc doc;
    doc.origin = origin;
    std::istringstream in(text);
    std::string raw;
    IniSection* cur = nullptr;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail(doc, lineno, "unterminated section header: " + line);
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) fail(doc, lineno, "empty section name");
            doc.sections.push_back({name, lineno, {}});
            cur = &doc.sections.back();
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail(doc, lineno, "expected 'key = value', got: " + line);
        if (!cur) fail(doc, lineno, "key/value before any [section]");
        IniEntry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno};
        if (e.key.empty()) fail(doc, lineno, "empty key");
        if (IniEntry* prev = cur->find(e.key))
            fail(doc, lineno,
                 "duplicate key '" + e.key + "' (first on line " +
                     std::to_string(prev->line) + ")");
        cur->entries.push_back(std::move(e));
    }
    return doc;
}

// Override spec "section.key=value"; color sections use "color:black.v_max=...".
inline void apply_set(IniDoc& doc, const std::string& spec) {
    const size_t eq = spec.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects section.key=value, got: " + spec);
    const std::string path = trim(spec.substr(0, eq));
    const std::string value = trim(spec.substr(eq + 1));
    const size_t dot = path.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
        throw ConfigError("--set expects section.key=value, got: " + spec);
    IniSection& sec = doc.section(path.substr(0, dot));
    const std::string key = path.substr(dot + 1);
    if (IniEntry* e = sec.find(key))
        e->value = value;
    else
        sec.entries.push_back({key, value, 0});
}

inline double to_double(const IniDoc& doc, const IniEntry& e) {
    try {
        size_t pos = 0;
        const double v = std::stod(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        fail(doc, e.line, "'" + e.key + "' expects a number, got: " + e.value);
    }
}

inline long to_long(const IniDoc& doc, const IniEntry& e) {
    try {
        size_t pos = 0;
        const long v = std::stol(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        fail(doc, e.line, "'" + e.key + "' expects an integer, got: " + e.value);
    }
}

inline bool to_bool(const IniDoc& doc, const IniEntry& e) {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    fail(doc, e.line, "'" + e.key + "' expects true/false, got: " + e.value);
}

inline std::vector<double> to_double_list(const IniDoc& doc, const IniEntry& e) {
    std::vector<double> out;
    std::istringstream in(e.value);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) fail(doc, e.line, "'" + e.key + "' has an empty list item");
        try {
            size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            fail(doc, e.line, "'" + e.key + "' has a non-numeric item: " + tok);
        }
    }
    if (out.empty()) fail(doc, e.line, "'" + e.key + "' expects a comma-separated list");
    return out;
}

// "10-30, 350-360" -> range pairs; empty value means any hue.
inline std::vector<std::pair<double, double>> to_hue_ranges(const IniDoc& doc,
                                                            const IniEntry& e) {
    std::vector<std::pair<double, double>> out;
    if (trim(e.value).empty()) return out;
    std::istringstream in(e.value);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        const size_t dash = tok.find('-');
        if (dash == std::string::npos)
            fail(doc, e.line, "'" + e.key + "' expects lo-hi ranges, got: " + tok);
        try {
            const double lo = std::stod(trim(tok.substr(0, dash)));
            const double hi = std::stod(trim(tok.substr(dash + 1)));
            if (lo < 0 || hi > 360 || lo > hi)
                fail(doc, e.line, "'" + e.key + "' range out of order or outside 0-360");
            out.emplace_back(lo, hi);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            fail(doc, e.line, "'" + e.key + "' expects numeric lo-hi ranges, got: " + tok);
        }
    }
    return out;
}

inline void apply_color_section(const IniDoc& doc, const IniSection& sec, ColorTable& table) {
    const std::string cls_name = sec.name.substr(6);  // after "color:"
    const auto cls = color_class_from_name(cls_name);
    if (!cls) fail(doc, sec.line, "unknown color class: " + cls_name);
    ColorRule* rule = nullptr;
    for (ColorRule& r : table.rules)
        if (r.cls == *cls) rule = &r;
    if (!rule) fail(doc, sec.line, "color class has no rule slot: " + cls_name);
    for (const IniEntry& e : sec.entries) {
        if (e.key == "hue")
            rule->hue = to_hue_ranges(doc, e);
        else if (e.key == "s_min")
            rule->s_min = to_double(doc, e);
        else if (e.key == "s_max")
            rule->s_max = to_double(doc, e);
        else if (e.key == "v_min")
            rule->v_min = to_double(doc, e);
        else if (e.key == "v_max")
            rule->v_max = to_double(doc, e);
        else if (e.key == "v_max_exclusive")
            rule->v_max_exclusive = to_bool(doc, e);
        else
            fail(doc, e.line, "unknown key '" + e.key + "' in [" + sec.name + "]");
    }
}

}  // namespace cfg_detail

inline AppConfig config_from_ini(const cfg_detail::IniDoc& doc) {
    using namespace cfg_detail;
    AppConfig cfg;
    for (const IniSection& sec : doc.sections) {
        if (sec.name == "preprocess") {
            for (const IniEntry& e : sec.entries) {
                if (e.key == "kernel_size")
                    cfg.pipeline.pre.kernel_size = static_cast<int>(to_long(doc, e));
                else if (e.key == "sigma")
                    cfg.pipeline.pre.sigma = to_double(doc, e);
                else if (e.key == "resize_long_edge")
                    cfg.pipeline.pre.resize_long_edge = static_cast<int>(to_long(doc, e));
                else
                    fail(doc, e.line, "unknown key '" + e.key + "' in [preprocess]");
            }
        } else if (sec.name == "segmentation") {
            SegmentationParams& p = cfg.pipeline.seg;
            for (const IniEntry& e : sec.entries) {
                if (e.key == "lambda1")
                    p.lambda1 = to_double(doc, e);
                else if (e.key == "lambda2")
                    p.lambda2 = to_double(doc, e);
                else if (e.key == "weight_y")
                    p.channel_weights[0] = to_double(doc, e);
                else if (e.key == "weight_u")
                    p.channel_weights[1] = to_double(doc, e);
                else if (e.key == "weight_v")
                    p.channel_weights[2] = to_double(doc, e);
                else if (e.key == "data_passes")
                    p.n_a = static_cast<int>(to_long(doc, e));
                else if (e.key == "smooth_passes")
                    p.n_s = static_cast<int>(to_long(doc, e));
                else if (e.key == "max_iterations")
                    p.max_iterations = static_cast<int>(to_long(doc, e));
                else if (e.key == "init_fraction")
                    p.init_fraction = to_double(doc, e);
                else if (e.key == "smooth_kernel")
                    p.smooth_kernel = static_cast<int>(to_long(doc, e));
                else if (e.key == "smooth_sigma")
                    p.smooth_sigma = to_double(doc, e);
                else
                    fail(doc, e.line, "unknown key '" + e.key + "' in [segmentation]");
            }
        } else if (sec.name == "features") {
            for (const IniEntry& e : sec.entries) {
                if (e.key == "min_region_fraction")
                    cfg.pipeline.feat.min_region_fraction = to_double(doc, e);
                else if (e.key == "mm_per_pixel")
                    cfg.pipeline.feat.mm_per_pixel = to_double(doc, e);
                else
                    fail(doc, e.line, "unknown key '" + e.key + "' in [features]");
            }
        } else if (sec.name == "svm") {
            ExperimentConfig& x = cfg.experiment;
            for (const IniEntry& e : sec.entries) {
                if (e.key == "kernel") {
                    if (e.value == "linear")
                        x.kernel.type = KernelSpec::Type::Linear;
                    else if (e.value == "rbf")
                        x.kernel.type = KernelSpec::Type::Rbf;
                    else if (e.value == "poly")
                        x.kernel.type = KernelSpec::Type::Poly;
                    else
                        fail(doc, e.line, "kernel must be linear, rbf or poly");
                } else if (e.key == "gamma")
                    x.kernel.gamma = to_double(doc, e);
                else if (e.key == "degree")
                    x.kernel.degree = static_cast<int>(to_long(doc, e));
                else if (e.key == "coef0")
                    x.kernel.coef0 = to_double(doc, e);
                else if (e.key == "c_grid")
                    x.c_grid = to_double_list(doc, e);
                else if (e.key == "tol")
                    x.svm_tol = to_double(doc, e);
                else if (e.key == "max_iter")
                    x.svm_max_iter = static_cast<int>(to_long(doc, e));
                else
                    fail(doc, e.line, "unknown key '" + e.key + "' in [svm]");
            }
        } else if (sec.name == "experiment") {
            ExperimentConfig& x = cfg.experiment;
            for (const IniEntry& e : sec.entries) {
                if (e.key == "n_seeds")
                    x.n_seeds = static_cast<int>(to_long(doc, e));
                else if (e.key == "base_seed")
                    x.base_seed = static_cast<uint64_t>(to_long(doc, e));
                else if (e.key == "train_ratio")
                    x.train_ratio = to_double(doc, e);
                else if (e.key == "use_smote")
                    x.use_smote = to_bool(doc, e);
                else if (e.key == "smote_k")
                    x.smote_k = static_cast<int>(to_long(doc, e));
                else
                    fail(doc, e.line, "unknown key '" + e.key + "' in [experiment]");
            }
        } else if (sec.name.rfind("color:", 0) == 0) {
            apply_color_section(doc, sec, cfg.pipeline.feat.table);
        } else {
            fail(doc, sec.line, "unknown section [" + sec.name + "]");
        }
    }
    for (double c : cfg.experiment.c_grid)
        if (!(c > 0)) throw ConfigError(doc.origin + ": c_grid values must be positive");
    if (cfg.experiment.n_seeds < 1)
        throw ConfigError(doc.origin + ": n_seeds must be at least 1");
    cfg.pipeline.seg.validate();
    return cfg;
}

inline AppConfig parse_config_text(const std::string& text, const std::string& origin,
                                   const std::vector<std::string>& overrides = {}) {
    cfg_detail::IniDoc doc = cfg_detail::parse_ini(text, origin);
    for (const std::string& s : overrides) cfg_detail::apply_set(doc, s);
    return config_from_ini(doc);
}

inline AppConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path, overrides);
}

inline std::string default_config_text() {
    return R"(# Pipeline defaults. Every key shown here is optional; omitted keys keep
# these values. Override single keys on the command line with
#   --set section.key=value

[preprocess]
kernel_size = 5
sigma = 1.0
# 0 keeps the native resolution; photos can be scaled to a long edge, e.g. 768
resize_long_edge = 0

[segmentation]
lambda1 = 2.0
lambda2 = 1.0
weight_y = 1.0
weight_u = 1.0
weight_v = 1.0
data_passes = 40
smooth_passes = 2
max_iterations = 400
init_fraction = 0.65
smooth_kernel = 5
smooth_sigma = 1.0

[features]
min_region_fraction = 0.01
mm_per_pixel = 0.03

[svm]
kernel = rbf
gamma = 0.09090909090909091
degree = 3
coef0 = 0.0
c_grid = 0.1, 1, 10
tol = 0.001
max_iter = 200000

[experiment]
n_seeds = 20
base_seed = 1
train_ratio = 0.7
use_smote = true
smote_k = 5

# Color classes are HSV boxes checked in fixed precedence:
# black, blue_gray, dark_brown, light_brown, red, white.
# hue is empty (any) or comma-separated lo-hi degree ranges.

[color:black]
hue =
s_min = 0.0
s_max = 1.0
v_min = 0.0
v_max = 0.15
v_max_exclusive = true

[color:blue_gray]
hue = 180-260
s_min = 0.1
s_max = 1.0
v_min = 0.2
v_max = 0.8
v_max_exclusive = false

[color:dark_brown]
hue = 10-30
s_min = 0.3
s_max = 1.0
v_min = 0.15
v_max = 0.5
v_max_exclusive = true

[color:light_brown]
hue = 20-40
s_min = 0.2
s_max = 0.6
v_min = 0.5
v_max = 1.0
v_max_exclusive = false

[color:red]
hue = 0-10, 350-360
s_min = 0.4
s_max = 1.0
v_min = 0.4
v_max = 1.0
v_max_exclusive = false

[color:white]
hue =
s_min = 0.0
s_max = 0.2
v_min = 0.8
v_max = 1.0
v_max_exclusive = false
)";
}

}  // namespace derm
