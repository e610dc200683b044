#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "derm/color_table.hpp"
#include "derm/common.hpp"

namespace derm {

enum class Label : int { Benign = -1, Melanoma = 1 };

inline const char* label_name(Label l) { return l == Label::Melanoma ? "melanoma" : "benign"; }

struct ManifestEntry {
    std::string image_path;
    Label label = Label::Benign;
    std::string mask_path;                // optional ground-truth mask
    std::vector<ColorClass> gt_colors;    // optional per-image color annotations
    std::string subtype;                  // optional provenance label
};

namespace ds_detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        const size_t a = s.find_first_not_of(" \t");
        const size_t b = s.find_last_not_of(" \t");
        s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
    }
    return out;
}

}  // namespace ds_detail

// CSV with header image,label[,mask[,colors[,subtype]]]. Relative paths
// resolve against the manifest's directory; files must exist at load time.
inline std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest '" + path + "'");
    const std::filesystem::path base = std::filesystem::path(path).parent_path();

    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        if (fp.is_relative()) fp = base / fp;
        return fp.lexically_normal().string();
    };

    std::string line;
    if (!std::getline(in, line)) throw Error("manifest '" + path + "' is empty");
    const auto header = ds_detail::split_csv_line(line);
    if (header.size() < 2 || header[0] != "image" || header[1] != "label")
        throw Error("manifest '" + path + "': header must start with 'image,label'");

    std::vector<ManifestEntry> entries;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line[0] == '#') continue;
        const auto f = ds_detail::split_csv_line(line);
        auto bad = [&](const std::string& why) {
            return Error("manifest '" + path + "' row " + std::to_string(row) + ": " + why);
        };
        if (f.size() < 2 || f[0].empty()) throw bad("need at least image,label");
        ManifestEntry e;
        e.image_path = resolve(f[0]);
        if (f[1] == "melanoma")
            e.label = Label::Melanoma;
        else if (f[1] == "benign")
            e.label = Label::Benign;
        else
            throw bad("label must be 'melanoma' or 'benign', got '" + f[1] + "'");
        if (f.size() > 2 && !f[2].empty()) e.mask_path = resolve(f[2]);
        if (f.size() > 3 && !f[3].empty()) {
            std::stringstream ss(f[3]);
            std::string tok;
            while (std::getline(ss, tok, ';')) {
                const auto c = color_class_from_name(tok);
                if (!c) throw bad("unknown color class '" + tok + "'");
                e.gt_colors.push_back(*c);
            }
        }
        if (f.size() > 4) e.subtype = f[4];
        if (!std::filesystem::exists(e.image_path))
            throw bad("image file not found: " + e.image_path);
        if (!e.mask_path.empty() && !std::filesystem::exists(e.mask_path))
            throw bad("mask file not found: " + e.mask_path);
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw Error("manifest '" + path + "' has no data rows");
    return entries;
}

inline void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest '" + path + "'");
    out << "image,label,mask,colors,subtype\n";
    for (const auto& e : entries) {
        out << e.image_path << ',' << label_name(e.label) << ',' << e.mask_path << ',';
        for (size_t i = 0; i < e.gt_colors.size(); ++i)
            out << (i ? ";" : "") << color_class_name(e.gt_colors[i]);
        out << ',' << e.subtype << '\n';
    }
}

struct Split {
    std::vector<size_t> train, test;
};

// Stratified split: each class is shuffled under the seed and cut at
// floor(ratio*n), clamped so both sides keep at least one member.
inline Split stratified_split(const std::vector<Label>& labels, double ratio, uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw Error("split: ratio must be in (0,1)");
    Split s;
    std::mt19937_64 rng(seed);
    for (Label cls : {Label::Benign, Label::Melanoma}) {
        std::vector<size_t> idx;
        for (size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) idx.push_back(i);
        if (idx.size() < 2)
            throw Error(std::string("split: class '") + label_name(cls) +
                        "' needs at least 2 members");
        std::shuffle(idx.begin(), idx.end(), rng);
        size_t n_train = static_cast<size_t>(ratio * static_cast<double>(idx.size()));
        n_train = std::clamp<size_t>(n_train, 1, idx.size() - 1);
        s.train.insert(s.train.end(), idx.begin(), idx.begin() + n_train);
        s.test.insert(s.test.end(), idx.begin() + n_train, idx.end());
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

}  // namespace derm
