#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "derm/common.hpp"
#include "derm/image.hpp"

namespace derm {

// Report order is fixed (feature vector slots d_1..d_6 use this order).
enum class ColorClass : int {
    White = 0,
    Red = 1,
    LightBrown = 2,
    DarkBrown = 3,
    BlueGray = 4,
    Black = 5,
};

constexpr int kColorClassCount = 6;

inline const char* color_class_name(ColorClass c) {
    static constexpr const char* names[kColorClassCount] = {
        "white", "red", "light_brown", "dark_brown", "blue_gray", "black"};
    return names[static_cast<int>(c)];
}

inline std::optional<ColorClass> color_class_from_name(const std::string& s) {
    for (int i = 0; i < kColorClassCount; ++i)
        if (s == color_class_name(static_cast<ColorClass>(i)))
            return static_cast<ColorClass>(i);
    return std::nullopt;
}

// One HSV box. Hue may wrap (two disjoint ranges); v_max may be exclusive so
// adjacent classes can tile the value axis without overlap at the boundary.
struct ColorRule {
    ColorClass cls = ColorClass::White;
    std::vector<std::pair<double, double>> hue;  // inclusive [lo, hi]; empty = any
    double s_min = 0.0, s_max = 1.0;
    double v_min = 0.0, v_max = 1.0;
    bool v_max_exclusive = false;

    bool matches(const Hsv& c) const {
        if (!hue.empty()) {
            bool ok = false;
            for (const auto& [lo, hi] : hue)
                if (c.h >= lo && c.h <= hi) {
                    ok = true;
                    break;
                }
            if (!ok) return false;
        }
        if (c.s < s_min || c.s > s_max) return false;
        if (c.v < v_min) return false;
        if (v_max_exclusive ? c.v >= v_max : c.v > v_max) return false;
        return true;
    }
};

// Rules are tried in precedence order: black > blue_gray > dark_brown >
// light_brown > red > white. A pixel matching nothing is uncounted.
struct ColorTable {
    std::vector<ColorRule> rules;

    std::optional<ColorClass> classify(const Hsv& c) const {
        for (const ColorRule& r : rules)
            if (r.matches(c)) return r.cls;
        return std::nullopt;
    }
};

inline ColorTable default_color_table() {
    ColorTable t;
    t.rules = {
        {ColorClass::Black, {}, 0.0, 1.0, 0.0, 0.15, true},
        {ColorClass::BlueGray, {{180.0, 260.0}}, 0.1, 1.0, 0.2, 0.8, false},
        {ColorClass::DarkBrown, {{10.0, 30.0}}, 0.3, 1.0, 0.15, 0.5, true},
        {ColorClass::LightBrown, {{20.0, 40.0}}, 0.2, 0.6, 0.5, 1.0, false},
        {ColorClass::Red, {{0.0, 10.0}, {350.0, 360.0}}, 0.4, 1.0, 0.4, 1.0, false},
        {ColorClass::White, {}, 0.0, 0.2, 0.8, 1.0, false},
    };
    return t;
}

}  // namespace derm
