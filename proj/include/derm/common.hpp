#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace derm {

// All pipeline failures derive from Error so the CLI maps them to exit code 1.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

// Raised when the evolving curve degenerates (empty interior or exterior) or
// never moves at all; carries the pass index where evolution stopped.
struct SegmentationError : Error {
    int iteration = 0;
    SegmentationError(const std::string& what, int iter)
        : Error(what + " (iteration " + std::to_string(iter) + ")"), iteration(iter) {}
};

struct PointI {
    int x = 0;
    int y = 0;
    bool operator==(const PointI&) const = default;
};

struct PointD {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const PointD&) const = default;
};

inline double sq(double v) { return v * v; }

inline double dist(PointD a, PointD b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace derm
