#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "derm/common.hpp"

namespace derm {

// Per-feature standardization fit on training rows only (population variance,
// so scaled columns have variance exactly 1). A constant column is an error
// by default; allow_constant keeps it as-is (stdev 1) so resampling loops
// survive degenerate splits.
struct Scaler {
    std::vector<double> mean, stdev;

    void fit(const std::vector<std::vector<double>>& rows, bool allow_constant = false) {
        if (rows.empty()) throw Error("scaler: no rows");
        const size_t d = rows[0].size();
        mean.assign(d, 0.0);
        stdev.assign(d, 0.0);
        for (const auto& r : rows) {
            if (r.size() != d) throw Error("scaler: ragged rows");
            for (size_t j = 0; j < d; ++j) mean[j] += r[j];
        }
        for (size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(rows.size());
        for (const auto& r : rows)
            for (size_t j = 0; j < d; ++j) stdev[j] += sq(r[j] - mean[j]);
        for (size_t j = 0; j < d; ++j) {
            stdev[j] = std::sqrt(stdev[j] / static_cast<double>(rows.size()));
            if (!(stdev[j] > 0.0)) {
                if (!allow_constant)
                    throw Error("scaler: feature " + std::to_string(j) +
                                " has zero variance in the training set");
                stdev[j] = 1.0;
            }
        }
    }

    std::vector<double> apply(const std::vector<double>& row) const {
        if (row.size() != mean.size()) throw Error("scaler: dimension mismatch");
        std::vector<double> out(row.size());
        for (size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / stdev[j];
        return out;
    }

    std::vector<std::vector<double>> apply_all(const std::vector<std::vector<double>>& rows) const {
        std::vector<std::vector<double>> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(apply(r));
        return out;
    }
};

}  // namespace derm
