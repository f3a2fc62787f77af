#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bclean/table.hpp"

namespace bclean {

// Feature rows over adjacent tuple pairs, one column per attribute, pooled
// across the per-attribute sorted sweeps: m * (n - 1) rows total.
struct PairFeatureMatrix {
    std::size_t n_cols = 0;
    std::vector<double> data;  // row-major
    std::size_t n_rows() const { return n_cols ? data.size() / n_cols : 0; }
    const double* row(std::size_t i) const { return data.data() + i * n_cols; }
};

// Unit-cost Levenshtein distance over Unicode scalar values.
std::size_t edit_distance(const std::string& a, const std::string& b);

// 1 - 2*ED(a,b)/(len(a)+len(b)), clamped into [0,1]; both empty -> 1.
double string_similarity(const std::string& a, const std::string& b);

// 1 - min(1, |a-b| / ((|a|+|b|)/2)); a = b = 0 -> 1.
double numeric_similarity(double a, double b);

PairFeatureMatrix adjacent_pair_features(const Table& table);

void dump_features_csv(const PairFeatureMatrix& features, const Table& table,
                       const std::string& path);

std::vector<char32_t> decode_utf8(const std::string& s);

}  // namespace bclean
