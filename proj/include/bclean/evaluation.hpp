#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bclean/table.hpp"

namespace bclean {

enum class ErrorType { typo, missing, inconsistency, swap };

std::string error_type_name(ErrorType t);

struct ErrorSpec {
    std::map<ErrorType, double> rates;  // fractions of all cells; sum <= 1
    std::uint64_t seed = 0;
};

struct MaskEntry {
    std::size_t row;
    std::string attribute;
    Cell clean_value;
    Cell dirty_value;
    ErrorType type;
};

struct GroundTruth {
    Table clean_table;
    std::vector<MaskEntry> mask;
};

struct InjectionResult {
    Table dirty;
    GroundTruth truth;
};

// Seeded, reproducible corruption. Typos are single-edit (insert / delete /
// replace one character); missing writes NULL; inconsistency pulls a value
// from another column's domain or a different value of the same column; swap
// exchanges two differing cells within one column. Error types never stack.
InjectionResult inject_errors(const Table& clean, const ErrorSpec& spec);

struct ScoreResult {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t modified = 0;
    std::size_t correct = 0;
    std::size_t errors = 0;
    std::map<std::string, double> per_type_recall;
};

ScoreResult score(const Table& dirty, const Table& cleaned, const GroundTruth& truth);

// FD-governed synthetic tables standing in for the benchmark datasets:
// determinant attributes draw from seeded value pools, dependents are
// functions of them.
struct FdGroupSpec {
    std::string determinant;
    std::vector<std::string> dependents;
    std::size_t pool = 20;          // distinct determinant values
    bool digit_values = false;      // 5-digit pool values (pattern-friendly)
    bool zipf = false;              // skewed group sizes
};

struct SyntheticSpec {
    std::size_t rows = 1000;
    std::vector<FdGroupSpec> groups;
    std::uint64_t seed = 0;
};

Table generate_synthetic(const SyntheticSpec& spec);

std::string mask_to_json(const GroundTruth& truth);
std::vector<MaskEntry> mask_from_json(const std::string& text);
std::string score_to_json(const ScoreResult& result);
std::string score_to_text(const ScoreResult& result);

}  // namespace bclean
