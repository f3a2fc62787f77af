#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "bclean/constraints.hpp"
#include "bclean/table.hpp"

namespace bclean {

// Signed co-occurrence statistics over ordered attribute pairs: a tuple with
// conf >= tau contributes +1 to each of its value pairs, otherwise -beta.
// Raw counts are stored; normalization by |D| happens at query time (both
// readings agree on argmax).
class CorrTable {
public:
    CorrTable() = default;
    CorrTable(std::vector<std::string> attribute_names, std::size_t n_rows);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_attrs() const { return attrs_.size(); }
    const std::vector<std::string>& attribute_names() const { return attrs_; }

    std::int32_t value_id(std::size_t attr, const std::string& value) const;
    std::int32_t intern(std::size_t attr, const std::string& value);
    const std::string& value_name(std::size_t attr, std::int32_t id) const {
        return values_.at(attr).at(static_cast<std::size_t>(id));
    }

    // Raw signed count for (c@attr_j, e@attr_k); 0 when absent.
    double raw_count(std::size_t attr_j, std::int32_t c, std::size_t attr_k,
                     std::int32_t e) const;
    void add(std::size_t attr_j, std::int32_t c, std::size_t attr_k, std::int32_t e,
             double delta);

    std::size_t entry_count() const;
    // Retain only the `keep_per_pair` largest-magnitude entries of every
    // ordered pair map (the documented degradation when the entry cap hits).
    void shrink_to_top(std::size_t keep_per_pair);

    std::uint64_t pair_key(std::int32_t c, std::int32_t e) const {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c)) << 32) |
               static_cast<std::uint32_t>(e);
    }
    const std::unordered_map<std::uint64_t, double>& pair_map(std::size_t j,
                                                              std::size_t k) const {
        return pairs_.at(j * attrs_.size() + k);
    }

    friend CorrTable load_corr_binary(const std::string& path);
    friend void save_corr_binary(const CorrTable& corr, const std::string& path);

private:
    std::vector<std::string> attrs_;
    std::size_t n_rows_ = 0;
    std::vector<std::vector<std::string>> values_;
    std::vector<std::unordered_map<std::string, std::int32_t>> dicts_;
    std::vector<std::unordered_map<std::uint64_t, double>> pairs_;
};

struct CorrBuildOptions {
    std::size_t max_entries = 50'000'000;
};

CorrTable build_corr(const Table& table, const UcSet& ucs, const ConfidenceParams& params,
                     const CorrBuildOptions& options = {});

// Score_corr(c, t, A_j) = sum over other attributes of corr(c, t[A_k]) / |D|.
double score_corr(const CorrTable& corr, const std::string& c, const Row& tuple_obs,
                  std::size_t attr_j);
double score_corr_ids(const CorrTable& corr, std::size_t attr_j, std::int32_t c_id,
                      const std::vector<std::int32_t>& evidence_ids);

// Order-preserving strictly-positive normalization:
// w(c) = (score(c) - min + eps) / sum(...), eps = 1e-9.
std::vector<double> corr_to_weight(const std::vector<double>& scores);

// Binary cache. The key is a content hash of (table cells, UC config text,
// confidence params); load returns an empty optional-like state by throwing
// IoError when the file is absent.
std::string corr_cache_key(const Table& table, const std::string& ucs_text,
                           const ConfidenceParams& params);
void save_corr_binary(const CorrTable& corr, const std::string& path);
CorrTable load_corr_binary(const std::string& path);

}  // namespace bclean
