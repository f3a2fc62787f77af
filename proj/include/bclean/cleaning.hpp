#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bclean/bayes_net.hpp"
#include "bclean/compensatory.hpp"
#include "bclean/constraints.hpp"
#include "bclean/table.hpp"

namespace bclean {

enum class DomainPruneContext { tuples, subnetworks };

struct CleanParams {
    double tau_clean = 0.6;
    std::size_t top_k = 64;
    bool use_partition = true;
    bool use_tuple_prune = false;
    bool use_domain_prune = false;
    DomainPruneContext prune_context = DomainPruneContext::tuples;
    std::size_t threads = 0;  // 0 = hardware concurrency
};

struct Repair {
    std::size_t row;
    std::string attribute;
    std::optional<std::string> old_value;
    std::string new_value;
    double bn_logp;    // log BN conditional of the chosen candidate (within the set)
    double cs_weight;  // compensatory weight of the chosen candidate
};

struct RepairReport {
    std::vector<Repair> repairs;
    std::size_t skipped_cells = 0;      // pruned as reliable or no passing candidate
    std::size_t no_candidate_cells = 0; // subset of skipped: every candidate failed UC
    std::size_t candidate_evals = 0;
};

// Unsigned co-occurrence statistics backing the tuple-pruning filter.
class CooccurrenceIndex {
public:
    explicit CooccurrenceIndex(const Table& table);
    // Filter(T, A_i) = mean over other attributes of
    // count(T[A_i], T[A_j]) / count(T[A_j]); in [0, 1].
    double filter(const Row& row, std::size_t attr_i) const;

private:
    std::size_t m_ = 0;
    std::vector<std::unordered_map<std::string, std::int32_t>> dicts_;
    std::vector<std::vector<double>> value_counts_;
    std::vector<std::unordered_map<std::uint64_t, double>> pairs_;
};

double filter_tuple(const CooccurrenceIndex& index, const Row& row, std::size_t attr_i);

// TF-IDF retention of repair candidates for one attribute:
// score(v) = context(v) * ln(|D| / (1 + count(v, D))), top_k kept.
std::vector<std::string> prune_domain(const std::map<std::string, SubNetwork>& sub_networks,
                                      const Table& table, const BayesNet& bn,
                                      const std::string& attr, std::size_t top_k,
                                      DomainPruneContext context);

// log(BN conditional) + log(compensatory weight), both over the same
// candidate set; `candidates` must contain c.
double candidate_log_score(const BayesNet& bn, const CorrTable& corr, const std::string& c,
                           const Row& tuple_obs, const std::string& attr,
                           const std::vector<std::string>& candidates, bool use_partition);

std::pair<Table, RepairReport> clean(const Table& table, const BayesNet& bn,
                                     const CorrTable& corr, const UcSet& ucs,
                                     const CleanParams& params);

std::string report_to_json(const RepairReport& report);

}  // namespace bclean
