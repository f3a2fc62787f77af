#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "bclean/structure.hpp"
#include "bclean/table.hpp"

namespace bclean {

// One-hop neighborhood used for partitioned inference.
struct SubNetwork {
    std::string center;
    std::set<std::string> parents;
    std::set<std::string> children;
    std::set<std::string> members;  // parents + center + children
};

using CptConfig = std::vector<std::int32_t>;  // parent value ids, parent-index order
using CptTable = std::map<CptConfig, std::vector<double>>;

// DAG over attributes with per-node domains and sparse CPTs (only observed
// parent configurations are stored; unseen configurations read as uniform).
class BayesNet {
public:
    std::size_t node_count() const { return nodes_.size(); }
    const std::vector<std::string>& nodes() const { return nodes_; }
    const std::string& node_name(std::size_t i) const { return nodes_.at(i); }
    std::size_t node_index(const std::string& name) const;
    bool has_node(const std::string& name) const { return index_.count(name) > 0; }

    const std::vector<std::size_t>& parents(std::size_t i) const { return parents_.at(i); }
    const std::vector<std::size_t>& children(std::size_t i) const { return children_.at(i); }
    bool has_edge(std::size_t parent, std::size_t child) const;
    bool is_isolated(std::size_t i) const {
        return parents_.at(i).empty() && children_.at(i).empty();
    }
    std::size_t edge_count() const;

    const std::vector<std::string>& domain(std::size_t i) const { return domains_.at(i); }
    // -1 when the value was never observed for this node.
    std::int32_t value_id(std::size_t i, const std::string& value) const;

    double alpha() const { return alpha_; }

    // P(value_id | config). Any -1 in value_id/config (out-of-domain) or an
    // unseen configuration falls back to the uniform 1/|dom|; stored
    // probabilities are floored to keep logarithms finite.
    double prob_by_id(std::size_t node, std::int32_t value_id, const CptConfig& config) const;

    // Stored CPT row for the given parent values, or nullptr if unseen.
    const std::vector<double>* cpt_row(const std::string& node,
                                       const std::vector<std::string>& parent_values) const;
    const CptTable& cpt(std::size_t node) const { return cpts_.at(node); }

    friend BayesNet fit_cpts(const Table& table, const SkeletonGraph& skeleton, double alpha);
    friend BayesNet add_edge(const BayesNet& bn, const Table& table,
                             const std::string& parent, const std::string& child);
    friend BayesNet remove_edge(const BayesNet& bn, const Table& table,
                                const std::string& parent, const std::string& child);
    friend std::pair<BayesNet, Table> merge_nodes(const BayesNet& bn,
                                                  const std::set<std::string>& nodes_to_merge,
                                                  const Table& table);
    friend BayesNet bn_from_json(const std::string& text);

private:
    void refit_node(const Table& table, std::size_t node);
    void rebuild_children();

    std::vector<std::string> nodes_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<std::vector<std::string>> domains_;
    std::vector<std::unordered_map<std::string, std::int32_t>> value_ids_;
    std::vector<CptTable> cpts_;
    double alpha_ = 1.0;
};

// ---------------------------------------------------------------- operations

BayesNet fit_cpts(const Table& table, const SkeletonGraph& skeleton, double alpha);

// Full-assignment log probability; `values` is aligned with bn.nodes().
// NULL positions contribute no factor (missing evidence).
double joint_log_prob(const BayesNet& bn, const std::vector<Cell>& values);

// Posterior over dom(target) given the other attributes of the tuple, using
// only the target's Markov-blanket factors (own CPT + child CPTs evaluated at
// observed co-parent values). Isolated targets are uniform.
std::vector<double> markov_conditional(const BayesNet& bn, const std::vector<Cell>& obs,
                                       const std::string& target);

// Unnormalized log scores for the candidate value ids of `target`. With
// use_partition the Markov-blanket factors are used; otherwise every factor
// of the full assignment is evaluated (the basic reference path). Both agree
// after normalization; isolated targets are uniform in both modes.
std::vector<double> conditional_log_scores(const BayesNet& bn, const std::vector<Cell>& obs,
                                           std::size_t target,
                                           const std::vector<std::int32_t>& candidate_ids,
                                           bool use_partition);

std::map<std::string, SubNetwork> partition(const BayesNet& bn);

BayesNet add_edge(const BayesNet& bn, const Table& table, const std::string& parent,
                  const std::string& child);
BayesNet remove_edge(const BayesNet& bn, const Table& table, const std::string& parent,
                     const std::string& child);

// Replaces the merged nodes with one composite node whose values concatenate
// the member values (U+001F separator, escaped). Shared edges collapse onto
// the composite; all other edges incident to merged nodes are dropped.
std::pair<BayesNet, Table> merge_nodes(const BayesNet& bn,
                                       const std::set<std::string>& nodes_to_merge,
                                       const Table& table);

std::string bn_to_json(const BayesNet& bn);
BayesNet bn_from_json(const std::string& text);
std::string bn_to_dot(const BayesNet& bn);

std::string compose_merged_value(const std::vector<std::string>& member_values);
std::vector<std::string> decompose_merged_value(const std::string& composite);

}  // namespace bclean
