#pragma once

// Test-only oracles, independent of the implementation paths they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "bclean/bayes_net.hpp"
#include "bclean/compensatory.hpp"
#include "bclean/constraints.hpp"
#include "bclean/structure.hpp"
#include "bclean/table.hpp"

namespace oracles {

// Plain recursive-definition Levenshtein via full DP matrix over bytes
// (tests use ASCII only, where bytes == scalars).
inline std::size_t edit_distance_dp(const std::string& a, const std::string& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1,
                                            std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                                d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
        }
    }
    return d[a.size()][b.size()];
}

// Matrix-vector product helper for reconstruction checks.
inline bclean::Matrix mat_mul(const bclean::Matrix& a, const bclean::Matrix& b) {
    bclean::Matrix c(a.dim);
    for (std::size_t i = 0; i < a.dim; ++i) {
        for (std::size_t k = 0; k < a.dim; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < a.dim; ++j) c.at(i, j) += aik * b.at(k, j);
        }
    }
    return c;
}

inline double reconstruction_error(const bclean::Matrix& b, const std::vector<double>& omega,
                                   const bclean::Matrix& theta) {
    const std::size_t m = theta.dim;
    bclean::Matrix i_minus_b = bclean::Matrix::identity(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) i_minus_b.at(i, j) -= b.at(i, j);
    }
    bclean::Matrix mid(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) mid.at(i, j) = i_minus_b.at(i, j) * omega[j];
    }
    bclean::Matrix t(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) t.at(j, i) = i_minus_b.at(i, j);
    }
    const bclean::Matrix rec = mat_mul(mid, t);  // (I-B) diag(omega) (I-B)^T
    double err = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            err = std::max(err, std::fabs(rec.at(i, j) - theta.at(i, j)));
        }
    }
    return err;
}

// Random symmetric positive-definite matrix: A^T A / m + I.
inline bclean::Matrix random_spd(std::size_t m, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    bclean::Matrix a(m);
    for (auto& v : a.a) v = normal(rng);
    bclean::Matrix spd(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k) s += a.at(k, i) * a.at(k, j);
            spd.at(i, j) = s / static_cast<double>(m);
        }
        spd.at(i, i) += 1.0;
    }
    return spd;
}

// Random DAG + CPTs + full observation generator for enumeration tests.
struct RandomBn {
    bclean::BayesNet bn;
    bclean::Table table;
};

inline RandomBn random_bayes_net(std::size_t n_nodes, std::size_t max_dom, double edge_prob,
                                 std::mt19937_64& rng) {
    using namespace bclean;
    std::uniform_int_distribution<std::size_t> dom_dist(2, max_dom);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Sampled rows give every node a domain; edges follow index order so the
    // graph is acyclic by construction.
    std::vector<AttributeSpec> attrs;
    std::vector<std::size_t> dom_sizes;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        attrs.push_back({"n" + std::to_string(i), Kind::text, ""});
        dom_sizes.push_back(dom_dist(rng));
    }
    const std::size_t rows = 60;
    std::vector<Row> data(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < n_nodes; ++i) {
            std::uniform_int_distribution<std::size_t> pick(0, dom_sizes[i] - 1);
            data[r].emplace_back("v" + std::to_string(pick(rng)));
        }
    }
    Table table("random", attrs, std::move(data));

    SkeletonGraph skeleton;
    for (const auto& a : attrs) skeleton.nodes.push_back(a.name);
    for (std::size_t child = 1; child < n_nodes; ++child) {
        for (std::size_t parent = 0; parent < child; ++parent) {
            if (unit(rng) < edge_prob) {
                skeleton.edges.push_back({skeleton.nodes[parent], skeleton.nodes[child], 1.0});
            }
        }
    }
    BayesNet bn = fit_cpts(table, skeleton, 0.5 + unit(rng));
    return {std::move(bn), std::move(table)};
}

// Full-joint enumeration of the conditional for `target`, using the network's
// inference factors: CPTs for connected nodes, a uniform prior for isolated
// nodes. For non-isolated targets this equals the textbook full conditional
// (isolated factors are constant in the candidate and cancel).
inline std::vector<double> enumerate_conditional(const bclean::BayesNet& bn,
                                                 const std::vector<bclean::Cell>& obs,
                                                 std::size_t target) {
    const std::size_t dom = bn.domain(target).size();
    std::vector<double> probs(dom, 0.0);
    for (std::size_t v = 0; v < dom; ++v) {
        std::vector<bclean::Cell> assignment = obs;
        assignment[target] = bn.domain(target)[v];
        // Product over node factors; isolated nodes contribute uniformly.
        double logp = 0.0;
        for (std::size_t i = 0; i < bn.node_count(); ++i) {
            if (!assignment[i]) continue;
            if (bn.is_isolated(i)) {
                logp += std::log(1.0 / static_cast<double>(bn.domain(i).size()));
                continue;
            }
            bclean::CptConfig config;
            bool skip = false;
            for (std::size_t p : bn.parents(i)) {
                if (!assignment[p]) {
                    skip = true;
                    break;
                }
                config.push_back(bn.value_id(p, *assignment[p]));
            }
            if (skip) continue;
            logp += std::log(bn.prob_by_id(i, bn.value_id(i, *assignment[i]), config));
        }
        probs[v] = std::exp(logp);
    }
    double total = 0.0;
    for (double p : probs) total += p;
    for (double& p : probs) p /= total;
    return probs;
}

// Brute-force rebuild of the corr statistics: double loop over tuples and
// ordered attribute pairs, straight from the definitions.
inline std::map<std::tuple<std::string, std::string, std::size_t, std::size_t>, double>
brute_force_corr(const bclean::Table& table, const bclean::UcSet& ucs,
                 const bclean::ConfidenceParams& params) {
    std::vector<std::string> names;
    for (const auto& a : table.attributes()) names.push_back(a.name);
    std::map<std::tuple<std::string, std::string, std::size_t, std::size_t>, double> out;
    for (const auto& row : table.rows()) {
        const double conf = bclean::tuple_confidence(row, names, ucs, params);
        const double delta = conf >= params.tau ? 1.0 : -params.beta;
        for (std::size_t j = 0; j < names.size(); ++j) {
            if (!row[j]) continue;
            for (std::size_t k = 0; k < names.size(); ++k) {
                if (k == j || !row[k]) continue;
                out[{*row[j], *row[k], j, k}] += delta;
            }
        }
    }
    return out;
}

}  // namespace oracles
