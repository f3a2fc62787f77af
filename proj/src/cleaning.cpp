#include "bclean/cleaning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"

namespace bclean {

CooccurrenceIndex::CooccurrenceIndex(const Table& table) : m_(table.n_cols()) {
    dicts_.resize(m_);
    value_counts_.resize(m_);
    pairs_.resize(m_ * m_);
    std::vector<std::int32_t> ids(m_);
    for (const Row& row : table.rows()) {
        for (std::size_t j = 0; j < m_; ++j) {
            if (!row[j]) {
                ids[j] = -1;
                continue;
            }
            auto [it, inserted] =
                dicts_[j].try_emplace(*row[j], static_cast<std::int32_t>(value_counts_[j].size()));
            if (inserted) value_counts_[j].push_back(0.0);
            ids[j] = it->second;
            value_counts_[j][static_cast<std::size_t>(it->second)] += 1.0;
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (ids[i] < 0) continue;
            for (std::size_t j = i + 1; j < m_; ++j) {
                if (ids[j] < 0) continue;
                const std::uint64_t key =
                    (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ids[i])) << 32) |
                    static_cast<std::uint32_t>(ids[j]);
                pairs_[i * m_ + j][key] += 1.0;
            }
        }
    }
}

double CooccurrenceIndex::filter(const Row& row, std::size_t attr_i) const {
    if (m_ < 2) throw ConfigError("filter needs at least 2 attributes");
    if (!row[attr_i]) return 0.0;  // missing values always get inferred
    auto it_i = dicts_[attr_i].find(*row[attr_i]);
    if (it_i == dicts_[attr_i].end()) return 0.0;
    const std::int32_t vi = it_i->second;

    double total = 0.0;
    for (std::size_t j = 0; j < m_; ++j) {
        if (j == attr_i || !row[j]) continue;
        auto it_j = dicts_[j].find(*row[j]);
        if (it_j == dicts_[j].end()) continue;
        const std::int32_t vj = it_j->second;
        const std::size_t lo = std::min(attr_i, j), hi = std::max(attr_i, j);
        const std::uint64_t key =
            attr_i < j ? (static_cast<std::uint64_t>(static_cast<std::uint32_t>(vi)) << 32) |
                             static_cast<std::uint32_t>(vj)
                       : (static_cast<std::uint64_t>(static_cast<std::uint32_t>(vj)) << 32) |
                             static_cast<std::uint32_t>(vi);
        const auto& map = pairs_[lo * m_ + hi];
        auto it = map.find(key);
        if (it == map.end()) continue;
        total += it->second / value_counts_[j][static_cast<std::size_t>(vj)];
    }
    return total / static_cast<double>(m_ - 1);
}

double filter_tuple(const CooccurrenceIndex& index, const Row& row, std::size_t attr_i) {
    return index.filter(row, attr_i);
}

std::vector<std::string> prune_domain(const std::map<std::string, SubNetwork>& sub_networks,
                                      const Table& table, const BayesNet& bn,
                                      const std::string& attr, std::size_t top_k,
                                      DomainPruneContext context) {
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    const std::size_t t = bn.node_index(attr);
    const std::vector<std::string>& values = bn.domain(t);
    const double n = static_cast<double>(table.n_rows());

    // Global cell frequency of every candidate (IDF denominator).
    std::unordered_map<std::string, double> cell_counts;
    for (const Row& row : table.rows()) {
        for (const Cell& c : row) {
            if (c) cell_counts[*c] += 1.0;
        }
    }

    std::unordered_map<std::string, double> ctx;
    if (context == DomainPruneContext::subnetworks) {
        // context(v) = number of sub-networks whose member-attribute active
        // domains contain v.
        for (const auto& [center, sub] : sub_networks) {
            std::set<std::string> seen;
            for (const auto& member : sub.members) {
                const std::size_t col = table.column_index(member);
                for (const Row& row : table.rows()) {
                    if (row[col]) seen.insert(*row[col]);
                }
            }
            for (const auto& v : values) {
                if (seen.count(v)) ctx[v] += 1.0;
            }
        }
    } else {
        // context(v) = number of tuples whose cells inside this attribute's
        // sub-network contain v.
        const SubNetwork& sub = sub_networks.at(attr);
        std::vector<std::size_t> member_cols;
        for (const auto& member : sub.members) member_cols.push_back(table.column_index(member));
        std::unordered_map<std::string, std::int32_t> value_index;
        for (std::size_t v = 0; v < values.size(); ++v) {
            value_index.emplace(values[v], static_cast<std::int32_t>(v));
        }
        std::set<std::int32_t> in_row;
        for (const Row& row : table.rows()) {
            in_row.clear();
            for (std::size_t col : member_cols) {
                if (!row[col]) continue;
                auto it = value_index.find(*row[col]);
                if (it != value_index.end()) in_row.insert(it->second);
            }
            for (std::int32_t v : in_row) ctx[values[static_cast<std::size_t>(v)]] += 1.0;
        }
    }

    std::vector<std::pair<double, std::string>> scored;
    scored.reserve(values.size());
    for (const auto& v : values) {
        auto c = ctx.find(v);
        const double tf = c == ctx.end() ? 0.0 : c->second;
        auto f = cell_counts.find(v);
        const double count = f == cell_counts.end() ? 0.0 : f->second;
        scored.emplace_back(tf * std::log(n / (1.0 + count)), v);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (scored.size() > top_k) scored.resize(top_k);

    std::vector<std::string> out;
    out.reserve(scored.size());
    for (auto& [s, v] : scored) out.push_back(std::move(v));
    std::sort(out.begin(), out.end());  // deterministic candidate order downstream
    return out;
}

namespace {

double log_sum_exp(const std::vector<double>& xs) {
    const double mx = *std::max_element(xs.begin(), xs.end());
    double total = 0.0;
    for (double x : xs) total += std::exp(x - mx);
    return mx + std::log(total);
}

struct NodeCandidates {
    // Candidate values in lexicographic order with their BN domain ids and
    // corr dictionary ids.
    std::vector<std::string> values;
    std::vector<std::int32_t> bn_ids;
    std::vector<std::int32_t> corr_ids;
};

}  // namespace

double candidate_log_score(const BayesNet& bn, const CorrTable& corr, const std::string& c,
                           const Row& tuple_obs, const std::string& attr,
                           const std::vector<std::string>& candidates, bool use_partition) {
    const std::size_t t = bn.node_index(attr);

    // BN side: conditional over the full domain, read at c.
    std::vector<Cell> obs(bn.node_count());
    std::vector<std::size_t> corr_col(bn.node_count());
    std::size_t attr_col = 0;
    const auto& names = corr.attribute_names();
    for (std::size_t i = 0; i < bn.node_count(); ++i) {
        auto it = std::find(names.begin(), names.end(), bn.node_name(i));
        if (it == names.end()) throw ConfigError("corr table lacks attribute " + bn.node_name(i));
        corr_col[i] = static_cast<std::size_t>(it - names.begin());
        obs[i] = tuple_obs.at(corr_col[i]);
        if (i == t) attr_col = corr_col[i];
    }

    std::vector<std::int32_t> all_ids(bn.domain(t).size());
    for (std::size_t v = 0; v < all_ids.size(); ++v) all_ids[v] = static_cast<std::int32_t>(v);
    std::vector<double> bn_scores = conditional_log_scores(bn, obs, t, all_ids, use_partition);
    const double lse = log_sum_exp(bn_scores);
    const std::int32_t c_id = bn.value_id(t, c);
    if (c_id < 0) throw ConfigError("candidate outside the domain of " + attr);
    const double bn_logp = bn_scores[static_cast<std::size_t>(c_id)] - lse;

    // CS side: weights normalized over the supplied candidate set.
    std::vector<double> cs(candidates.size());
    std::size_t c_pos = candidates.size();
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        cs[k] = score_corr(corr, candidates[k], tuple_obs, attr_col);
        if (candidates[k] == c) c_pos = k;
    }
    if (c_pos == candidates.size()) throw ConfigError("candidate set does not contain c");
    const std::vector<double> weights = corr_to_weight(cs);
    return bn_logp + std::log(weights[c_pos]);
}

std::pair<Table, RepairReport> clean(const Table& table, const BayesNet& bn,
                                     const CorrTable& corr, const UcSet& ucs,
                                     const CleanParams& params) {
    if (params.top_k < 1) throw ConfigError("top_k must be >= 1");
    const std::size_t n = table.n_rows();
    const std::size_t n_nodes = bn.node_count();

    std::vector<std::size_t> node_col(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) node_col[i] = table.column_index(bn.node_name(i));
    if (corr.n_attrs() != table.n_cols()) {
        throw ShapeMismatch("corr table was built for a different table shape");
    }

    // Per-node candidate lists: UC-passing members of the (optionally pruned)
    // domain, in lexicographic order.
    std::vector<NodeCandidates> node_cands(n_nodes);
    std::map<std::string, SubNetwork> subs = partition(bn);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const std::string& attr = bn.node_name(i);
        std::vector<std::string> base =
            params.use_domain_prune
                ? prune_domain(subs, table, bn, attr, params.top_k, params.prune_context)
                : bn.domain(i);
        NodeCandidates& nc = node_cands[i];
        for (auto& v : base) {
            Cell cell(v);
            if (!uc_check(ucs, attr, cell)) continue;
            nc.values.push_back(v);
            nc.bn_ids.push_back(bn.value_id(i, v));
            nc.corr_ids.push_back(corr.value_id(node_col[i], v));
        }
    }

    std::unique_ptr<CooccurrenceIndex> coocc;
    if (params.use_tuple_prune && table.n_cols() >= 2) {
        coocc = std::make_unique<CooccurrenceIndex>(table);
    }

    std::vector<std::vector<Repair>> row_repairs(n);
    std::vector<std::size_t> row_skipped(n, 0), row_nocand(n, 0), row_evals(n, 0);

    std::atomic<std::size_t> next_row{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        std::vector<Cell> obs(n_nodes);
        std::vector<std::int32_t> evidence(table.n_cols());
        std::vector<std::string> cand_values;
        std::vector<std::int32_t> cand_bn, cand_corr;
        std::vector<double> cs_scores;

        for (;;) {
            const std::size_t i = next_row.fetch_add(1);
            if (i >= n) return;
            try {
                const Row& row = table.row(i);
                for (std::size_t k = 0; k < n_nodes; ++k) obs[k] = row[node_col[k]];
                for (std::size_t k = 0; k < table.n_cols(); ++k) {
                    evidence[k] = row[k] ? corr.value_id(k, *row[k]) : -1;
                }

                for (std::size_t t = 0; t < n_nodes; ++t) {
                    const std::size_t col = node_col[t];
                    const Cell& original = row[col];
                    const std::string& attr = bn.node_name(t);

                    if (params.use_tuple_prune && coocc && original &&
                        coocc->filter(row, col) >= params.tau_clean) {
                        ++row_skipped[i];
                        continue;
                    }

                    // Candidates: original first when it passes its UC, then
                    // the precomputed list (lexicographic).
                    const NodeCandidates& nc = node_cands[t];
                    cand_values.clear();
                    cand_bn.clear();
                    cand_corr.clear();
                    const bool original_ok = original && uc_check(ucs, attr, original);
                    if (original_ok) {
                        cand_values.push_back(*original);
                        cand_bn.push_back(bn.value_id(t, *original));
                        cand_corr.push_back(corr.value_id(col, *original));
                    }
                    for (std::size_t k = 0; k < nc.values.size(); ++k) {
                        if (original_ok && nc.values[k] == *original) continue;
                        cand_values.push_back(nc.values[k]);
                        cand_bn.push_back(nc.bn_ids[k]);
                        cand_corr.push_back(nc.corr_ids[k]);
                    }
                    if (cand_values.empty()) {
                        ++row_skipped[i];
                        ++row_nocand[i];
                        continue;
                    }
                    row_evals[i] += cand_values.size();

                    std::vector<double> bn_scores =
                        conditional_log_scores(bn, obs, t, cand_bn, params.use_partition);
                    const double lse = log_sum_exp(bn_scores);

                    cs_scores.resize(cand_values.size());
                    for (std::size_t k = 0; k < cand_values.size(); ++k) {
                        cs_scores[k] = score_corr_ids(corr, col, cand_corr[k], evidence);
                    }
                    const std::vector<double> weights = corr_to_weight(cs_scores);

                    std::size_t best = 0;
                    double best_score = bn_scores[0] - lse + std::log(weights[0]);
                    for (std::size_t k = 1; k < cand_values.size(); ++k) {
                        const double s = bn_scores[k] - lse + std::log(weights[k]);
                        if (s > best_score) {
                            best_score = s;
                            best = k;
                        }
                    }

                    const std::string& chosen = cand_values[best];
                    if (!original || chosen != *original) {
                        row_repairs[i].push_back({i, attr, original, chosen,
                                                  bn_scores[best] - lse, weights[best]});
                    }
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::size_t n_threads = params.threads ? params.threads : std::thread::hardware_concurrency();
    n_threads = std::max<std::size_t>(1, std::min(n_threads, n));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    RepairReport report;
    std::vector<Row> cleaned_rows = table.rows();
    for (std::size_t i = 0; i < n; ++i) {
        report.skipped_cells += row_skipped[i];
        report.no_candidate_cells += row_nocand[i];
        report.candidate_evals += row_evals[i];
        for (Repair& r : row_repairs[i]) {
            cleaned_rows[i][table.column_index(r.attribute)] = r.new_value;
            report.repairs.push_back(std::move(r));
        }
    }
    Table cleaned(table.name(), table.attributes(), std::move(cleaned_rows));
    return {std::move(cleaned), std::move(report)};
}

std::string report_to_json(const RepairReport& report) {
    nlohmann::ordered_json j;
    j["repairs"] = nlohmann::ordered_json::array();
    for (const auto& r : report.repairs) {
        nlohmann::ordered_json item;
        item["row"] = r.row;
        item["attribute"] = r.attribute;
        if (r.old_value) item["old"] = *r.old_value;
        else item["old"] = nullptr;
        item["new"] = r.new_value;
        item["bn_logp"] = r.bn_logp;
        item["cs_weight"] = r.cs_weight;
        j["repairs"].push_back(std::move(item));
    }
    j["skipped_cells"] = report.skipped_cells;
    j["no_candidate_cells"] = report.no_candidate_cells;
    j["candidate_evals"] = report.candidate_evals;
    return j.dump(2) + "\n";
}

}  // namespace bclean
