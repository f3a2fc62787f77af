#include "bclean/bayes_net.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "json.hpp"

namespace bclean {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr char kSeparator = '\x1f';
constexpr char kEscape = '\x1b';

bool reachable(const std::vector<std::vector<std::size_t>>& children, std::size_t from,
               std::size_t to) {
    std::vector<std::size_t> stack{from};
    std::vector<bool> seen(children.size(), false);
    while (!stack.empty()) {
        std::size_t v = stack.back();
        stack.pop_back();
        if (v == to) return true;
        if (seen[v]) continue;
        seen[v] = true;
        for (std::size_t c : children[v]) stack.push_back(c);
    }
    return false;
}

}  // namespace

std::string compose_merged_value(const std::vector<std::string>& member_values) {
    std::string out;
    for (std::size_t k = 0; k < member_values.size(); ++k) {
        if (k) out.push_back(kSeparator);
        for (char c : member_values[k]) {
            if (c == kEscape) {
                out.push_back(kEscape);
                out.push_back(kEscape);
            } else if (c == kSeparator) {
                out.push_back(kEscape);
                out.push_back('s');
            } else {
                out.push_back(c);
            }
        }
    }
    return out;
}

std::vector<std::string> decompose_merged_value(const std::string& composite) {
    std::vector<std::string> out(1);
    for (std::size_t i = 0; i < composite.size(); ++i) {
        const char c = composite[i];
        if (c == kEscape && i + 1 < composite.size()) {
            out.back().push_back(composite[i + 1] == 's' ? kSeparator : composite[i + 1]);
            ++i;
        } else if (c == kSeparator) {
            out.emplace_back();
        } else {
            out.back().push_back(c);
        }
    }
    return out;
}

std::size_t BayesNet::node_index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown node: " + name);
    return it->second;
}

bool BayesNet::has_edge(std::size_t parent, std::size_t child) const {
    const auto& p = parents_.at(child);
    return std::find(p.begin(), p.end(), parent) != p.end();
}

std::size_t BayesNet::edge_count() const {
    std::size_t n = 0;
    for (const auto& p : parents_) n += p.size();
    return n;
}

std::int32_t BayesNet::value_id(std::size_t i, const std::string& value) const {
    const auto& ids = value_ids_.at(i);
    auto it = ids.find(value);
    return it == ids.end() ? -1 : it->second;
}

double BayesNet::prob_by_id(std::size_t node, std::int32_t value_id,
                            const CptConfig& config) const {
    const double uniform = 1.0 / static_cast<double>(domains_[node].size());
    if (value_id < 0) return uniform;
    for (std::int32_t id : config) {
        if (id < 0) return uniform;  // out-of-domain evidence: uniform fallback row
    }
    const auto& table = cpts_[node];
    auto it = table.find(config);
    if (it == table.end()) return uniform;  // unseen parent configuration
    return std::max(it->second[static_cast<std::size_t>(value_id)], kProbFloor);
}

const std::vector<double>* BayesNet::cpt_row(
    const std::string& node, const std::vector<std::string>& parent_values) const {
    const std::size_t i = node_index(node);
    const auto& par = parents_[i];
    if (parent_values.size() != par.size()) {
        throw ShapeMismatch("cpt_row: wrong number of parent values");
    }
    CptConfig config;
    config.reserve(par.size());
    for (std::size_t k = 0; k < par.size(); ++k) {
        std::int32_t id = value_id(par[k], parent_values[k]);
        if (id < 0) return nullptr;
        config.push_back(id);
    }
    auto it = cpts_[i].find(config);
    return it == cpts_[i].end() ? nullptr : &it->second;
}

void BayesNet::rebuild_children() {
    children_.assign(nodes_.size(), {});
    for (std::size_t c = 0; c < nodes_.size(); ++c) {
        for (std::size_t p : parents_[c]) children_[p].push_back(c);
    }
    for (auto& v : children_) std::sort(v.begin(), v.end());
}

void BayesNet::refit_node(const Table& table, std::size_t node) {
    const std::size_t col = table.column_index(nodes_[node]);
    const auto& par = parents_[node];
    std::vector<std::size_t> parent_cols;
    parent_cols.reserve(par.size());
    for (std::size_t p : par) parent_cols.push_back(table.column_index(nodes_[p]));

    const std::size_t dom_size = domains_[node].size();
    if (dom_size == 0) throw EmptyDomain("attribute has no non-null values: " + nodes_[node]);

    std::map<CptConfig, std::vector<double>> counts;
    CptConfig config(par.size());
    for (const Row& row : table.rows()) {
        if (!row[col]) continue;
        const std::int32_t v = value_id(node, *row[col]);
        if (v < 0) continue;
        bool usable = true;
        for (std::size_t k = 0; k < par.size(); ++k) {
            const Cell& pc = row[parent_cols[k]];
            if (!pc) {
                usable = false;  // rows with missing parent evidence are skipped
                break;
            }
            const std::int32_t pid = value_id(par[k], *pc);
            if (pid < 0) {
                usable = false;
                break;
            }
            config[k] = pid;
        }
        if (!usable) continue;
        auto [it, inserted] = counts.try_emplace(config);
        if (inserted) it->second.assign(dom_size, 0.0);
        it->second[static_cast<std::size_t>(v)] += 1.0;
    }

    CptTable cpt;
    for (auto& [cfg, c] : counts) {
        double total = 0.0;
        for (double x : c) total += x;
        std::vector<double> probs(dom_size);
        const double denom = total + alpha_ * static_cast<double>(dom_size);
        for (std::size_t v = 0; v < dom_size; ++v) probs[v] = (c[v] + alpha_) / denom;
        cpt.emplace(cfg, std::move(probs));
    }
    cpts_[node] = std::move(cpt);
}

BayesNet fit_cpts(const Table& table, const SkeletonGraph& skeleton, double alpha) {
    if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
    BayesNet bn;
    bn.alpha_ = alpha;
    bn.nodes_ = skeleton.nodes;
    for (std::size_t i = 0; i < bn.nodes_.size(); ++i) {
        if (!bn.index_.emplace(bn.nodes_[i], i).second) {
            throw ConfigError("duplicate node: " + bn.nodes_[i]);
        }
    }
    bn.parents_.assign(bn.nodes_.size(), {});
    for (const auto& e : skeleton.edges) {
        bn.parents_[bn.node_index(e.to)].push_back(bn.node_index(e.from));
    }
    for (auto& p : bn.parents_) {
        std::sort(p.begin(), p.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
    }
    bn.rebuild_children();

    // Cycle check via topological elimination.
    {
        std::vector<std::size_t> indeg(bn.nodes_.size(), 0);
        for (std::size_t c = 0; c < bn.nodes_.size(); ++c) indeg[c] = bn.parents_[c].size();
        std::vector<std::size_t> queue;
        for (std::size_t i = 0; i < indeg.size(); ++i) {
            if (indeg[i] == 0) queue.push_back(i);
        }
        std::size_t seen = 0;
        while (!queue.empty()) {
            std::size_t v = queue.back();
            queue.pop_back();
            ++seen;
            for (std::size_t c : bn.children_[v]) {
                if (--indeg[c] == 0) queue.push_back(c);
            }
        }
        if (seen != bn.nodes_.size()) throw CycleError("skeleton is not acyclic");
    }

    bn.domains_.resize(bn.nodes_.size());
    bn.value_ids_.resize(bn.nodes_.size());
    for (std::size_t i = 0; i < bn.nodes_.size(); ++i) {
        const std::size_t col = table.column_index(bn.nodes_[i]);
        std::set<std::string> values;
        for (const Row& row : table.rows()) {
            if (row[col]) values.insert(*row[col]);
        }
        if (values.empty()) {
            throw EmptyDomain("attribute has no non-null values: " + bn.nodes_[i]);
        }
        bn.domains_[i].assign(values.begin(), values.end());
        for (std::size_t v = 0; v < bn.domains_[i].size(); ++v) {
            bn.value_ids_[i].emplace(bn.domains_[i][v], static_cast<std::int32_t>(v));
        }
    }

    bn.cpts_.resize(bn.nodes_.size());
    for (std::size_t i = 0; i < bn.nodes_.size(); ++i) bn.refit_node(table, i);
    return bn;
}

double joint_log_prob(const BayesNet& bn, const std::vector<Cell>& values) {
    if (values.size() != bn.node_count()) {
        throw ShapeMismatch("joint_log_prob: assignment size mismatch");
    }
    double lp = 0.0;
    CptConfig config;
    for (std::size_t i = 0; i < bn.node_count(); ++i) {
        if (!values[i]) continue;  // missing evidence: no factor
        const std::int32_t v = bn.value_id(i, *values[i]);
        const auto& par = bn.parents(i);
        config.clear();
        bool skip = false;
        for (std::size_t p : par) {
            if (!values[p]) {
                skip = true;  // conditioning on missing evidence: factor skipped
                break;
            }
            config.push_back(bn.value_id(p, *values[p]));
        }
        if (skip) continue;
        lp += std::log(bn.prob_by_id(i, v, config));
    }
    return lp;
}

std::vector<double> conditional_log_scores(const BayesNet& bn, const std::vector<Cell>& obs,
                                           std::size_t target,
                                           const std::vector<std::int32_t>& candidate_ids,
                                           bool use_partition) {
    if (obs.size() != bn.node_count()) {
        throw ShapeMismatch("conditional: observation size mismatch");
    }
    std::vector<double> scores(candidate_ids.size(), 0.0);
    if (bn.is_isolated(target)) {
        return scores;  // uniform inference prior over the domain
    }

    // Own factor: P(candidate | parents) when all parent evidence is present.
    {
        const auto& par = bn.parents(target);
        CptConfig config;
        bool skip = false;
        for (std::size_t p : par) {
            if (!obs[p]) {
                skip = true;
                break;
            }
            config.push_back(bn.value_id(p, *obs[p]));
        }
        if (!skip) {
            for (std::size_t k = 0; k < candidate_ids.size(); ++k) {
                scores[k] += std::log(bn.prob_by_id(target, candidate_ids[k], config));
            }
        }
    }

    // Child factors: P(observed child value | candidate, observed co-parents).
    for (std::size_t ch : bn.children(target)) {
        if (!obs[ch]) continue;
        const std::int32_t child_value = bn.value_id(ch, *obs[ch]);
        const auto& par = bn.parents(ch);
        CptConfig config(par.size());
        std::size_t target_pos = par.size();
        bool skip = false;
        for (std::size_t k = 0; k < par.size(); ++k) {
            if (par[k] == target) {
                target_pos = k;
                continue;
            }
            if (!obs[par[k]]) {
                skip = true;  // missing co-parent evidence
                break;
            }
            config[k] = bn.value_id(par[k], *obs[par[k]]);
        }
        if (skip) continue;
        for (std::size_t k = 0; k < candidate_ids.size(); ++k) {
            config[target_pos] = candidate_ids[k];
            scores[k] += std::log(bn.prob_by_id(ch, child_value, config));
        }
    }

    if (!use_partition) {
        // Basic reference path: the full joint is re-evaluated per candidate,
        // factor by factor, exactly as a naive full pass would. The non-blanket
        // factors do not involve the candidate and cancel after normalization;
        // appending them after the blanket sum keeps the candidate ordering
        // identical to the partitioned path.
        CptConfig config;
        for (std::size_t k = 0; k < candidate_ids.size(); ++k) {
            for (std::size_t i = 0; i < bn.node_count(); ++i) {
                if (i == target || !obs[i]) continue;
                const auto& par = bn.parents(i);
                if (std::find(par.begin(), par.end(), target) != par.end()) continue;
                config.clear();
                bool skip = false;
                for (std::size_t p : par) {
                    if (p == target || !obs[p]) {
                        skip = true;
                        break;
                    }
                    config.push_back(bn.value_id(p, *obs[p]));
                }
                if (skip) continue;
                scores[k] += std::log(bn.prob_by_id(i, bn.value_id(i, *obs[i]), config));
            }
        }
    }
    return scores;
}

std::vector<double> markov_conditional(const BayesNet& bn, const std::vector<Cell>& obs,
                                       const std::string& target) {
    const std::size_t t = bn.node_index(target);
    const std::size_t dom = bn.domain(t).size();
    std::vector<std::int32_t> all_ids(dom);
    for (std::size_t v = 0; v < dom; ++v) all_ids[v] = static_cast<std::int32_t>(v);
    std::vector<double> log_scores = conditional_log_scores(bn, obs, t, all_ids, true);

    const double mx = *std::max_element(log_scores.begin(), log_scores.end());
    double total = 0.0;
    std::vector<double> probs(dom);
    for (std::size_t v = 0; v < dom; ++v) {
        probs[v] = std::exp(log_scores[v] - mx);
        total += probs[v];
    }
    for (double& p : probs) p /= total;
    return probs;
}

std::map<std::string, SubNetwork> partition(const BayesNet& bn) {
    std::map<std::string, SubNetwork> out;
    for (std::size_t i = 0; i < bn.node_count(); ++i) {
        SubNetwork s;
        s.center = bn.node_name(i);
        for (std::size_t p : bn.parents(i)) s.parents.insert(bn.node_name(p));
        for (std::size_t c : bn.children(i)) s.children.insert(bn.node_name(c));
        s.members = s.parents;
        s.members.insert(s.center);
        s.members.insert(s.children.begin(), s.children.end());
        out.emplace(s.center, std::move(s));
    }
    return out;
}

BayesNet add_edge(const BayesNet& bn, const Table& table, const std::string& parent,
                  const std::string& child) {
    const std::size_t p = bn.node_index(parent);
    const std::size_t c = bn.node_index(child);
    if (p == c) throw CycleError("self edge " + parent + " -> " + child);
    if (bn.has_edge(p, c)) throw ConfigError("edge already exists: " + parent + " -> " + child);

    BayesNet out = bn;
    if (reachable(out.children_, c, p)) {
        throw CycleError("edge " + parent + " -> " + child + " would create a cycle");
    }
    out.parents_[c].push_back(p);
    std::sort(out.parents_[c].begin(), out.parents_[c].end());
    out.rebuild_children();
    out.refit_node(table, c);  // only the affected child is refitted
    return out;
}

BayesNet remove_edge(const BayesNet& bn, const Table& table, const std::string& parent,
                     const std::string& child) {
    const std::size_t p = bn.node_index(parent);
    const std::size_t c = bn.node_index(child);
    if (!bn.has_edge(p, c)) throw MissingEdge("no edge " + parent + " -> " + child);

    BayesNet out = bn;
    auto& par = out.parents_[c];
    par.erase(std::remove(par.begin(), par.end(), p), par.end());
    out.rebuild_children();
    out.refit_node(table, c);
    return out;
}

std::pair<BayesNet, Table> merge_nodes(const BayesNet& bn,
                                       const std::set<std::string>& nodes_to_merge,
                                       const Table& table) {
    if (nodes_to_merge.size() < 2) throw ConfigError("merge needs at least 2 nodes");
    std::vector<std::size_t> merged;
    for (const auto& name : nodes_to_merge) merged.push_back(bn.node_index(name));
    std::sort(merged.begin(), merged.end());

    // Composite column: member values joined by the reserved separator
    // (escaped if present in the data); any NULL member makes the composite
    // NULL.
    std::vector<std::string> member_names;
    std::vector<std::size_t> member_cols;
    for (std::size_t i : merged) {
        member_names.push_back(bn.node_name(i));
        member_cols.push_back(table.column_index(bn.node_name(i)));
    }
    std::string composite_name;
    for (std::size_t k = 0; k < member_names.size(); ++k) {
        if (k) composite_name += "+";
        composite_name += member_names[k];
    }
    while (table.has_column(composite_name)) composite_name += "_merged";

    std::vector<Cell> column;
    column.reserve(table.n_rows());
    std::vector<std::string> member_values;
    for (const Row& row : table.rows()) {
        bool any_null = false;
        member_values.clear();
        for (std::size_t col : member_cols) {
            if (!row[col]) {
                any_null = true;
                break;
            }
            member_values.push_back(*row[col]);
        }
        if (any_null) column.emplace_back(std::nullopt);
        else column.emplace_back(compose_merged_value(member_values));
    }
    Table new_table =
        table.with_column({composite_name, Kind::categorical, ""}, std::move(column));

    // Rebuild the node list: survivors in order, composite appended.
    BayesNet out;
    out.alpha_ = bn.alpha_;
    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < bn.node_count(); ++i) {
        if (!std::binary_search(merged.begin(), merged.end(), i)) survivors.push_back(i);
    }
    for (std::size_t i : survivors) out.nodes_.push_back(bn.node_name(i));
    out.nodes_.push_back(composite_name);
    for (std::size_t i = 0; i < out.nodes_.size(); ++i) out.index_.emplace(out.nodes_[i], i);
    const std::size_t comp = out.nodes_.size() - 1;

    std::unordered_map<std::size_t, std::size_t> remap;
    for (std::size_t k = 0; k < survivors.size(); ++k) remap.emplace(survivors[k], k);

    out.parents_.assign(out.nodes_.size(), {});
    std::set<std::size_t> changed;  // new-index nodes needing a CPT refit
    changed.insert(comp);

    // Surviving edges between survivors carry over unchanged.
    for (std::size_t k = 0; k < survivors.size(); ++k) {
        const std::size_t old_child = survivors[k];
        bool lost_parent = false;
        for (std::size_t p : bn.parents(old_child)) {
            if (std::binary_search(merged.begin(), merged.end(), p)) {
                lost_parent = true;
                continue;
            }
            out.parents_[k].push_back(remap.at(p));
        }
        if (lost_parent) changed.insert(k);
    }

    // Shared edges collapse onto the composite.
    for (std::size_t k = 0; k < survivors.size(); ++k) {
        const std::size_t x = survivors[k];
        bool x_to_all = true, all_to_x = true;
        for (std::size_t mi : merged) {
            if (!bn.has_edge(x, mi)) x_to_all = false;
            if (!bn.has_edge(mi, x)) all_to_x = false;
        }
        if (x_to_all) {
            out.parents_[comp].push_back(k);
        }
        if (all_to_x) {
            out.parents_[k].push_back(comp);
            changed.insert(k);
        }
    }
    for (auto& p : out.parents_) {
        std::sort(p.begin(), p.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
    }
    out.rebuild_children();

    // Domains: survivors keep theirs; the composite's is collected from the
    // new column.
    out.domains_.resize(out.nodes_.size());
    out.value_ids_.resize(out.nodes_.size());
    out.cpts_.resize(out.nodes_.size());
    for (std::size_t k = 0; k < survivors.size(); ++k) {
        out.domains_[k] = bn.domains_[survivors[k]];
        out.value_ids_[k] = bn.value_ids_[survivors[k]];
        if (!changed.count(k)) out.cpts_[k] = bn.cpts_[survivors[k]];
    }
    {
        const std::size_t col = new_table.column_index(composite_name);
        std::set<std::string> values;
        for (const Row& row : new_table.rows()) {
            if (row[col]) values.insert(*row[col]);
        }
        if (values.empty()) throw EmptyDomain("composite column is entirely NULL");
        out.domains_[comp].assign(values.begin(), values.end());
        for (std::size_t v = 0; v < out.domains_[comp].size(); ++v) {
            out.value_ids_[comp].emplace(out.domains_[comp][v], static_cast<std::int32_t>(v));
        }
    }
    for (std::size_t k : changed) out.refit_node(new_table, k);
    return {std::move(out), std::move(new_table)};
}

std::string bn_to_json(const BayesNet& bn) {
    nlohmann::ordered_json j;
    j["nodes"] = bn.nodes();
    j["alpha"] = bn.alpha();
    j["edges"] = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < bn.node_count(); ++c) {
        for (std::size_t p : bn.parents(c)) {
            j["edges"].push_back({{"parent", bn.node_name(p)}, {"child", bn.node_name(c)}});
        }
    }
    nlohmann::ordered_json cpts = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < bn.node_count(); ++i) {
        nlohmann::ordered_json node;
        nlohmann::ordered_json parents = nlohmann::ordered_json::array();
        for (std::size_t p : bn.parents(i)) parents.push_back(bn.node_name(p));
        node["parents"] = parents;
        node["domain"] = bn.domain(i);
        nlohmann::ordered_json configs = nlohmann::ordered_json::array();
        for (const auto& [config, probs] : bn.cpt(i)) {
            nlohmann::ordered_json given = nlohmann::ordered_json::array();
            const auto& par = bn.parents(i);
            for (std::size_t k = 0; k < par.size(); ++k) {
                given.push_back(bn.domain(par[k])[static_cast<std::size_t>(config[k])]);
            }
            configs.push_back({{"given", given}, {"probs", probs}});
        }
        node["configs"] = configs;
        cpts[bn.node_name(i)] = node;
    }
    j["cpts"] = cpts;
    return j.dump(2) + "\n";
}

BayesNet bn_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad model file: ") + e.what());
    }
    BayesNet bn;
    bn.nodes_ = j.at("nodes").get<std::vector<std::string>>();
    bn.alpha_ = j.at("alpha").get<double>();
    for (std::size_t i = 0; i < bn.nodes_.size(); ++i) bn.index_.emplace(bn.nodes_[i], i);
    bn.parents_.assign(bn.nodes_.size(), {});
    for (const auto& e : j.at("edges")) {
        bn.parents_[bn.node_index(e.at("child").get<std::string>())].push_back(
            bn.node_index(e.at("parent").get<std::string>()));
    }
    for (auto& p : bn.parents_) std::sort(p.begin(), p.end());
    bn.rebuild_children();

    bn.domains_.resize(bn.nodes_.size());
    bn.value_ids_.resize(bn.nodes_.size());
    bn.cpts_.resize(bn.nodes_.size());
    const auto& cpts = j.at("cpts");
    // Domains first: a CPT config references the parents' domains, and a
    // parent may come later in node order.
    for (std::size_t i = 0; i < bn.nodes_.size(); ++i) {
        const auto& node = cpts.at(bn.nodes_[i]);
        bn.domains_[i] = node.at("domain").get<std::vector<std::string>>();
        for (std::size_t v = 0; v < bn.domains_[i].size(); ++v) {
            bn.value_ids_[i].emplace(bn.domains_[i][v], static_cast<std::int32_t>(v));
        }
    }
    for (std::size_t i = 0; i < bn.nodes_.size(); ++i) {
        const auto& node = cpts.at(bn.nodes_[i]);
        for (const auto& entry : node.at("configs")) {
            const auto given = entry.at("given").get<std::vector<std::string>>();
            const auto& par = bn.parents_[i];
            if (given.size() != par.size()) throw ConfigError("model CPT arity mismatch");
            CptConfig config;
            for (std::size_t k = 0; k < par.size(); ++k) {
                std::int32_t id = bn.value_id(par[k], given[k]);
                if (id < 0) throw ConfigError("model CPT references unknown value");
                config.push_back(id);
            }
            bn.cpts_[i].emplace(std::move(config), entry.at("probs").get<std::vector<double>>());
        }
    }
    return bn;
}

std::string bn_to_dot(const BayesNet& bn) {
    std::ostringstream os;
    os << "digraph bayes_net {\n";
    for (const auto& n : bn.nodes()) os << "  \"" << n << "\";\n";
    for (std::size_t c = 0; c < bn.node_count(); ++c) {
        for (std::size_t p : bn.parents(c)) {
            os << "  \"" << bn.node_name(p) << "\" -> \"" << bn.node_name(c) << "\";\n";
        }
    }
    os << "}\n";
    return os.str();
}

}  // namespace bclean
