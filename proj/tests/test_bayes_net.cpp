#include <cmath>
#include <random>

#include "bclean/bayes_net.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bclean;

namespace {

Table two_column_fd() {
    // exact FD A -> B
    std::vector<Row> rows = {{Cell("a1"), Cell("b1")}, {Cell("a1"), Cell("b1")},
                             {Cell("a2"), Cell("b2")}, {Cell("a2"), Cell("b2")},
                             {Cell("a3"), Cell("b3")}};
    return Table("fd", {{"A", Kind::text, ""}, {"B", Kind::text, ""}}, rows);
}

SkeletonGraph edge_skeleton(const std::vector<std::string>& nodes,
                            const std::vector<std::pair<std::string, std::string>>& edges) {
    SkeletonGraph g;
    g.nodes = nodes;
    for (const auto& [from, to] : edges) g.edges.push_back({from, to, 1.0});
    return g;
}

}  // namespace

TEST_CASE("fit_cpts: exact FD with alpha=0 gives one-hot rows") {
    BayesNet bn = fit_cpts(two_column_fd(), edge_skeleton({"A", "B"}, {{"A", "B"}}), 0.0);
    for (const auto& a : {"a1", "a2", "a3"}) {
        const auto* row = bn.cpt_row("B", {a});
        REQUIRE(row != nullptr);
        double mx = 0.0, total = 0.0;
        for (double p : *row) {
            mx = std::max(mx, p);
            total += p;
        }
        CHECK(mx == doctest::Approx(1.0));
        CHECK(total == doctest::Approx(1.0));
    }
}

TEST_CASE("fit_cpts: laplace smoothing on a parentless node") {
    std::vector<Row> rows = {{Cell("a")}, {Cell("a")}, {Cell("a")}, {Cell("b")}};
    Table t("t", {{"X", Kind::text, ""}}, rows);
    BayesNet bn = fit_cpts(t, edge_skeleton({"X"}, {}), 1.0);
    const auto* row = bn.cpt_row("X", {});
    REQUIRE(row != nullptr);
    // counts {a:3, b:1}, alpha=1: P(a) = 4/6, P(b) = 2/6
    CHECK((*row)[bn.value_id(0, "a")] == doctest::Approx(4.0 / 6.0));
    CHECK((*row)[bn.value_id(0, "b")] == doctest::Approx(2.0 / 6.0));
}

TEST_CASE("unseen parent configuration falls back to uniform") {
    BayesNet bn = fit_cpts(two_column_fd(), edge_skeleton({"A", "B"}, {{"A", "B"}}), 1.0);
    // "a9" was never observed: uniform over dom(B) of size 3.
    CHECK(bn.prob_by_id(bn.node_index("B"), 0, {-1}) == doctest::Approx(1.0 / 3.0));
    const std::size_t b = bn.node_index("B");
    CHECK(bn.prob_by_id(b, bn.value_id(b, "b1"), CptConfig{5}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("empty-domain attribute is rejected") {
    std::vector<Row> rows = {{Cell("x"), std::nullopt}, {Cell("y"), std::nullopt}};
    Table t("t", {{"A", Kind::text, ""}, {"B", Kind::text, ""}}, rows);
    CHECK_THROWS_AS(fit_cpts(t, edge_skeleton({"A", "B"}, {}), 1.0), EmptyDomain);
}

TEST_CASE("cyclic skeleton is rejected") {
    CHECK_THROWS_AS(
        fit_cpts(two_column_fd(), edge_skeleton({"A", "B"}, {{"A", "B"}, {"B", "A"}}), 1.0),
        CycleError);
}

TEST_CASE("joint_log_prob basics") {
    SUBCASE("single node uses the smoothed marginal") {
        std::vector<Row> rows = {{Cell("a")}, {Cell("a")}, {Cell("a")}, {Cell("b")}};
        Table t("t", {{"X", Kind::text, ""}}, rows);
        BayesNet bn = fit_cpts(t, edge_skeleton({"X"}, {}), 1.0);
        CHECK(joint_log_prob(bn, {Cell("a")}) == doctest::Approx(std::log(4.0 / 6.0)));
    }

    SUBCASE("one-hot chain scores near zero in log space") {
        BayesNet bn = fit_cpts(two_column_fd(), edge_skeleton({"A", "B"}, {{"A", "B"}}), 0.0);
        const double lp = joint_log_prob(bn, {Cell("a1"), Cell("b1")});
        // P(a1) = 2/5 exactly; P(b1 | a1) = 1.
        CHECK(lp == doctest::Approx(std::log(2.0 / 5.0)));
    }

    SUBCASE("probabilities over all assignments sum to 1") {
        std::mt19937_64 rng(97);
        for (int trial = 0; trial < 5; ++trial) {
            auto [bn, table] = oracles::random_bayes_net(4, 3, 0.5, rng);
            std::vector<std::size_t> dims;
            for (std::size_t i = 0; i < bn.node_count(); ++i) dims.push_back(bn.domain(i).size());
            double total = 0.0;
            std::vector<std::size_t> idx(dims.size(), 0);
            for (;;) {
                std::vector<Cell> assignment;
                for (std::size_t i = 0; i < dims.size(); ++i) {
                    assignment.emplace_back(bn.domain(i)[idx[i]]);
                }
                total += std::exp(joint_log_prob(bn, assignment));
                std::size_t k = 0;
                while (k < dims.size() && ++idx[k] == dims[k]) idx[k++] = 0;
                if (k == dims.size()) break;
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("markov_conditional: isolated node is uniform") {
    std::vector<Row> rows = {{Cell("a")}, {Cell("a")}, {Cell("b")}, {Cell("c")}};
    Table t("t", {{"X", Kind::text, ""}}, rows);
    BayesNet bn = fit_cpts(t, edge_skeleton({"X"}, {}), 1.0);
    std::vector<double> p = markov_conditional(bn, {Cell("a")}, "X");
    REQUIRE(p.size() == 3);
    for (double x : p) CHECK(x == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("markov_conditional: two-node bayes rule") {
    // P(A) = [0.5, 0.5]; P(B=b1|a1) = 0.9, P(B=b1|a2) = 0.2; observe B=b1.
    std::vector<Row> rows;
    for (int i = 0; i < 9; ++i) rows.push_back({Cell("a1"), Cell("b1")});
    rows.push_back({Cell("a1"), Cell("b2")});
    for (int i = 0; i < 2; ++i) rows.push_back({Cell("a2"), Cell("b1")});
    for (int i = 0; i < 8; ++i) rows.push_back({Cell("a2"), Cell("b2")});
    Table t("t", {{"A", Kind::text, ""}, {"B", Kind::text, ""}}, rows);
    BayesNet bn = fit_cpts(t, edge_skeleton({"A", "B"}, {{"A", "B"}}), 0.0);

    std::vector<double> p = markov_conditional(bn, {std::nullopt, Cell("b1")}, "A");
    CHECK(p[bn.value_id(0, "a1")] == doctest::Approx(0.9 / 1.1).epsilon(1e-9));
    CHECK(p[bn.value_id(0, "a2")] == doctest::Approx(0.2 / 1.1).epsilon(1e-9));
}

TEST_CASE("markov_conditional equals full-joint enumeration (property)") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 60; ++trial) {
        auto [bn, table] = oracles::random_bayes_net(2 + rng() % 6, 4, 0.4, rng);
        const std::size_t m = bn.node_count();
        // random full observation from the domains
        std::vector<Cell> obs;
        for (std::size_t i = 0; i < m; ++i) {
            obs.emplace_back(bn.domain(i)[rng() % bn.domain(i).size()]);
        }
        for (std::size_t target = 0; target < m; ++target) {
            std::vector<double> got = markov_conditional(bn, obs, bn.node_name(target));
            std::vector<double> want = oracles::enumerate_conditional(bn, obs, target);
            REQUIRE(got.size() == want.size());
            for (std::size_t v = 0; v < got.size(); ++v) {
                CHECK(got[v] == doctest::Approx(want[v]).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("partition: one-hop membership") {
    SUBCASE("chain") {
        BayesNet bn = fit_cpts(
            Table("t",
                  {{"A", Kind::text, ""}, {"B", Kind::text, ""}, {"C", Kind::text, ""}},
                  {{Cell("x"), Cell("y"), Cell("z")}, {Cell("p"), Cell("q"), Cell("r")}}),
            edge_skeleton({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}), 1.0);
        auto subs = partition(bn);
        CHECK(subs.at("B").members == std::set<std::string>{"A", "B", "C"});
        CHECK(subs.at("A").members == std::set<std::string>{"A", "B"});
        CHECK(subs.at("C").members == std::set<std::string>{"B", "C"});
    }

    SUBCASE("collider: co-parent is not a member") {
        BayesNet bn = fit_cpts(
            Table("t",
                  {{"A", Kind::text, ""}, {"B", Kind::text, ""}, {"C", Kind::text, ""}},
                  {{Cell("x"), Cell("y"), Cell("z")}, {Cell("p"), Cell("q"), Cell("r")}}),
            edge_skeleton({"A", "B", "C"}, {{"A", "C"}, {"B", "C"}}), 1.0);
        auto subs = partition(bn);
        CHECK(subs.at("A").members == std::set<std::string>{"A", "C"});
        CHECK(subs.at("C").members == std::set<std::string>{"A", "B", "C"});
    }

    SUBCASE("edgeless network gives singletons") {
        BayesNet bn = fit_cpts(two_column_fd(), edge_skeleton({"A", "B"}, {}), 1.0);
        auto subs = partition(bn);
        CHECK(subs.at("A").members == std::set<std::string>{"A"});
        CHECK(subs.at("B").members == std::set<std::string>{"B"});
    }

    SUBCASE("membership iff one-hop edge (random graphs)") {
        std::mt19937_64 rng(107);
        for (int trial = 0; trial < 20; ++trial) {
            auto [bn, table] = oracles::random_bayes_net(5, 3, 0.4, rng);
            auto subs = partition(bn);
            for (std::size_t j = 0; j < bn.node_count(); ++j) {
                for (std::size_t k = 0; k < bn.node_count(); ++k) {
                    const bool member =
                        subs.at(bn.node_name(j)).members.count(bn.node_name(k)) > 0;
                    const bool expected =
                        k == j || bn.has_edge(k, j) || bn.has_edge(j, k);
                    CHECK(member == expected);
                }
            }
        }
    }
}

TEST_CASE("add_edge / remove_edge round trip and locality") {
    Table t = two_column_fd();
    SkeletonGraph g = edge_skeleton({"A", "B"}, {});
    BayesNet bn = fit_cpts(t, g, 1.0);

    BayesNet with_edge = add_edge(bn, t, "A", "B");
    CHECK(with_edge.has_edge(0, 1));
    // locality: A's CPT is bit-identical
    CHECK(with_edge.cpt(0) == bn.cpt(0));

    BayesNet back = remove_edge(with_edge, t, "A", "B");
    CHECK(back.cpt(0) == bn.cpt(0));
    CHECK(back.cpt(1) == bn.cpt(1));
    CHECK(back.edge_count() == 0);

    CHECK_THROWS_AS(remove_edge(bn, t, "A", "B"), MissingEdge);
    BayesNet chain = add_edge(bn, t, "A", "B");
    CHECK_THROWS_AS(add_edge(chain, t, "B", "A"), CycleError);
}

TEST_CASE("add_edge refits exactly one child CPT on a hospital-shaped table") {
    std::mt19937_64 rng(109);
    std::vector<AttributeSpec> attrs = {{"State", Kind::text, ""},
                                        {"StateAvg", Kind::text, ""},
                                        {"Other", Kind::text, ""}};
    std::vector<Row> rows;
    for (int i = 0; i < 50; ++i) {
        const std::string s = "s" + std::to_string(rng() % 5);
        rows.push_back({Cell(s), Cell("avg_" + s), Cell("o" + std::to_string(rng() % 3))});
    }
    Table t("hospital", attrs, rows);
    BayesNet bn = fit_cpts(t, edge_skeleton({"State", "StateAvg", "Other"}, {}), 1.0);
    BayesNet edited = add_edge(bn, t, "State", "StateAvg");
    CHECK(edited.cpt(t.column_index("State")) == bn.cpt(0));
    CHECK(edited.cpt(2) == bn.cpt(2));
    CHECK(edited.cpt(1) != bn.cpt(1));  // the affected child was refitted
}

TEST_CASE("merge_nodes: shared child edges collapse onto the composite") {
    // Jobid -> InsuranceCode and ZipCode -> InsuranceCode.
    std::vector<AttributeSpec> attrs = {{"Jobid", Kind::text, ""},
                                        {"ZipCode", Kind::text, ""},
                                        {"InsuranceCode", Kind::text, ""}};
    std::vector<Row> rows;
    std::mt19937_64 rng(113);
    for (int i = 0; i < 40; ++i) {
        const std::string j = "j" + std::to_string(rng() % 4);
        const std::string z = "z" + std::to_string(rng() % 4);
        rows.push_back({Cell(j), Cell(z), Cell(j + z)});
    }
    Table t("customer", attrs, rows);
    BayesNet bn = fit_cpts(
        t, edge_skeleton({"Jobid", "ZipCode", "InsuranceCode"},
                         {{"Jobid", "InsuranceCode"}, {"ZipCode", "InsuranceCode"}}),
        1.0);

    auto [merged, merged_table] = merge_nodes(bn, {"Jobid", "ZipCode"}, t);
    CHECK(merged.node_count() == 2);
    const std::string comp = merged.node_name(1);
    CHECK(comp == "Jobid+ZipCode");
    CHECK(merged.has_edge(merged.node_index(comp), merged.node_index("InsuranceCode")));
    CHECK(merged.edge_count() == 1);
    // composite domain is bounded by the product of member domains
    CHECK(merged.domain(merged.node_index(comp)).size() <= 4 * 4);
    // the composite column exists in the returned table
    CHECK(merged_table.has_column(comp));
}

TEST_CASE("merging two isolated nodes yields an isolated composite") {
    Table t = two_column_fd();
    BayesNet bn = fit_cpts(t, edge_skeleton({"A", "B"}, {}), 1.0);
    auto [merged, merged_table] = merge_nodes(bn, {"A", "B"}, t);
    CHECK(merged.node_count() == 1);
    CHECK(merged.is_isolated(0));
}

TEST_CASE("merged values escape the reserved separator") {
    const std::string sep(1, '\x1f');
    std::vector<std::string> members = {"plain", "with" + sep + "sep"};
    const std::string composite = compose_merged_value(members);
    CHECK(decompose_merged_value(composite) == members);
    // escaping is reversible for the escape character itself too
    std::vector<std::string> tricky = {std::string(1, '\x1b'), sep + sep};
    CHECK(decompose_merged_value(compose_merged_value(tricky)) == tricky);
}

TEST_CASE("bayes net json round-trip preserves inference") {
    std::mt19937_64 rng(127);
    auto [bn, table] = oracles::random_bayes_net(5, 3, 0.5, rng);
    BayesNet back = bn_from_json(bn_to_json(bn));
    CHECK(back.node_count() == bn.node_count());
    CHECK(bn_to_json(back) == bn_to_json(bn));  // byte-identical re-serialization

    std::vector<Cell> obs;
    for (std::size_t i = 0; i < bn.node_count(); ++i) {
        obs.emplace_back(bn.domain(i)[rng() % bn.domain(i).size()]);
    }
    for (std::size_t t = 0; t < bn.node_count(); ++t) {
        auto a = markov_conditional(bn, obs, bn.node_name(t));
        auto b = markov_conditional(back, obs, bn.node_name(t));
        for (std::size_t v = 0; v < a.size(); ++v) CHECK(a[v] == b[v]);
    }
    CHECK(bn_to_dot(bn).find("digraph") == 0);
}

TEST_CASE("every CPT row is a probability vector") {
    std::mt19937_64 rng(131);
    for (int trial = 0; trial < 10; ++trial) {
        auto [bn, table] = oracles::random_bayes_net(5, 4, 0.5, rng);
        for (std::size_t i = 0; i < bn.node_count(); ++i) {
            for (const auto& [config, probs] : bn.cpt(i)) {
                double total = 0.0;
                for (double p : probs) {
                    CHECK(p > 0.0);  // alpha > 0 keeps every entry positive
                    total += p;
                }
                CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
            }
        }
    }
}
