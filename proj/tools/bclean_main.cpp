#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "bclean/bayes_net.hpp"
#include "bclean/cleaning.hpp"
#include "bclean/compensatory.hpp"
#include "bclean/constraints.hpp"
#include "bclean/evaluation.hpp"
#include "bclean/manifest.hpp"
#include "bclean/similarity.hpp"
#include "bclean/structure.hpp"
#include "bclean/table.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitWarnings = 2;
constexpr int kExitRuntime = 3;

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw bclean::IoError("cannot write " + path);
    out << text;
}

std::map<std::string, bclean::Kind> parse_kinds(const std::vector<std::string>& specs) {
    std::map<std::string, bclean::Kind> hints;
    for (const auto& s : specs) {
        auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw bclean::ConfigError("--kind expects attr=categorical|numeric|text");
        }
        hints[s.substr(0, eq)] = bclean::kind_from_name(s.substr(eq + 1));
    }
    return hints;
}

// ------------------------------------------------------------- model bundle

struct ModelBundle {
    bclean::BayesNet bn;
    bclean::DiscretizationMap bins;
    // Merge recipes in application order; cleaning re-materializes the
    // composite columns from them.
    std::vector<std::pair<std::string, std::vector<std::string>>> merges;
};

ordered_json bins_to_json(const bclean::DiscretizationMap& bins) {
    ordered_json j = ordered_json::object();
    for (const auto& [attr, spec] : bins) {
        j[attr] = {{"edges", spec.edges},
                   {"labels", spec.labels},
                   {"representatives", spec.representatives}};
    }
    return j;
}

bclean::DiscretizationMap bins_from_json(const ordered_json& j) {
    bclean::DiscretizationMap bins;
    for (const auto& [attr, spec] : j.items()) {
        bclean::BinSpec b;
        b.edges = spec.at("edges").get<std::vector<double>>();
        b.labels = spec.at("labels").get<std::vector<std::string>>();
        b.representatives = spec.at("representatives").get<std::vector<std::string>>();
        bins.emplace(attr, std::move(b));
    }
    return bins;
}

void save_model(const ModelBundle& model, const ordered_json& extra,
                const ordered_json& manifest, const std::string& path) {
    ordered_json j;
    j["network"] = ordered_json::parse(bclean::bn_to_json(model.bn));
    j["discretization"] = bins_to_json(model.bins);
    ordered_json merges = ordered_json::array();
    for (const auto& [name, members] : model.merges) {
        merges.push_back({{"name", name}, {"members", members}});
    }
    j["merges"] = merges;
    for (const auto& [key, value] : extra.items()) j[key] = value;
    j["manifest"] = manifest;
    write_text(path, j.dump(2) + "\n");
}

ModelBundle load_model(const std::string& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(bclean::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw bclean::ConfigError("bad model file " + path + ": " + e.what());
    }
    ModelBundle model{bclean::bn_from_json(j.at("network").dump()),
                      bins_from_json(j.value("discretization", ordered_json::object())),
                      {}};
    for (const auto& m : j.value("merges", ordered_json::array())) {
        model.merges.emplace_back(m.at("name").get<std::string>(),
                                  m.at("members").get<std::vector<std::string>>());
    }
    return model;
}

// Discretize with the model's stored bins, then re-materialize composite
// columns for every recorded merge.
bclean::Table prepare_table(const bclean::Table& raw, const ModelBundle& model) {
    bclean::Table table = bclean::apply_discretization(raw, model.bins);
    for (const auto& [name, members] : model.merges) {
        std::vector<std::size_t> cols;
        for (const auto& m : members) cols.push_back(table.column_index(m));
        std::vector<bclean::Cell> column;
        column.reserve(table.n_rows());
        std::vector<std::string> values;
        for (const auto& row : table.rows()) {
            bool any_null = false;
            values.clear();
            for (std::size_t c : cols) {
                if (!row[c]) {
                    any_null = true;
                    break;
                }
                values.push_back(*row[c]);
            }
            if (any_null) column.emplace_back(std::nullopt);
            else column.emplace_back(bclean::compose_merged_value(values));
        }
        table = table.with_column({name, bclean::Kind::categorical, ""}, std::move(column));
    }
    return table;
}

// --------------------------------------------------------------- subcommands

struct CommonCsv {
    std::string path;
    std::string null_token;
    std::vector<std::string> kinds;
};

int cmd_profile(const CommonCsv& csv, const std::string& out) {
    bclean::Table table = bclean::load_csv(csv.path, parse_kinds(csv.kinds), csv.null_token);
    auto domains = bclean::build_domains(table);

    ordered_json attrs = ordered_json::array();
    for (const auto& a : table.attributes()) {
        const auto& dom = domains.at(a.name);
        std::size_t null_count = table.n_rows() - dom.total;
        attrs.push_back({{"attribute", a.name},
                         {"kind", bclean::kind_name(a.kind)},
                         {"distinct", dom.values.size()},
                         {"null_count", null_count}});
        if (dom.values.empty()) {
            std::cerr << "warning: attribute " << a.name << " has no non-null values\n";
        }
    }
    ordered_json j;
    j["table"] = table.name();
    j["rows"] = table.n_rows();
    j["attributes"] = attrs;
    j["manifest"] = bclean::make_manifest({{"csv", csv.path}},
                                          {{"null_token", csv.null_token}});
    write_text(out, j.dump(2) + "\n");
    return kExitOk;
}

struct LearnOptions {
    bclean::StructureParams structure;
    double alpha = 1.0;
    std::size_t bins = 20;
    std::string ordering;  // comma-separated attribute names
    std::string model_out;
    std::string skeleton_out;
    std::string dot_out;
    std::string features_out;
    std::uint64_t seed = 0;
};

int cmd_learn(const CommonCsv& csv, const LearnOptions& opt) {
    bclean::Table raw = bclean::load_csv(csv.path, parse_kinds(csv.kinds), csv.null_token);

    bclean::StructureParams params = opt.structure;
    if (!opt.ordering.empty()) {
        std::stringstream ss(opt.ordering);
        std::string item;
        while (std::getline(ss, item, ',')) {
            params.ordering_override.push_back(raw.column_index(item));
        }
        if (params.ordering_override.size() != raw.n_cols()) {
            throw bclean::ConfigError("--ordering must list every attribute exactly once");
        }
    }

    int exit_code = kExitOk;
    bclean::SkeletonGraph skeleton;
    if (raw.n_cols() >= 2) {
        bclean::PairFeatureMatrix features = bclean::adjacent_pair_features(raw);
        if (!opt.features_out.empty()) {
            bclean::dump_features_csv(features, raw, opt.features_out);
        }
        bclean::Matrix sigma = bclean::standardize_covariance(
            bclean::pooled_sweep_covariance(features, raw.n_cols()), params.ridge);
        bclean::GlassoResult glasso =
            bclean::graphical_lasso(sigma, params.rho, params.tol, params.max_iter);
        if (!glasso.converged) {
            std::cerr << "warning: graphical lasso hit the iteration limit (KKT residual "
                      << glasso.kkt_residual << ")\n";
            exit_code = kExitWarnings;
        }
        std::vector<std::size_t> ordering = params.ordering_override.empty()
                                                ? bclean::default_ordering(glasso.theta)
                                                : params.ordering_override;
        bclean::Decomposition dec = bclean::decompose_precision(glasso.theta, ordering);
        std::vector<std::string> names;
        for (const auto& a : raw.attributes()) names.push_back(a.name);
        skeleton = bclean::skeleton_from_b(dec.b, dec.omega, ordering,
                                           params.edge_threshold, names);
    } else {
        for (const auto& a : raw.attributes()) skeleton.nodes.push_back(a.name);
    }

    bclean::DiscretizedTable disc = bclean::discretize_numeric(raw, opt.bins);
    bclean::BayesNet bn = bclean::fit_cpts(disc.table, skeleton, opt.alpha);

    ordered_json params_json = {{"rho", params.rho},
                                {"ridge", params.ridge},
                                {"tol", params.tol},
                                {"max_iter", params.max_iter},
                                {"edge_threshold", params.edge_threshold},
                                {"alpha", opt.alpha},
                                {"bins", opt.bins},
                                {"ordering", opt.ordering},
                                {"null_token", csv.null_token},
                                {"seed", opt.seed}};
    ordered_json manifest = bclean::make_manifest({{"csv", csv.path}}, params_json);

    ordered_json extra;
    extra["skeleton"] = ordered_json::parse(bclean::skeleton_to_json(skeleton));
    save_model({bn, disc.bins, {}}, extra, manifest, opt.model_out);
    if (!opt.skeleton_out.empty()) {
        write_text(opt.skeleton_out, bclean::skeleton_to_json(skeleton));
    }
    if (!opt.dot_out.empty()) write_text(opt.dot_out, bclean::skeleton_to_dot(skeleton));
    return exit_code;
}

int cmd_edit(const std::string& model_path, const std::string& edits_path,
             const CommonCsv& csv, const std::string& out) {
    ModelBundle model = load_model(model_path);
    bclean::Table raw = bclean::load_csv(csv.path, parse_kinds(csv.kinds), csv.null_token);
    bclean::Table table = prepare_table(raw, model);

    ordered_json script;
    try {
        script = ordered_json::parse(bclean::read_file(edits_path));
    } catch (const nlohmann::json::exception& e) {
        throw bclean::ConfigError(std::string("bad edit script: ") + e.what());
    }
    if (!script.is_array()) throw bclean::ConfigError("edit script must be a JSON array");

    for (std::size_t step = 0; step < script.size(); ++step) {
        const auto& op = script[step];
        try {
            const std::string kind = op.at("op").get<std::string>();
            if (kind == "add_edge") {
                model.bn = bclean::add_edge(model.bn, table, op.at("parent").get<std::string>(),
                                            op.at("child").get<std::string>());
            } else if (kind == "remove_edge") {
                model.bn = bclean::remove_edge(model.bn, table,
                                               op.at("parent").get<std::string>(),
                                               op.at("child").get<std::string>());
            } else if (kind == "merge") {
                const auto names = op.at("nodes").get<std::vector<std::string>>();
                auto [bn, merged_table] = bclean::merge_nodes(
                    model.bn, std::set<std::string>(names.begin(), names.end()), table);
                model.bn = std::move(bn);
                const std::string composite = model.bn.node_name(model.bn.node_count() - 1);
                std::vector<std::string> members;
                for (const auto& n : names) members.push_back(n);
                std::sort(members.begin(), members.end(), [&](const auto& a, const auto& b) {
                    return table.column_index(a) < table.column_index(b);
                });
                model.merges.emplace_back(composite, members);
                table = std::move(merged_table);
            } else {
                throw bclean::ConfigError("unknown edit op: " + kind);
            }
        } catch (const std::exception& e) {
            std::cerr << "edit step " << step << " failed: " << e.what() << "\n";
            return kExitRuntime;
        }
    }

    ordered_json manifest = bclean::make_manifest(
        {{"model", model_path}, {"edits", edits_path}, {"csv", csv.path}},
        {{"null_token", csv.null_token}});
    save_model(model, ordered_json::object(), manifest, out);
    return kExitOk;
}

struct CleanOptions {
    std::string model_path;
    std::string ucs_path;
    bclean::ConfidenceParams conf;
    bclean::CleanParams params;
    std::string prune_context = "tuples";
    std::size_t max_corr_entries = 50'000'000;
    std::string corr_cache_dir;
    std::string out_csv;
    std::string report_out;
    std::uint64_t seed = 0;
};

int cmd_clean(const CommonCsv& csv, const CleanOptions& opt) {
    ModelBundle model = load_model(opt.model_path);
    bclean::Table raw = bclean::load_csv(csv.path, parse_kinds(csv.kinds), csv.null_token);
    bclean::Table table = prepare_table(raw, model);

    std::vector<std::string> attr_names;
    for (const auto& a : table.attributes()) attr_names.push_back(a.name);
    bclean::UcSet ucs;
    std::string ucs_text;
    if (!opt.ucs_path.empty()) {
        ucs_text = bclean::read_file(opt.ucs_path);
        ucs = bclean::load_ucs_json(ucs_text, attr_names);
    }

    bclean::CleanParams params = opt.params;
    params.prune_context = opt.prune_context == "subnetworks"
                               ? bclean::DomainPruneContext::subnetworks
                               : bclean::DomainPruneContext::tuples;

    // Compensatory statistics, optionally cached by content hash.
    bclean::CorrTable corr;
    bool built = false;
    std::string cache_path;
    if (!opt.corr_cache_dir.empty()) {
        cache_path = opt.corr_cache_dir + "/" +
                     bclean::corr_cache_key(table, ucs_text, opt.conf) + ".corr";
        try {
            corr = bclean::load_corr_binary(cache_path);
            built = true;
        } catch (const bclean::IoError&) {
            // cache miss
        }
    }
    if (!built) {
        corr = bclean::build_corr(table, ucs, opt.conf, {opt.max_corr_entries});
        if (!cache_path.empty()) bclean::save_corr_binary(corr, cache_path);
    }

    auto [cleaned, report] = bclean::clean(table, model.bn, corr, ucs, params);

    // Fold the cleaned values back onto the raw schema: numeric repairs are
    // reported as bin representatives, composite repairs are split back onto
    // their member columns, appended composite columns are dropped.
    std::map<std::string, std::map<std::string, std::string>> label_to_rep;
    for (const auto& [attr, spec] : model.bins) {
        for (std::size_t b = 0; b < spec.labels.size(); ++b) {
            label_to_rep[attr][spec.labels[b]] = spec.representatives[b];
        }
    }
    std::map<std::string, std::vector<std::string>> merge_members(model.merges.begin(),
                                                                  model.merges.end());

    std::vector<bclean::Row> out_rows = raw.rows();
    bclean::RepairReport final_report;
    final_report.skipped_cells = report.skipped_cells;
    final_report.no_candidate_cells = report.no_candidate_cells;
    final_report.candidate_evals = report.candidate_evals;

    auto apply_repair = [&](std::size_t row, const std::string& attr,
                            const std::string& value, double bn_logp, double cs_weight) {
        const std::size_t col = raw.column_index(attr);
        std::string actual = value;
        auto reps = label_to_rep.find(attr);
        if (reps != label_to_rep.end()) {
            auto rep = reps->second.find(value);
            if (rep != reps->second.end()) actual = rep->second;
        }
        if (out_rows[row][col] && *out_rows[row][col] == actual) return;
        final_report.repairs.push_back(
            {row, attr, out_rows[row][col], actual, bn_logp, cs_weight});
        out_rows[row][col] = actual;
    };

    for (const auto& r : report.repairs) {
        auto merged = merge_members.find(r.attribute);
        if (merged == merge_members.end()) {
            apply_repair(r.row, r.attribute, r.new_value, r.bn_logp, r.cs_weight);
            continue;
        }
        const std::vector<std::string> parts = bclean::decompose_merged_value(r.new_value);
        if (parts.size() != merged->second.size()) continue;  // malformed composite
        for (std::size_t k = 0; k < parts.size(); ++k) {
            apply_repair(r.row, merged->second[k], parts[k], r.bn_logp, r.cs_weight);
        }
    }
    std::sort(final_report.repairs.begin(), final_report.repairs.end(),
              [&](const bclean::Repair& a, const bclean::Repair& b) {
                  if (a.row != b.row) return a.row < b.row;
                  return raw.column_index(a.attribute) < raw.column_index(b.attribute);
              });

    bclean::Table out_table(raw.name(), raw.attributes(), std::move(out_rows));
    bclean::write_csv(out_table, opt.out_csv);

    if (!opt.report_out.empty()) {
        ordered_json j = ordered_json::parse(bclean::report_to_json(final_report));
        std::vector<std::pair<std::string, std::string>> inputs = {
            {"csv", csv.path}, {"model", opt.model_path}};
        if (!opt.ucs_path.empty()) inputs.emplace_back("ucs", opt.ucs_path);
        j["manifest"] = bclean::make_manifest(
            inputs, {{"lambda", opt.conf.lambda},
                     {"beta", opt.conf.beta},
                     {"tau", opt.conf.tau},
                     {"tau_clean", params.tau_clean},
                     {"top_k", params.top_k},
                     {"partition", params.use_partition},
                     {"tuple_prune", params.use_tuple_prune},
                     {"domain_prune", params.use_domain_prune},
                     {"domain_prune_context", opt.prune_context},
                     {"threads", params.threads},
                     {"seed", opt.seed}});
        write_text(opt.report_out, j.dump(2) + "\n");
    }

    std::cerr << "repairs: " << final_report.repairs.size()
              << ", skipped: " << final_report.skipped_cells
              << ", no-candidate: " << final_report.no_candidate_cells << "\n";
    return final_report.no_candidate_cells > 0 ? kExitWarnings : kExitOk;
}

int cmd_inject(const CommonCsv& csv, const std::string& rates_spec, std::uint64_t seed,
               const std::string& out_csv, const std::string& mask_out) {
    bclean::Table clean = bclean::load_csv(csv.path, parse_kinds(csv.kinds), csv.null_token);

    bclean::ErrorSpec spec;
    spec.seed = seed;
    std::stringstream ss(rates_spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw bclean::ConfigError("--rates expects name=value pairs");
        }
        const std::string name = item.substr(0, eq);
        const double rate = std::stod(item.substr(eq + 1));
        if (name == "typo" || name == "T") spec.rates[bclean::ErrorType::typo] = rate;
        else if (name == "missing" || name == "M") spec.rates[bclean::ErrorType::missing] = rate;
        else if (name == "inconsistency" || name == "I")
            spec.rates[bclean::ErrorType::inconsistency] = rate;
        else if (name == "swap" || name == "S") spec.rates[bclean::ErrorType::swap] = rate;
        else throw bclean::ConfigError("unknown error type in --rates: " + name);
    }

    bclean::InjectionResult result = bclean::inject_errors(clean, spec);
    bclean::write_csv(result.dirty, out_csv);
    if (!mask_out.empty()) {
        write_text(mask_out, bclean::mask_to_json(result.truth));
    }
    std::cerr << "injected " << result.truth.mask.size() << " errors\n";
    return kExitOk;
}

int cmd_eval(const std::string& dirty_path, const std::string& cleaned_path,
             const std::string& clean_path, const std::string& mask_path,
             const std::string& null_token, const std::string& out) {
    bclean::Table dirty = bclean::load_csv(dirty_path, {}, null_token);
    bclean::Table cleaned = bclean::load_csv(cleaned_path, {}, null_token);
    bclean::Table clean = bclean::load_csv(clean_path, {}, null_token);

    bclean::GroundTruth truth{clean, {}};
    if (!mask_path.empty()) {
        truth.mask = bclean::mask_from_json(bclean::read_file(mask_path));
    } else {
        // Derive the mask from clean vs dirty; label the type heuristically.
        for (std::size_t i = 0; i < clean.n_rows(); ++i) {
            for (std::size_t j = 0; j < clean.n_cols(); ++j) {
                const auto& cv = clean.cell(i, j);
                const auto& dv = dirty.cell(i, j);
                if (cv == dv) continue;
                bclean::ErrorType type = bclean::ErrorType::inconsistency;
                if (!dv) type = bclean::ErrorType::missing;
                else if (cv && bclean::edit_distance(*cv, *dv) == 1) type = bclean::ErrorType::typo;
                truth.mask.push_back({i, clean.attribute(j).name, cv, dv, type});
            }
        }
    }

    bclean::ScoreResult result = bclean::score(dirty, cleaned, truth);
    std::cout << bclean::score_to_text(result);
    if (!out.empty()) {
        ordered_json j = ordered_json::parse(bclean::score_to_json(result));
        std::vector<std::pair<std::string, std::string>> inputs = {
            {"dirty", dirty_path}, {"cleaned", cleaned_path}, {"clean", clean_path}};
        if (!mask_path.empty()) inputs.emplace_back("mask", mask_path);
        j["manifest"] = bclean::make_manifest(inputs, ordered_json::object());
        write_text(out, j.dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_synth(std::size_t rows, const std::string& groups_spec, std::size_t pool, bool digits,
              bool zipf, std::uint64_t seed, const std::string& out) {
    bclean::SyntheticSpec spec;
    spec.rows = rows;
    spec.seed = seed;
    std::stringstream ss(groups_spec);
    std::string group;
    while (std::getline(ss, group, ';')) {
        if (group.empty()) continue;
        auto gt = group.find('>');
        bclean::FdGroupSpec g;
        g.pool = pool;
        g.digit_values = digits;
        g.zipf = zipf;
        if (gt == std::string::npos) {
            g.determinant = group;
        } else {
            g.determinant = group.substr(0, gt);
            std::stringstream deps(group.substr(gt + 1));
            std::string dep;
            while (std::getline(deps, dep, ',')) {
                if (!dep.empty()) g.dependents.push_back(dep);
            }
        }
        spec.groups.push_back(std::move(g));
    }
    bclean::Table table = bclean::generate_synthetic(spec);
    bclean::write_csv(table, out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bclean: unsupervised Bayesian data cleaning"};
    app.require_subcommand(1);

    CommonCsv csv;
    auto add_csv = [&](CLI::App* cmd, bool positional) {
        if (positional) cmd->add_option("csv", csv.path, "input CSV")->required();
        else cmd->add_option("--csv", csv.path, "input CSV")->required();
        cmd->add_option("--null-token", csv.null_token,
                        "cell text treated as NULL (default: empty)");
        cmd->add_option("--kind", csv.kinds, "attribute kind override, attr=kind");
    };

    // profile
    std::string profile_out = "-";
    auto* profile = app.add_subcommand("profile", "profile a CSV into per-attribute stats");
    add_csv(profile, true);
    profile->add_option("-o,--out", profile_out, "output JSON path (default stdout)");

    // learn
    LearnOptions learn;
    auto* learn_cmd = app.add_subcommand("learn", "learn a Bayesian network from a CSV");
    add_csv(learn_cmd, true);
    learn_cmd->add_option("--model", learn.model_out, "output model JSON")->required();
    learn_cmd->add_option("--skeleton", learn.skeleton_out, "output skeleton JSON");
    learn_cmd->add_option("--dot", learn.dot_out, "output skeleton DOT");
    learn_cmd->add_option("--features-csv", learn.features_out, "debug dump of pair features");
    learn_cmd->add_option("--rho", learn.structure.rho, "glasso l1 penalty");
    learn_cmd->add_option("--ridge", learn.structure.ridge, "covariance ridge");
    learn_cmd->add_option("--tol", learn.structure.tol, "glasso KKT tolerance");
    learn_cmd->add_option("--max-iter", learn.structure.max_iter, "glasso sweep limit");
    learn_cmd->add_option("--edge-threshold", learn.structure.edge_threshold,
                          "autoregression weight threshold");
    learn_cmd->add_option("--alpha", learn.alpha, "CPT smoothing");
    learn_cmd->add_option("--bins", learn.bins, "equal-frequency bins for numeric attributes");
    learn_cmd->add_option("--ordering", learn.ordering,
                          "decomposition ordering (comma-separated attributes)");
    learn_cmd->add_option("--seed", learn.seed, "seed (recorded in the manifest)");

    // edit
    std::string edit_model, edit_script, edit_out;
    auto* edit_cmd = app.add_subcommand("edit", "apply an edit script to a model");
    edit_cmd->add_option("--model", edit_model, "input model JSON")->required();
    edit_cmd->add_option("--edits", edit_script, "edit script JSON")->required();
    add_csv(edit_cmd, false);
    edit_cmd->add_option("--out", edit_out, "output model JSON")->required();

    // clean
    CleanOptions copt;
    auto* clean_cmd = app.add_subcommand("clean", "repair every cell via constrained MAP");
    add_csv(clean_cmd, false);
    clean_cmd->add_option("--model", copt.model_path, "model JSON")->required();
    clean_cmd->add_option("--ucs", copt.ucs_path, "user constraints JSON");
    clean_cmd->add_option("--out", copt.out_csv, "cleaned CSV")->required();
    clean_cmd->add_option("--report", copt.report_out, "repair report JSON");
    clean_cmd->add_option("--lambda", copt.conf.lambda, "UC violation penalty in conf");
    clean_cmd->add_option("--beta", copt.conf.beta, "corr penalty for unreliable tuples");
    clean_cmd->add_option("--tau", copt.conf.tau, "confidence threshold");
    clean_cmd->add_option("--tau-clean", copt.params.tau_clean, "tuple pruning threshold");
    clean_cmd->add_option("--top-k", copt.params.top_k, "domain pruning retention");
    clean_cmd->add_flag("--partition,!--no-partition", copt.params.use_partition,
                        "Markov-blanket partitioning (default on)");
    clean_cmd->add_flag("--tuple-prune", copt.params.use_tuple_prune,
                        "skip reliable cells via the co-occurrence filter");
    clean_cmd->add_flag("--domain-prune", copt.params.use_domain_prune,
                        "TF-IDF candidate retention");
    clean_cmd->add_option("--domain-prune-context", copt.prune_context,
                          "context counting: tuples|subnetworks");
    clean_cmd->add_option("--threads", copt.params.threads, "worker threads (0 = cores)");
    clean_cmd->add_option("--max-corr-entries", copt.max_corr_entries,
                          "corr table entry cap before top-K degradation");
    clean_cmd->add_option("--corr-cache", copt.corr_cache_dir, "corr cache directory");
    clean_cmd->add_option("--seed", copt.seed, "seed (recorded in the manifest)");

    // inject
    std::string inject_rates, inject_out, inject_mask;
    std::uint64_t inject_seed = 0;
    auto* inject_cmd = app.add_subcommand("inject", "inject controlled errors into a clean CSV");
    add_csv(inject_cmd, false);
    inject_cmd->add_option("--rates", inject_rates,
                           "error rates, e.g. typo=0.02,missing=0.02,inconsistency=0.01")
        ->required();
    inject_cmd->add_option("--seed", inject_seed, "rng seed");
    inject_cmd->add_option("--out", inject_out, "dirty CSV")->required();
    inject_cmd->add_option("--mask", inject_mask, "ground-truth mask JSON");

    // eval
    std::string eval_dirty, eval_cleaned, eval_clean, eval_mask, eval_out, eval_null;
    auto* eval_cmd = app.add_subcommand("eval", "score a cleaned CSV against ground truth");
    eval_cmd->add_option("--dirty", eval_dirty, "dirty CSV")->required();
    eval_cmd->add_option("--cleaned", eval_cleaned, "cleaned CSV")->required();
    eval_cmd->add_option("--clean", eval_clean, "ground-truth clean CSV")->required();
    eval_cmd->add_option("--mask", eval_mask, "mask JSON (optional)");
    eval_cmd->add_option("--null-token", eval_null, "NULL token");
    eval_cmd->add_option("-o,--out", eval_out, "metrics JSON");

    // synth
    std::size_t synth_rows = 1000, synth_pool = 20;
    std::string synth_groups, synth_out;
    std::uint64_t synth_seed = 0;
    bool synth_digits = false, synth_zipf = false;
    auto* synth_cmd = app.add_subcommand("synth", "generate an FD-governed synthetic table");
    synth_cmd->add_option("--rows", synth_rows, "row count");
    synth_cmd->add_option("--groups", synth_groups, "FD groups, e.g. 'A>B,C;D>E,F'")->required();
    synth_cmd->add_option("--pool", synth_pool, "distinct determinant values per group");
    synth_cmd->add_flag("--digits", synth_digits, "5-digit pool values");
    synth_cmd->add_flag("--zipf", synth_zipf, "skewed group sizes");
    synth_cmd->add_option("--seed", synth_seed, "rng seed");
    synth_cmd->add_option("--out", synth_out, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (profile->parsed()) return cmd_profile(csv, profile_out);
        if (learn_cmd->parsed()) return cmd_learn(csv, learn);
        if (edit_cmd->parsed()) return cmd_edit(edit_model, edit_script, csv, edit_out);
        if (clean_cmd->parsed()) return cmd_clean(csv, copt);
        if (inject_cmd->parsed()) {
            return cmd_inject(csv, inject_rates, inject_seed, inject_out, inject_mask);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(eval_dirty, eval_cleaned, eval_clean, eval_mask, eval_null, eval_out);
        }
        if (synth_cmd->parsed()) {
            return cmd_synth(synth_rows, synth_groups, synth_pool, synth_digits, synth_zipf,
                             synth_seed, synth_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
