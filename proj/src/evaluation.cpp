#include "bclean/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "bclean/similarity.hpp"
#include "json.hpp"

namespace bclean {

std::string error_type_name(ErrorType t) {
    switch (t) {
        case ErrorType::typo: return "typo";
        case ErrorType::missing: return "missing";
        case ErrorType::inconsistency: return "inconsistency";
        case ErrorType::swap: return "swap";
    }
    return "typo";
}

namespace {

ErrorType error_type_from_name(const std::string& name) {
    if (name == "typo") return ErrorType::typo;
    if (name == "missing") return ErrorType::missing;
    if (name == "inconsistency") return ErrorType::inconsistency;
    if (name == "swap") return ErrorType::swap;
    throw ConfigError("unknown error type: " + name);
}

const char kAlphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789";

std::string encode_utf8(const std::vector<char32_t>& cps) {
    std::string out;
    for (char32_t cp : cps) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

// Single random edit at distance exactly 1, never equal to the input.
std::string make_typo(const std::string& value, std::mt19937_64& rng) {
    std::vector<char32_t> cps = decode_utf8(value);
    std::uniform_int_distribution<int> op_dist(0, 2);
    std::uniform_int_distribution<std::size_t> char_dist(0, sizeof(kAlphabet) - 2);
    int op = op_dist(rng);
    if (op == 1 && cps.size() <= 1) op = 2;  // deleting the only character: replace instead
    if (op == 0) {  // insert
        std::uniform_int_distribution<std::size_t> pos_dist(0, cps.size());
        cps.insert(cps.begin() + static_cast<std::ptrdiff_t>(pos_dist(rng)),
                   static_cast<char32_t>(kAlphabet[char_dist(rng)]));
    } else if (op == 1) {  // delete
        std::uniform_int_distribution<std::size_t> pos_dist(0, cps.size() - 1);
        cps.erase(cps.begin() + static_cast<std::ptrdiff_t>(pos_dist(rng)));
    } else {  // replace
        std::uniform_int_distribution<std::size_t> pos_dist(0, cps.size() - 1);
        const std::size_t pos = pos_dist(rng);
        char32_t replacement = cps[pos];
        while (replacement == cps[pos]) {
            replacement = static_cast<char32_t>(kAlphabet[char_dist(rng)]);
        }
        cps[pos] = replacement;
    }
    return encode_utf8(cps);
}

}  // namespace

InjectionResult inject_errors(const Table& clean, const ErrorSpec& spec) {
    double total_rate = 0.0;
    for (const auto& [t, r] : spec.rates) {
        if (r < 0.0 || r > 1.0) throw ConfigError("error rates must be in [0, 1]");
        total_rate += r;
    }
    if (total_rate > 1.0) throw ConfigError("error rates must sum to <= 1");

    const std::size_t n = clean.n_rows();
    const std::size_t m = clean.n_cols();
    std::mt19937_64 rng(spec.seed);

    // Per-attribute distinct values of the clean table (inconsistency and
    // swap draw from these).
    std::vector<std::vector<std::string>> domains(m);
    {
        std::vector<std::set<std::string>> sets(m);
        for (const Row& row : clean.rows()) {
            for (std::size_t j = 0; j < m; ++j) {
                if (row[j]) sets[j].insert(*row[j]);
            }
        }
        for (std::size_t j = 0; j < m; ++j) domains[j].assign(sets[j].begin(), sets[j].end());
    }

    std::vector<std::pair<std::size_t, std::size_t>> eligible;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (clean.cell(i, j)) eligible.emplace_back(i, j);
        }
    }
    std::shuffle(eligible.begin(), eligible.end(), rng);

    std::vector<Row> dirty_rows = clean.rows();
    std::vector<MaskEntry> mask;
    std::size_t cursor = 0;
    const std::size_t total_cells = n * m;

    auto take_cell = [&]() -> std::pair<std::size_t, std::size_t>* {
        if (cursor >= eligible.size()) return nullptr;
        return &eligible[cursor++];
    };

    for (const ErrorType type :
         {ErrorType::typo, ErrorType::missing, ErrorType::inconsistency, ErrorType::swap}) {
        auto rate_it = spec.rates.find(type);
        if (rate_it == spec.rates.end() || rate_it->second <= 0.0) continue;
        std::size_t budget = static_cast<std::size_t>(
            std::llround(rate_it->second * static_cast<double>(total_cells)));

        while (budget > 0) {
            if (type == ErrorType::swap) {
                // One swap corrupts two cells of the same column.
                if (budget < 2) break;
                auto* first = take_cell();
                if (!first) break;
                const auto [r1, col] = *first;
                // Find a partner in the same column with a different value,
                // scanning forward deterministically.
                std::size_t partner = eligible.size();
                for (std::size_t k = cursor; k < eligible.size(); ++k) {
                    if (eligible[k].second != col) continue;
                    const auto& v1 = dirty_rows[r1][col];
                    const auto& v2 = dirty_rows[eligible[k].first][col];
                    if (v1 && v2 && *v1 != *v2) {
                        partner = k;
                        break;
                    }
                }
                if (partner == eligible.size()) continue;  // cell unusable for swaps
                std::swap(eligible[cursor], eligible[partner]);
                const std::size_t r2 = take_cell()->first;
                const std::string v1 = *clean.cell(r1, col);
                const std::string v2 = *clean.cell(r2, col);
                dirty_rows[r1][col] = v2;
                dirty_rows[r2][col] = v1;
                mask.push_back({r1, clean.attribute(col).name, v1, v2, type});
                mask.push_back({r2, clean.attribute(col).name, v2, v1, type});
                budget -= 2;
                continue;
            }

            auto* cell = take_cell();
            if (!cell) break;
            const auto [i, j] = *cell;
            const std::string original = *clean.cell(i, j);
            Cell corrupted;
            if (type == ErrorType::typo) {
                corrupted = make_typo(original, rng);
            } else if (type == ErrorType::missing) {
                corrupted = std::nullopt;
            } else {  // inconsistency: cross-column or same-column value
                const bool cross = m >= 2 && std::uniform_int_distribution<int>(0, 1)(rng) == 0;
                std::string replacement;
                bool found = false;
                if (cross) {
                    std::uniform_int_distribution<std::size_t> col_dist(0, m - 2);
                    std::size_t other = col_dist(rng);
                    if (other >= j) ++other;
                    if (!domains[other].empty()) {
                        std::uniform_int_distribution<std::size_t> v_dist(
                            0, domains[other].size() - 1);
                        replacement = domains[other][v_dist(rng)];
                        found = replacement != original;
                    }
                }
                if (!found && domains[j].size() >= 2) {
                    std::uniform_int_distribution<std::size_t> v_dist(0, domains[j].size() - 2);
                    for (int attempt = 0; attempt < 8 && !found; ++attempt) {
                        replacement = domains[j][v_dist(rng)];
                        found = replacement != original;
                    }
                    if (!found) {
                        for (const auto& v : domains[j]) {
                            if (v != original) {
                                replacement = v;
                                found = true;
                                break;
                            }
                        }
                    }
                }
                if (!found) continue;  // single-valued table: nothing to swap in
                corrupted = replacement;
            }
            dirty_rows[i][j] = corrupted;
            mask.push_back({i, clean.attribute(j).name, original, corrupted, type});
            --budget;
        }
    }

    std::sort(mask.begin(), mask.end(), [&](const MaskEntry& a, const MaskEntry& b) {
        if (a.row != b.row) return a.row < b.row;
        return clean.column_index(a.attribute) < clean.column_index(b.attribute);
    });

    Table dirty(clean.name(), clean.attributes(), std::move(dirty_rows));
    return {std::move(dirty), {clean, std::move(mask)}};
}

ScoreResult score(const Table& dirty, const Table& cleaned, const GroundTruth& truth) {
    const Table& clean = truth.clean_table;
    if (dirty.n_rows() != cleaned.n_rows() || dirty.n_cols() != cleaned.n_cols() ||
        dirty.n_rows() != clean.n_rows() || dirty.n_cols() != clean.n_cols()) {
        throw ShapeMismatch("score: tables do not share a shape");
    }

    ScoreResult result;
    for (std::size_t i = 0; i < dirty.n_rows(); ++i) {
        for (std::size_t j = 0; j < dirty.n_cols(); ++j) {
            const Cell& d = dirty.cell(i, j);
            const Cell& c = cleaned.cell(i, j);
            if (d == c) continue;
            ++result.modified;
            if (c == clean.cell(i, j)) ++result.correct;
        }
    }
    result.errors = truth.mask.size();

    if (result.modified == 0) {
        result.precision = result.errors == 0 ? 1.0 : 0.0;
    } else {
        result.precision =
            static_cast<double>(result.correct) / static_cast<double>(result.modified);
    }
    result.recall = result.errors == 0
                        ? 1.0
                        : static_cast<double>(result.correct) / static_cast<double>(result.errors);
    result.f1 = (result.precision + result.recall) > 0.0
                    ? 2.0 * result.precision * result.recall / (result.precision + result.recall)
                    : 0.0;

    std::map<std::string, std::size_t> type_total, type_correct;
    for (const MaskEntry& e : truth.mask) {
        const std::string name = error_type_name(e.type);
        ++type_total[name];
        const std::size_t j = clean.column_index(e.attribute);
        if (cleaned.cell(e.row, j) == clean.cell(e.row, j)) ++type_correct[name];
    }
    for (const auto& [name, total] : type_total) {
        result.per_type_recall[name] =
            static_cast<double>(type_correct[name]) / static_cast<double>(total);
    }
    return result;
}

Table generate_synthetic(const SyntheticSpec& spec) {
    if (spec.groups.empty()) throw ConfigError("synthetic spec needs at least one FD group");
    if (spec.rows == 0) throw ConfigError("synthetic spec needs rows >= 1");
    std::mt19937_64 rng(spec.seed);

    auto random_token = [&](bool digits) {
        std::string v;
        if (digits) {
            std::uniform_int_distribution<int> first(1, 9), rest(0, 9);
            v.push_back(static_cast<char>('0' + first(rng)));
            for (int k = 0; k < 4; ++k) v.push_back(static_cast<char>('0' + rest(rng)));
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, sizeof(kAlphabet) - 2);
            for (int k = 0; k < 8; ++k) v.push_back(kAlphabet[pick(rng)]);
        }
        return v;
    };

    std::vector<AttributeSpec> attrs;
    std::vector<Row> rows(spec.rows);

    for (const FdGroupSpec& group : spec.groups) {
        if (group.pool == 0) throw ConfigError("FD group pool must be >= 1");
        // Distinct pools for the determinant and each dependent; the FD maps
        // determinant index -> dependent value.
        auto make_pool = [&](std::size_t size) {
            std::set<std::string> seen;
            std::vector<std::string> pool;
            while (pool.size() < size) {
                std::string v = random_token(group.digit_values);
                if (seen.insert(v).second) pool.push_back(v);
            }
            return pool;
        };
        const std::vector<std::string> det_pool = make_pool(group.pool);
        std::vector<std::vector<std::string>> dep_pools;
        for (std::size_t d = 0; d < group.dependents.size(); ++d) {
            dep_pools.push_back(make_pool(group.pool));
        }

        std::vector<std::size_t> draw(spec.rows);
        if (group.zipf) {
            std::vector<double> weights(group.pool);
            for (std::size_t k = 0; k < group.pool; ++k) weights[k] = 1.0 / (1.0 + static_cast<double>(k));
            std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
            for (auto& d : draw) d = dist(rng);
        } else {
            std::uniform_int_distribution<std::size_t> dist(0, group.pool - 1);
            for (auto& d : draw) d = dist(rng);
        }

        attrs.push_back({group.determinant, Kind::text, ""});
        for (std::size_t i = 0; i < spec.rows; ++i) rows[i].emplace_back(det_pool[draw[i]]);
        for (std::size_t d = 0; d < group.dependents.size(); ++d) {
            attrs.push_back({group.dependents[d], Kind::text, ""});
            for (std::size_t i = 0; i < spec.rows; ++i) {
                rows[i].emplace_back(dep_pools[d][draw[i]]);
            }
        }
    }
    return Table("synthetic", std::move(attrs), std::move(rows));
}

std::string mask_to_json(const GroundTruth& truth) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& e : truth.mask) {
        nlohmann::ordered_json item;
        item["row"] = e.row;
        item["attribute"] = e.attribute;
        item["clean_value"] = e.clean_value ? nlohmann::ordered_json(*e.clean_value)
                                            : nlohmann::ordered_json(nullptr);
        item["dirty_value"] = e.dirty_value ? nlohmann::ordered_json(*e.dirty_value)
                                            : nlohmann::ordered_json(nullptr);
        item["type"] = error_type_name(e.type);
        j.push_back(std::move(item));
    }
    return j.dump(2) + "\n";
}

std::vector<MaskEntry> mask_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad mask file: ") + e.what());
    }
    std::vector<MaskEntry> mask;
    for (const auto& item : j) {
        MaskEntry e;
        e.row = item.at("row").get<std::size_t>();
        e.attribute = item.at("attribute").get<std::string>();
        if (!item.at("clean_value").is_null()) e.clean_value = item["clean_value"].get<std::string>();
        if (!item.at("dirty_value").is_null()) e.dirty_value = item["dirty_value"].get<std::string>();
        e.type = item.contains("type") ? error_type_from_name(item["type"].get<std::string>())
                                       : ErrorType::typo;
        mask.push_back(std::move(e));
    }
    return mask;
}

std::string score_to_json(const ScoreResult& r) {
    nlohmann::ordered_json j;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["modified"] = r.modified;
    j["correct"] = r.correct;
    j["errors"] = r.errors;
    j["per_type_recall"] = r.per_type_recall;
    return j.dump(2) + "\n";
}

std::string score_to_text(const ScoreResult& r) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    os << "metric     value\n";
    os << "precision  " << r.precision << "\n";
    os << "recall     " << r.recall << "\n";
    os << "f1         " << r.f1 << "\n";
    os << "modified   " << r.modified << "\n";
    os << "correct    " << r.correct << "\n";
    os << "errors     " << r.errors << "\n";
    for (const auto& [name, rec] : r.per_type_recall) {
        os << "recall[" << name << "]  " << rec << "\n";
    }
    return os.str();
}

}  // namespace bclean
