#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bclean/errors.hpp"

namespace bclean {

enum class Kind { categorical, numeric, text };

std::string kind_name(Kind k);
Kind kind_from_name(const std::string& name);

struct AttributeSpec {
    std::string name;
    Kind kind = Kind::text;
    std::string null_token;  // cell text equal to this reads as NULL
};

// A cell is absent (NULL) or a string value; numeric attributes keep their
// textual form and are parsed on demand.
using Cell = std::optional<std::string>;
using Row = std::vector<Cell>;

class Table {
public:
    Table() = default;
    Table(std::string name, std::vector<AttributeSpec> attrs, std::vector<Row> rows);

    const std::string& name() const { return name_; }
    std::size_t n_rows() const { return rows_.size(); }
    std::size_t n_cols() const { return attrs_.size(); }
    const std::vector<AttributeSpec>& attributes() const { return attrs_; }
    const AttributeSpec& attribute(std::size_t j) const { return attrs_.at(j); }
    const std::vector<Row>& rows() const { return rows_; }
    const Row& row(std::size_t i) const { return rows_.at(i); }
    const Cell& cell(std::size_t i, std::size_t j) const { return rows_.at(i).at(j); }

    std::size_t column_index(const std::string& attr) const;
    bool has_column(const std::string& attr) const { return index_.count(attr) > 0; }

    // Value-replacing edits produce new tables; the grid itself is immutable.
    Table with_cell(std::size_t i, std::size_t j, Cell value) const;
    Table with_column(const AttributeSpec& spec, std::vector<Cell> column) const;

private:
    std::string name_;
    std::vector<AttributeSpec> attrs_;
    std::vector<Row> rows_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct AttributeDomain {
    std::string attribute;
    // observed value -> occurrence count; NULL never appears
    std::map<std::string, std::size_t> values;
    std::size_t total = 0;  // non-null cells
};

// ---------------------------------------------------------------- operations

// RFC-4180-style CSV with a mandatory header row. Kinds are inferred as
// numeric when >= 95% of non-null cells parse as finite numbers, overridable
// per attribute through schema_hint.
Table load_csv(const std::string& path,
               const std::map<std::string, Kind>& schema_hint = {},
               const std::string& null_token = "");

void write_csv(const Table& table, const std::string& path);

std::map<std::string, AttributeDomain> build_domains(const Table& table);

// Equal-frequency binning spec for one numeric attribute, kept so repairs can
// be reported as bin representatives and so a model's binning can be
// re-applied to fresh data.
struct BinSpec {
    std::vector<double> edges;           // ascending; bin i = [edges[i], edges[i+1])
    std::vector<std::string> labels;     // one per bin
    std::vector<std::string> representatives;  // bin median, original text form
    std::size_t bin_of(double v) const;
};

using DiscretizationMap = std::map<std::string, BinSpec>;

struct DiscretizedTable {
    Table table;
    DiscretizationMap bins;
};

DiscretizedTable discretize_numeric(const Table& table, std::size_t bins);

// Re-apply a stored binning (model consistency: cleaning must bucket with the
// same edges the model was fitted with).
Table apply_discretization(const Table& table, const DiscretizationMap& bins);

bool parse_number(const std::string& text, double& out);

}  // namespace bclean
