#include "bclean/table.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bclean {

std::string kind_name(Kind k) {
    switch (k) {
        case Kind::categorical: return "categorical";
        case Kind::numeric: return "numeric";
        case Kind::text: return "text";
    }
    return "text";
}

Kind kind_from_name(const std::string& name) {
    if (name == "categorical") return Kind::categorical;
    if (name == "numeric") return Kind::numeric;
    if (name == "text") return Kind::text;
    throw ConfigError("unknown attribute kind: " + name);
}

Table::Table(std::string name, std::vector<AttributeSpec> attrs, std::vector<Row> rows)
    : name_(std::move(name)), attrs_(std::move(attrs)), rows_(std::move(rows)) {
    for (std::size_t j = 0; j < attrs_.size(); ++j) {
        if (attrs_[j].name.empty()) throw ConfigError("empty attribute name");
        if (!index_.emplace(attrs_[j].name, j).second) {
            throw ConfigError("duplicate attribute name: " + attrs_[j].name);
        }
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i].size() != attrs_.size()) {
            throw RaggedRow(i, rows_[i].size(), attrs_.size());
        }
    }
}

std::size_t Table::column_index(const std::string& attr) const {
    auto it = index_.find(attr);
    if (it == index_.end()) throw ConfigError("unknown attribute: " + attr);
    return it->second;
}

Table Table::with_cell(std::size_t i, std::size_t j, Cell value) const {
    std::vector<Row> rows = rows_;
    rows.at(i).at(j) = std::move(value);
    return Table(name_, attrs_, std::move(rows));
}

Table Table::with_column(const AttributeSpec& spec, std::vector<Cell> column) const {
    if (column.size() != rows_.size()) {
        throw ShapeMismatch("column length " + std::to_string(column.size()) +
                            " != row count " + std::to_string(rows_.size()));
    }
    std::vector<AttributeSpec> attrs = attrs_;
    attrs.push_back(spec);
    std::vector<Row> rows = rows_;
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].push_back(std::move(column[i]));
    return Table(name_, std::move(attrs), std::move(rows));
}

bool parse_number(const std::string& text, double& out) {
    if (text.empty()) return false;
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || errno == ERANGE || !std::isfinite(v)) return false;
    while (*end == ' ' || *end == '\t') ++end;
    if (*end != '\0') return false;
    out = v;
    return true;
}

namespace {

// One CSV record; handles quoted fields, embedded separators/newlines and
// doubled quotes. Returns false on EOF with no data consumed.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int ch;
    while ((ch = in.get()) != std::char_traits<char>::eof()) {
        any = true;
        char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            if (in.peek() == '\n') in.get();
            fields.push_back(std::move(field));
            return true;
        } else if (c == '\n') {
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(c);
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

Table load_csv(const std::string& path, const std::map<std::string, Kind>& schema_hint,
               const std::string& null_token) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    std::vector<std::string> header;
    if (!read_record(in, header) || header.empty()) {
        throw EmptyTable("no header row in " + path);
    }
    const std::size_t m = header.size();

    std::vector<Row> rows;
    std::vector<std::string> fields;
    while (read_record(in, fields)) {
        if (fields.size() == 1 && fields[0].empty() && in.eof()) break;  // trailing newline
        if (fields.size() != m) throw RaggedRow(rows.size() + 1, fields.size(), m);
        Row row;
        row.reserve(m);
        for (auto& f : fields) {
            if (f == null_token) row.emplace_back(std::nullopt);
            else row.emplace_back(std::move(f));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw EmptyTable("no data rows in " + path);

    std::vector<AttributeSpec> attrs(m);
    for (std::size_t j = 0; j < m; ++j) {
        attrs[j].name = header[j];
        attrs[j].null_token = null_token;
        auto hint = schema_hint.find(header[j]);
        if (hint != schema_hint.end()) {
            attrs[j].kind = hint->second;
            continue;
        }
        std::size_t non_null = 0, numeric = 0;
        double v;
        for (const Row& row : rows) {
            if (!row[j]) continue;
            ++non_null;
            if (parse_number(*row[j], v)) ++numeric;
        }
        attrs[j].kind = (non_null > 0 && numeric * 100 >= non_null * 95) ? Kind::numeric
                                                                         : Kind::text;
    }

    std::string name = path;
    if (auto slash = name.find_last_of('/'); slash != std::string::npos) {
        name = name.substr(slash + 1);
    }
    return Table(name, std::move(attrs), std::move(rows));
}

void write_csv(const Table& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t j = 0; j < table.n_cols(); ++j) {
        if (j) out << ',';
        out << csv_escape(table.attribute(j).name);
    }
    out << '\n';
    for (const Row& row : table.rows()) {
        for (std::size_t j = 0; j < table.n_cols(); ++j) {
            if (j) out << ',';
            if (row[j]) out << csv_escape(*row[j]);
            else out << table.attribute(j).null_token;
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing " + path);
}

std::map<std::string, AttributeDomain> build_domains(const Table& table) {
    if (table.n_rows() == 0) throw EmptyTable("cannot profile an empty table");
    std::map<std::string, AttributeDomain> out;
    for (std::size_t j = 0; j < table.n_cols(); ++j) {
        AttributeDomain dom;
        dom.attribute = table.attribute(j).name;
        for (const Row& row : table.rows()) {
            if (!row[j]) continue;
            ++dom.values[*row[j]];
            ++dom.total;
        }
        out.emplace(dom.attribute, std::move(dom));
    }
    return out;
}

std::size_t BinSpec::bin_of(double v) const {
    // edges has bins+1 entries; values outside the observed range clamp to
    // the first/last bin.
    if (labels.empty()) return 0;
    auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, v);
    return static_cast<std::size_t>(it - edges.begin()) - 1;
}

namespace {

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

BinSpec make_bins(std::vector<double> sorted_values, std::size_t bins) {
    BinSpec spec;
    const std::size_t n = sorted_values.size();
    std::vector<double> distinct = sorted_values;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    if (distinct.size() <= bins) {
        // DegenerateColumn: fewer distinct values than bins, keep them as-is.
        for (double v : distinct) {
            spec.edges.push_back(v);
            spec.labels.push_back(format_double(v));
            spec.representatives.push_back(format_double(v));
        }
        spec.edges.push_back(distinct.back() + 1.0);
        return spec;
    }

    // Equal-frequency boundaries at the k/bins quantiles of the sorted
    // multiset, de-duplicated so heavily tied values collapse bins.
    std::vector<double> edges;
    edges.push_back(sorted_values.front());
    for (std::size_t k = 1; k < bins; ++k) {
        edges.push_back(sorted_values[k * n / bins]);
    }
    edges.push_back(sorted_values.back());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    if (edges.size() < 2) edges.push_back(edges.front() + 1.0);

    spec.edges = edges;
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        spec.labels.push_back("[" + format_double(edges[b]) + "," +
                              format_double(edges[b + 1]) + ")");
    }
    // Representative = median of the member values.
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        auto lo = std::lower_bound(sorted_values.begin(), sorted_values.end(), edges[b]);
        auto hi = (b + 2 == edges.size())
                      ? sorted_values.end()
                      : std::lower_bound(sorted_values.begin(), sorted_values.end(), edges[b + 1]);
        if (lo == hi) {
            spec.representatives.push_back(format_double(edges[b]));
        } else {
            spec.representatives.push_back(format_double(*(lo + (hi - lo) / 2)));
        }
    }
    return spec;
}

}  // namespace

DiscretizedTable discretize_numeric(const Table& table, std::size_t bins) {
    if (bins < 2) throw ConfigError("bins must be >= 2");
    DiscretizationMap map;
    for (std::size_t j = 0; j < table.n_cols(); ++j) {
        const auto& attr = table.attribute(j);
        if (attr.kind != Kind::numeric) continue;
        std::vector<double> values;
        double v;
        for (const Row& row : table.rows()) {
            if (row[j] && parse_number(*row[j], v)) values.push_back(v);
        }
        if (values.empty()) continue;
        std::sort(values.begin(), values.end());
        map.emplace(attr.name, make_bins(std::move(values), bins));
    }
    return {apply_discretization(table, map), std::move(map)};
}

Table apply_discretization(const Table& table, const DiscretizationMap& bins) {
    if (bins.empty()) return table;
    std::vector<Row> rows = table.rows();
    std::vector<AttributeSpec> attrs = table.attributes();
    for (std::size_t j = 0; j < attrs.size(); ++j) {
        auto it = bins.find(attrs[j].name);
        if (it == bins.end()) continue;
        const BinSpec& spec = it->second;
        for (Row& row : rows) {
            if (!row[j]) continue;
            double v;
            if (!parse_number(*row[j], v)) {
                row[j] = std::nullopt;  // unparsable numeric cell carries no evidence
                continue;
            }
            row[j] = spec.labels[spec.bin_of(v)];
        }
        attrs[j].kind = Kind::categorical;
    }
    return Table(table.name(), std::move(attrs), std::move(rows));
}

}  // namespace bclean
