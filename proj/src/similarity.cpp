#include "bclean/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace bclean {

std::vector<char32_t> decode_utf8(const std::string& s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = s[i];
        char32_t cp = c;
        std::size_t extra = 0;
        if ((c & 0x80u) == 0) {
            extra = 0;
        } else if ((c & 0xE0u) == 0xC0u) {
            cp = c & 0x1Fu, extra = 1;
        } else if ((c & 0xF0u) == 0xE0u) {
            cp = c & 0x0Fu, extra = 2;
        } else if ((c & 0xF8u) == 0xF0u) {
            cp = c & 0x07u, extra = 3;
        } else {
            out.push_back(c);  // stray byte: keep as its own scalar
            ++i;
            continue;
        }
        if (extra > 0 && i + extra >= s.size()) {
            // truncated sequence
            out.push_back(c);
            ++i;
            continue;
        }
        bool ok = true;
        char32_t acc = cp;
        for (std::size_t k = 1; k <= extra; ++k) {
            unsigned char cc = s[i + k];
            if ((cc & 0xC0u) != 0x80u) {
                ok = false;
                break;
            }
            acc = (acc << 6) | (cc & 0x3Fu);
        }
        if (!ok) {
            out.push_back(c);
            ++i;
            continue;
        }
        out.push_back(acc);
        i += extra + 1;
    }
    return out;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<char32_t> ua = decode_utf8(a);
    std::vector<char32_t> ub = decode_utf8(b);
    if (ua.size() < ub.size()) ua.swap(ub);
    const std::size_t n = ub.size();
    if (n == 0) return ua.size();

    std::vector<std::size_t> prev(n + 1), cur(n + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= ua.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= n; ++j) {
            std::size_t sub = prev[j - 1] + (ua[i - 1] == ub[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        prev.swap(cur);
    }
    return prev[n];
}

double string_similarity(const std::string& a, const std::string& b) {
    const std::size_t la = decode_utf8(a).size();
    const std::size_t lb = decode_utf8(b).size();
    if (la + lb == 0) return 1.0;
    const double sim =
        1.0 - 2.0 * static_cast<double>(edit_distance(a, b)) / static_cast<double>(la + lb);
    return std::clamp(sim, 0.0, 1.0);
}

double numeric_similarity(double a, double b) {
    if (a == b) return 1.0;
    const double denom = (std::fabs(a) + std::fabs(b)) / 2.0;
    if (denom == 0.0) return 1.0;
    const double reldiff = std::fabs(a - b) / denom;
    return 1.0 - std::min(1.0, reldiff);
}

namespace {

double cell_similarity(const Cell& a, const Cell& b, Kind kind) {
    if (!a || !b) return 0.0;  // absence carries no evidence of dependency
    if (kind == Kind::numeric) {
        double x, y;
        if (parse_number(*a, x) && parse_number(*b, y)) return numeric_similarity(x, y);
        return 0.0;
    }
    return string_similarity(*a, *b);
}

}  // namespace

PairFeatureMatrix adjacent_pair_features(const Table& table) {
    const std::size_t n = table.n_rows();
    const std::size_t m = table.n_cols();
    if (n < 2) throw EmptyTable("adjacent_pair_features needs at least 2 rows");

    PairFeatureMatrix features;
    features.n_cols = m;
    features.data.reserve(m * (n - 1) * m);

    // One sweep per attribute: sort row indices by that attribute's value
    // (NULLs last), then emit a full similarity vector per adjacent pair.
    std::vector<std::size_t> order(n);
    for (std::size_t a = 0; a < m; ++a) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        const bool numeric = table.attribute(a).kind == Kind::numeric;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
            const Cell& ci = table.cell(i, a);
            const Cell& cj = table.cell(j, a);
            if (!ci || !cj) return static_cast<bool>(ci) && !cj;  // nulls last
            if (numeric) {
                double x, y;
                const bool px = parse_number(*ci, x);
                const bool py = parse_number(*cj, y);
                if (px && py) return x < y;
                if (px != py) return px;  // unparsable after parsable
            }
            return *ci < *cj;
        });
        for (std::size_t p = 0; p + 1 < n; ++p) {
            const Row& r1 = table.row(order[p]);
            const Row& r2 = table.row(order[p + 1]);
            for (std::size_t k = 0; k < m; ++k) {
                features.data.push_back(
                    cell_similarity(r1[k], r2[k], table.attribute(k).kind));
            }
        }
    }
    return features;
}

void dump_features_csv(const PairFeatureMatrix& features, const Table& table,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t k = 0; k < table.n_cols(); ++k) {
        if (k) out << ',';
        out << table.attribute(k).name;
    }
    out << '\n';
    for (std::size_t i = 0; i < features.n_rows(); ++i) {
        const double* row = features.row(i);
        for (std::size_t k = 0; k < features.n_cols; ++k) {
            if (k) out << ',';
            out << row[k];
        }
        out << '\n';
    }
}

}  // namespace bclean
