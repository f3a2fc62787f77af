#include "bclean/compensatory.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace bclean {

namespace {

std::uint64_t fnv1a64_bytes(const void* data, std::size_t len, std::uint64_t h) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s, std::uint64_t h) {
    return fnv1a64_bytes(s.data(), s.size(), h);
}

}  // namespace

CorrTable::CorrTable(std::vector<std::string> attribute_names, std::size_t n_rows)
    : attrs_(std::move(attribute_names)), n_rows_(n_rows) {
    values_.resize(attrs_.size());
    dicts_.resize(attrs_.size());
    pairs_.resize(attrs_.size() * attrs_.size());
}

std::int32_t CorrTable::value_id(std::size_t attr, const std::string& value) const {
    const auto& d = dicts_.at(attr);
    auto it = d.find(value);
    return it == d.end() ? -1 : it->second;
}

std::int32_t CorrTable::intern(std::size_t attr, const std::string& value) {
    auto& d = dicts_.at(attr);
    auto it = d.find(value);
    if (it != d.end()) return it->second;
    const std::int32_t id = static_cast<std::int32_t>(values_[attr].size());
    values_[attr].push_back(value);
    d.emplace(value, id);
    return id;
}

double CorrTable::raw_count(std::size_t attr_j, std::int32_t c, std::size_t attr_k,
                            std::int32_t e) const {
    if (c < 0 || e < 0) return 0.0;
    const auto& map = pairs_.at(attr_j * attrs_.size() + attr_k);
    auto it = map.find(pair_key(c, e));
    return it == map.end() ? 0.0 : it->second;
}

void CorrTable::add(std::size_t attr_j, std::int32_t c, std::size_t attr_k, std::int32_t e,
                    double delta) {
    pairs_.at(attr_j * attrs_.size() + attr_k)[pair_key(c, e)] += delta;
}

std::size_t CorrTable::entry_count() const {
    std::size_t n = 0;
    for (const auto& m : pairs_) n += m.size();
    return n;
}

void CorrTable::shrink_to_top(std::size_t keep_per_pair) {
    keep_per_pair = std::max<std::size_t>(1, keep_per_pair);
    for (auto& map : pairs_) {
        if (map.size() <= keep_per_pair) continue;
        std::vector<std::pair<std::uint64_t, double>> entries(map.begin(), map.end());
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            const double ma = std::abs(a.second), mb = std::abs(b.second);
            if (ma != mb) return ma > mb;
            return a.first < b.first;
        });
        entries.resize(keep_per_pair);
        map.clear();
        for (const auto& [k, v] : entries) map.emplace(k, v);
    }
}

CorrTable build_corr(const Table& table, const UcSet& ucs, const ConfidenceParams& params,
                     const CorrBuildOptions& options) {
    std::vector<std::string> names;
    for (const auto& a : table.attributes()) names.push_back(a.name);
    CorrTable corr(names, table.n_rows());
    const std::size_t m = names.size();
    if (m < 2) return corr;

    std::vector<std::int32_t> ids(m);
    std::size_t check_counter = 0;
    for (const Row& row : table.rows()) {
        const double conf = tuple_confidence(row, names, ucs, params);
        const double delta = conf >= params.tau ? 1.0 : -params.beta;
        for (std::size_t j = 0; j < m; ++j) {
            ids[j] = row[j] ? corr.intern(j, *row[j]) : -1;
        }
        for (std::size_t j = 0; j < m; ++j) {
            if (ids[j] < 0) continue;  // NULL cells contribute no entries
            for (std::size_t k = 0; k < m; ++k) {
                if (k == j || ids[k] < 0) continue;
                corr.add(j, ids[j], k, ids[k], delta);
            }
        }
        if (++check_counter % 1024 == 0 && corr.entry_count() > options.max_entries) {
            corr.shrink_to_top(options.max_entries / (m * (m - 1)));
        }
    }
    if (corr.entry_count() > options.max_entries) {
        corr.shrink_to_top(options.max_entries / (m * (m - 1)));
    }
    return corr;
}

double score_corr_ids(const CorrTable& corr, std::size_t attr_j, std::int32_t c_id,
                      const std::vector<std::int32_t>& evidence_ids) {
    if (c_id < 0 || corr.n_rows() == 0) return 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < evidence_ids.size(); ++k) {
        if (k == attr_j || evidence_ids[k] < 0) continue;
        total += corr.raw_count(attr_j, c_id, k, evidence_ids[k]);
    }
    return total / static_cast<double>(corr.n_rows());
}

double score_corr(const CorrTable& corr, const std::string& c, const Row& tuple_obs,
                  std::size_t attr_j) {
    std::vector<std::int32_t> evidence(tuple_obs.size(), -1);
    for (std::size_t k = 0; k < tuple_obs.size(); ++k) {
        if (k == attr_j || !tuple_obs[k]) continue;
        evidence[k] = corr.value_id(k, *tuple_obs[k]);
    }
    return score_corr_ids(corr, attr_j, corr.value_id(attr_j, c), evidence);
}

std::vector<double> corr_to_weight(const std::vector<double>& scores) {
    if (scores.empty()) throw ConfigError("corr_to_weight needs at least one candidate");
    constexpr double eps = 1e-9;
    const double mn = *std::min_element(scores.begin(), scores.end());
    double total = 0.0;
    std::vector<double> w(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        w[i] = scores[i] - mn + eps;
        total += w[i];
    }
    for (double& x : w) x /= total;
    return w;
}

std::string corr_cache_key(const Table& table, const std::string& ucs_text,
                           const ConfidenceParams& params) {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& a : table.attributes()) h = fnv1a64(a.name, h);
    for (const Row& row : table.rows()) {
        for (const Cell& c : row) {
            h = fnv1a64(c ? "v" : "n", h);
            if (c) h = fnv1a64(*c, h);
        }
    }
    h = fnv1a64(ucs_text, h);
    h = fnv1a64_bytes(&params.lambda, sizeof(double), h);
    h = fnv1a64_bytes(&params.tau, sizeof(double), h);
    h = fnv1a64_bytes(&params.beta, sizeof(double), h);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {
constexpr char kCorrMagic[8] = {'B', 'C', 'C', 'O', 'R', 'R', '0', '1'};

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void get(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}
void put_string(std::ofstream& out, const std::string& s) {
    put<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::string get_string(std::ifstream& in) {
    std::uint64_t len = 0;
    get(in, len);
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    return s;
}
}  // namespace

void save_corr_binary(const CorrTable& corr, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(kCorrMagic, sizeof(kCorrMagic));
    put<std::uint64_t>(out, corr.attrs_.size());
    put<std::uint64_t>(out, corr.n_rows_);
    for (const auto& name : corr.attrs_) put_string(out, name);
    for (const auto& values : corr.values_) {
        put<std::uint64_t>(out, values.size());
        for (const auto& v : values) put_string(out, v);
    }
    for (const auto& map : corr.pairs_) {
        put<std::uint64_t>(out, map.size());
        std::vector<std::pair<std::uint64_t, double>> entries(map.begin(), map.end());
        std::sort(entries.begin(), entries.end());
        for (const auto& [k, v] : entries) {
            put(out, k);
            put(out, v);
        }
    }
    if (!out) throw IoError("failed writing " + path);
}

CorrTable load_corr_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCorrMagic, sizeof(magic)) != 0) {
        throw IoError("not a corr cache file: " + path);
    }
    std::uint64_t m = 0, n_rows = 0;
    get(in, m);
    get(in, n_rows);
    std::vector<std::string> names;
    for (std::uint64_t i = 0; i < m; ++i) names.push_back(get_string(in));
    CorrTable corr(names, n_rows);
    for (std::uint64_t i = 0; i < m; ++i) {
        std::uint64_t count = 0;
        get(in, count);
        for (std::uint64_t v = 0; v < count; ++v) corr.intern(i, get_string(in));
    }
    for (auto& map : corr.pairs_) {
        std::uint64_t count = 0;
        get(in, count);
        for (std::uint64_t e = 0; e < count; ++e) {
            std::uint64_t key = 0;
            double value = 0.0;
            get(in, key);
            get(in, value);
            map.emplace(key, value);
        }
    }
    if (!in) throw IoError("truncated corr cache: " + path);
    return corr;
}

}  // namespace bclean
