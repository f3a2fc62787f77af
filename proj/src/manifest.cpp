#include "bclean/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bclean/errors.hpp"

namespace bclean {

namespace {

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::string content_hash_hex(const std::string& data) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string file_hash_hex(const std::string& path) {
    return content_hash_hex(read_file(path));
}

nlohmann::ordered_json make_manifest(
    const std::vector<std::pair<std::string, std::string>>& input_files,
    const nlohmann::ordered_json& params) {
    nlohmann::ordered_json m;
    m["version"] = kVersion;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    for (const auto& [name, path] : input_files) inputs[name] = file_hash_hex(path);
    m["inputs"] = inputs;
    m["params"] = params;
    return m;
}

}  // namespace bclean
