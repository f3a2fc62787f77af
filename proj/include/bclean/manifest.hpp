#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace bclean {

inline constexpr const char* kVersion = "0.1.0";

std::string content_hash_hex(const std::string& data);
std::string file_hash_hex(const std::string& path);
std::string read_file(const std::string& path);

// Embedded in every JSON output: content hashes of the declared inputs plus
// the parameters of the invocation, so outputs are reproducible artifacts.
nlohmann::ordered_json make_manifest(
    const std::vector<std::pair<std::string, std::string>>& input_files,
    const nlohmann::ordered_json& params);

}  // namespace bclean
