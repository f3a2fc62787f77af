#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "bclean/table.hpp"

namespace bclean {

// Binary per-value predicate run as a child process: one escaped value line
// in, one "0"/"1" line out. Lets a UC be any function with a binary output
// without linking arbitrary code.
class ExternalPredicate {
public:
    explicit ExternalPredicate(std::string command);
    ~ExternalPredicate();
    ExternalPredicate(const ExternalPredicate&) = delete;
    ExternalPredicate& operator=(const ExternalPredicate&) = delete;

    bool check(const std::string& value);
    const std::string& command() const { return command_; }

private:
    void spawn();
    std::string command_;
    int child_pid_ = -1;
    int to_child_ = -1;
    void* from_child_ = nullptr;  // FILE*
    std::unique_ptr<std::mutex> mutex_;
};

struct UserConstraint {
    std::string attribute;
    std::optional<std::size_t> min_len, max_len;   // Unicode scalar counts
    std::optional<double> min_val, max_val;        // parsed numeric bounds
    bool allow_null = true;
    std::optional<std::string> pattern;            // fully anchored
    std::shared_ptr<std::regex> compiled_pattern;
    std::shared_ptr<ExternalPredicate> external;
};

struct ConfidenceParams {
    double lambda = 1.0;
    double tau = 0.5;
    double beta = 2.0;
};

using UcSet = std::map<std::string, UserConstraint>;

// 1 iff every present sub-constraint passes; NULL passes iff allow_null.
int uc_check(const UserConstraint& constraint, const Cell& cell);

// Missing constraint for an attribute means "always passes".
int uc_check(const UcSet& ucs, const std::string& attribute, const Cell& cell);

// conf(T) = max{0, (sum 1[UC=1] - lambda * sum 1[UC=0]) / |T|}
double tuple_confidence(const Row& row, const std::vector<std::string>& attribute_names,
                        const UcSet& ucs, const ConfidenceParams& params);

// JSON config: { attribute: {min_len, max_len, min_val, max_val, allow_null,
// pattern, external} }. Attributes absent from `valid_attributes` are
// rejected; pass an empty list to skip that validation.
UcSet load_ucs_json(const std::string& text,
                    const std::vector<std::string>& valid_attributes);
UcSet load_ucs_file(const std::string& path,
                    const std::vector<std::string>& valid_attributes);
std::string ucs_to_json(const UcSet& ucs);

}  // namespace bclean
