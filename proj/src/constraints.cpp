#include "bclean/constraints.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

#include "bclean/similarity.hpp"
#include "json.hpp"

namespace bclean {

ExternalPredicate::ExternalPredicate(std::string command)
    : command_(std::move(command)), mutex_(std::make_unique<std::mutex>()) {}

ExternalPredicate::~ExternalPredicate() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_) std::fclose(static_cast<std::FILE*>(from_child_));
    if (child_pid_ > 0) {
        int status = 0;
        ::waitpid(child_pid_, &status, 0);
    }
}

void ExternalPredicate::spawn() {
    int in_pipe[2], out_pipe[2];
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) {
        throw ConfigError("cannot create pipes for external UC: " + command_);
    }
    pid_t pid = ::fork();
    if (pid < 0) throw ConfigError("cannot fork external UC: " + command_);
    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        ::execl("/bin/sh", "sh", "-c", command_.c_str(), nullptr);
        _exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    child_pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = ::fdopen(out_pipe[0], "r");
    if (!from_child_) throw ConfigError("cannot open pipe for external UC: " + command_);
}

bool ExternalPredicate::check(const std::string& value) {
    std::lock_guard<std::mutex> lock(*mutex_);
    if (child_pid_ < 0) spawn();

    // Line protocol: newlines and backslashes in the value are escaped so one
    // value is always one line.
    std::string line;
    line.reserve(value.size() + 1);
    for (char c : value) {
        if (c == '\\') line += "\\\\";
        else if (c == '\n') line += "\\n";
        else line.push_back(c);
    }
    line.push_back('\n');
    if (::write(to_child_, line.data(), line.size()) != static_cast<ssize_t>(line.size())) {
        throw ConfigError("external UC pipe closed: " + command_);
    }

    char buf[64];
    if (!std::fgets(buf, sizeof(buf), static_cast<std::FILE*>(from_child_))) {
        throw ConfigError("external UC produced no reply: " + command_);
    }
    return buf[0] == '1';
}

int uc_check(const UserConstraint& c, const Cell& cell) {
    if (!cell) return c.allow_null ? 1 : 0;
    const std::string& v = *cell;

    if (c.min_len || c.max_len) {
        const std::size_t len = decode_utf8(v).size();
        if (c.min_len && len < *c.min_len) return 0;
        if (c.max_len && len > *c.max_len) return 0;
    }
    if (c.min_val || c.max_val) {
        double num;
        if (!parse_number(v, num)) return 0;
        if (c.min_val && num < *c.min_val) return 0;
        if (c.max_val && num > *c.max_val) return 0;
    }
    if (c.compiled_pattern && !std::regex_match(v, *c.compiled_pattern)) return 0;
    if (c.external && !c.external->check(v)) return 0;
    return 1;
}

int uc_check(const UcSet& ucs, const std::string& attribute, const Cell& cell) {
    auto it = ucs.find(attribute);
    if (it == ucs.end()) return 1;
    return uc_check(it->second, cell);
}

double tuple_confidence(const Row& row, const std::vector<std::string>& attribute_names,
                        const UcSet& ucs, const ConfidenceParams& params) {
    if (row.empty() || row.size() != attribute_names.size()) {
        throw ShapeMismatch("tuple_confidence: row/attribute mismatch");
    }
    std::size_t pass = 0, fail = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (uc_check(ucs, attribute_names[j], row[j])) ++pass;
        else ++fail;
    }
    const double conf = (static_cast<double>(pass) - params.lambda * static_cast<double>(fail)) /
                        static_cast<double>(row.size());
    return std::max(0.0, conf);
}

namespace {

UserConstraint parse_constraint(const std::string& attr, const nlohmann::json& j) {
    UserConstraint c;
    c.attribute = attr;
    for (const auto& [key, value] : j.items()) {
        if (key == "min_len") c.min_len = value.get<std::size_t>();
        else if (key == "max_len") c.max_len = value.get<std::size_t>();
        else if (key == "min_val") c.min_val = value.get<double>();
        else if (key == "max_val") c.max_val = value.get<double>();
        else if (key == "allow_null") c.allow_null = value.get<bool>();
        else if (key == "pattern") c.pattern = value.get<std::string>();
        else if (key == "external") c.external = std::make_shared<ExternalPredicate>(value.get<std::string>());
        else throw ConfigError("unknown UC field '" + key + "' for attribute " + attr);
    }
    if (c.min_len && c.max_len && *c.min_len > *c.max_len) {
        throw ConfigError("min_len > max_len for attribute " + attr);
    }
    if (c.min_val && c.max_val && *c.min_val > *c.max_val) {
        throw ConfigError("min_val > max_val for attribute " + attr);
    }
    if (c.pattern) {
        try {
            c.compiled_pattern = std::make_shared<std::regex>(*c.pattern);
        } catch (const std::regex_error& e) {
            throw ConfigError("bad pattern for attribute " + attr + ": " + e.what());
        }
    }
    return c;
}

}  // namespace

UcSet load_ucs_json(const std::string& text,
                    const std::vector<std::string>& valid_attributes) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad UC config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("UC config must be a JSON object");

    UcSet ucs;
    for (const auto& [attr, spec] : j.items()) {
        if (!valid_attributes.empty() &&
            std::find(valid_attributes.begin(), valid_attributes.end(), attr) ==
                valid_attributes.end()) {
            throw ConfigError("UC config references unknown attribute: " + attr);
        }
        ucs.emplace(attr, parse_constraint(attr, spec));
    }
    return ucs;
}

UcSet load_ucs_file(const std::string& path,
                    const std::vector<std::string>& valid_attributes) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load_ucs_json(buf.str(), valid_attributes);
}

std::string ucs_to_json(const UcSet& ucs) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [attr, c] : ucs) {
        nlohmann::ordered_json spec = nlohmann::ordered_json::object();
        if (c.min_len) spec["min_len"] = *c.min_len;
        if (c.max_len) spec["max_len"] = *c.max_len;
        if (c.min_val) spec["min_val"] = *c.min_val;
        if (c.max_val) spec["max_val"] = *c.max_val;
        if (!c.allow_null) spec["allow_null"] = false;
        if (c.pattern) spec["pattern"] = *c.pattern;
        if (c.external) spec["external"] = c.external->command();
        j[attr] = spec;
    }
    return j.dump(2) + "\n";
}

}  // namespace bclean
