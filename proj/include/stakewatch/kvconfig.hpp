#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace stakewatch {

// Structured key-value text format used for config files and run manifests:
// one "key = value" pair per line, '#' starts a comment, keys are dotted
// paths. Parsing is strict; unknown keys are rejected by validate().
class KvMap {
public:
    KvMap() = default;

    static KvMap from_file(const std::string& path);
    static KvMap from_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const;
    const std::string& get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long long value);

    // Rejects keys outside the allowed set (ConfigError naming the key).
    void validate(const std::set<std::string>& allowed) const;

    void write_file(const std::string& path) const;
    std::string to_string() const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

} // namespace stakewatch
