#include "stakewatch/kvconfig.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "stakewatch/csv.hpp"
#include "stakewatch/errors.hpp"

namespace stakewatch {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

KvMap parse_lines(std::istream& in, const std::string& origin) {
    KvMap kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << origin << ":" << lineno << ": expected 'key = value', got '" << t << "'";
            throw ConfigError(os.str());
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            std::ostringstream os;
            os << origin << ":" << lineno << ": empty key";
            throw ConfigError(os.str());
        }
        kv.set(key, value);
    }
    return kv;
}

} // namespace

KvMap KvMap::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    return parse_lines(in, path);
}

KvMap KvMap::from_string(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    return parse_lines(in, origin);
}

bool KvMap::has(const std::string& key) const { return entries_.count(key) != 0; }

const std::string& KvMap::get_string(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

std::string KvMap::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double KvMap::get_double(const std::string& key) const {
    const std::string& s = get_string(key);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ConfigError("config key '" + key + "': not a number: '" + s + "'");
    return v;
}

double KvMap::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long long KvMap::get_int(const std::string& key) const {
    const std::string& s = get_string(key);
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ConfigError("config key '" + key + "': not an integer: '" + s + "'");
    return v;
}

long long KvMap::get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool KvMap::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& s = get_string(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("config key '" + key + "': not a boolean: '" + s + "'");
}

void KvMap::set(const std::string& key, const std::string& value) { entries_[key] = value; }
void KvMap::set(const std::string& key, double value) { entries_[key] = format_double(value); }
void KvMap::set(const std::string& key, long long value) { entries_[key] = std::to_string(value); }

void KvMap::validate(const std::set<std::string>& allowed) const {
    for (const auto& [key, value] : entries_) {
        if (!allowed.count(key))
            throw ConfigError("unknown config key: " + key);
    }
}

std::string KvMap::to_string() const {
    std::ostringstream os;
    for (const auto& [key, value] : entries_) os << key << " = " << value << "\n";
    return os.str();
}

void KvMap::write_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << to_string();
    out.flush();
    if (!out) throw IoError("write failure: " + path);
}

} // namespace stakewatch
