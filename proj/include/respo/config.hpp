#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace respo {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat dotted-key configuration: one `key = value` pair per line, `#` starts
// a comment. Keys keep their own error context (line numbers) for
// diagnostics.
class Config {
public:
    Config() = default;

    static Config from_string(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        cfg.origin_ = origin;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
            std::string key = trim(trimmed.substr(0, eq));
            std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (cfg.values_.count(key))
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
            cfg.values_[key] = value;
            cfg.lines_[key] = lineno;
        }
        return cfg;
    }

    static Config from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return from_string(ss.str(), path);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }
    std::string require_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError(origin_ + ": missing required key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_double(key, it->second);
    }
    long get_long(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_long(key, it->second);
    }
    int get_int(const std::string& key, int fallback) const { return static_cast<int>(get_long(key, fallback)); }
    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError(context(key) + ": expected true/false, got '" + it->second + "'");
    }

    std::vector<std::uint64_t> get_u64_list(const std::string& key, std::vector<std::uint64_t> fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<std::uint64_t> out;
        std::istringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            try {
                out.push_back(std::stoull(tok));
            } catch (const std::exception&) {
                throw ConfigError(context(key) + ": bad integer '" + tok + "'");
            }
        }
        return out;
    }

    // Pairs like "1,2;3,4" -> {(1,2),(3,4)}; triples allow a trailing ":mag".
    std::vector<std::vector<double>> get_tuple_list(const std::string& key) const {
        std::vector<std::vector<double>> out;
        auto it = values_.find(key);
        if (it == values_.end()) return out;
        std::istringstream groups(it->second);
        std::string group;
        while (std::getline(groups, group, ';')) {
            group = trim(group);
            if (group.empty()) continue;
            std::vector<double> tup;
            std::string head = group;
            auto colon = group.find(':');
            if (colon != std::string::npos) head = group.substr(0, colon);
            std::istringstream parts(head);
            std::string p;
            while (std::getline(parts, p, ',')) tup.push_back(parse_double(key, trim(p)));
            if (colon != std::string::npos) tup.push_back(parse_double(key, trim(group.substr(colon + 1))));
            out.push_back(tup);
        }
        return out;
    }

    // Rejects keys outside the known prefix set with their line numbers.
    void check_known_keys(const std::vector<std::string>& known_prefixes) const {
        for (const auto& [key, value] : values_) {
            bool ok = false;
            for (const auto& p : known_prefixes)
                if (key == p || (key.rfind(p, 0) == 0 && key.size() > p.size() && key[p.size()] == '.')) ok = true;
            if (!ok)
                throw ConfigError(context(key) + ": unknown key '" + key + "'");
        }
    }

    const std::map<std::string, std::string>& values() const { return values_; }
    const std::string& origin() const { return origin_; }

private:
    static std::string trim(const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        std::size_t e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    std::string context(const std::string& key) const {
        auto it = lines_.find(key);
        return origin_ + ":" + (it == lines_.end() ? "?" : std::to_string(it->second));
    }

    double parse_double(const std::string& key, const std::string& v) const {
        try {
            std::size_t pos = 0;
            double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ConfigError(context(key) + ": bad number '" + v + "' for key '" + key + "'");
        }
    }
    long parse_long(const std::string& key, const std::string& v) const {
        try {
            std::size_t pos = 0;
            long x = std::stol(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ConfigError(context(key) + ": bad integer '" + v + "' for key '" + key + "'");
        }
    }

    std::string origin_ = "<empty>";
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
};

}  // namespace respo
