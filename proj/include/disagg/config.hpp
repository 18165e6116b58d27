#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace disagg {

// Flat dotted-key configuration, e.g.
//   model.M = 2
//   mcmc.iters = 10000
// '#' starts a comment; whitespace around keys and values is trimmed.
class Config {
public:
    Config() = default;

    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    std::string get_str(const std::string& key, const std::string& dflt) const;
    std::string require_str(const std::string& key) const;
    double get_double(const std::string& key, double dflt) const;
    long get_long(const std::string& key, long dflt) const;
    bool get_bool(const std::string& key, bool dflt) const;

    // canonical serialized form (sorted keys), used for fingerprinting
    std::string canonical() const;
    std::uint64_t fingerprint() const;

    const std::map<std::string, std::string>& items() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

}  // namespace disagg
