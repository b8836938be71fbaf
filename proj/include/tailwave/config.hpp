#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tailwave {

// Flat key = value configuration with dotted sections, '#' comments and a
// canonical resolved form whose FNV-1a hash stamps every output file.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text, const std::string& origin = "<text>");

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_double_list(const std::string& key) const; // comma separated

    // keys sharing a dotted prefix, e.g. section("measure") -> measure.*
    std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

    // canonical "key = value" lines, sorted; hash of that text
    std::string resolved() const;
    std::string hash() const;

    void set(const std::string& key, const std::string& value);
    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
    std::string origin_;
};

} // namespace tailwave
