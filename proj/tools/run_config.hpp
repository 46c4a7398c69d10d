#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

// Flat key=value configuration with '#' comments. Command-line --set
// overrides replace file values; unset keys fall back to the built-in
// defaults table. The effective (defaults-resolved) view can be dumped and
// re-run to reproduce a result exactly.
class RunConfig {
public:
    static RunConfig from_file(const std::string& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    // "key=value" form used by --set.
    void set_pair(const std::string& pair);

    bool has(const std::string& key) const;

    std::string get(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    long get_int(const std::string& key, long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Every key=value this run resolves to, defaults included, sorted.
    std::string dump(const std::string& subcommand) const;

    // Paths listed here must exist before any compute starts.
    void require_paths(const std::vector<std::string>& keys) const;
    void require_keys(const std::vector<std::string>& keys) const;

    static const std::map<std::string, std::string>& defaults();

private:
    std::map<std::string, std::string> values_;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
