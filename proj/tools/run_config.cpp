#include "run_config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

const std::map<std::string, std::string>& RunConfig::defaults() {
    // Hyperparameter defaults follow the small WikiText-2 recipe.
    static const std::map<std::string, std::string> table = {
        {"vocab_max_size", "0"},
        {"input_dim", "100"},
        {"context_dim", "100"},
        {"hidden_size", "200"},
        {"extension", "false"},
        {"weighting", "uniform"},
        {"alpha", "1.05"},
        {"k_history", "100"},
        {"epochs", "75"},
        {"batch_size", "20"},
        {"unroll_steps", "35"},
        {"learning_rate", "1"},
        {"decay_rate", "0.8"},
        {"decay_start_epoch", "6"},
        {"clip_norm", "5"},
        {"dropout", "0.5"},
        {"init_range", "0.05"},
        {"mode", "sentence"},
        {"seed", "1"},
        {"lambda", "1"},
        {"top_n", "10"},
        {"pretrain_input", "true"},
        {"pretrain_context", "true"},
        {"run_dir", "."},
    };
    return table;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw ConfigError("cannot open config file: " + path);
    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              " is not key=value: " + path);
        config.values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return config;
}

void RunConfig::set_pair(const std::string& pair) {
    std::size_t eq = pair.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got: " + pair);
    values_[trim(pair.substr(0, eq))] = trim(pair.substr(eq + 1));
}

bool RunConfig::has(const std::string& key) const {
    return values_.count(key) > 0 || defaults().count(key) > 0;
}

std::string RunConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    auto def = defaults().find(key);
    if (def != defaults().end()) return def->second;
    throw ConfigError("missing required config key: " + key);
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    auto def = defaults().find(key);
    if (def != defaults().end()) return def->second;
    return fallback;
}

long RunConfig::get_int(const std::string& key, long fallback) const {
    std::string v = get(key, std::to_string(fallback));
    try {
        std::size_t used = 0;
        long parsed = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not an integer: " + v);
    }
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    std::ostringstream fb;
    fb << fallback;
    std::string v = get(key, fb.str());
    try {
        std::size_t used = 0;
        double parsed = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not a number: " + v);
    }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
    std::string v = get(key, fallback ? "true" : "false");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "' is not a boolean: " + v);
}

std::string RunConfig::dump(const std::string& subcommand) const {
    std::map<std::string, std::string> merged = defaults();
    for (const auto& [k, v] : values_) merged[k] = v;
    std::ostringstream out;
    out << "# effective configuration (" << subcommand << ")\n";
    for (const auto& [k, v] : merged) out << k << " = " << v << '\n';
    return out.str();
}

void RunConfig::require_keys(const std::vector<std::string>& keys) const {
    for (const std::string& key : keys)
        if (values_.count(key) == 0 && defaults().count(key) == 0)
            throw ConfigError("missing required config key: " + key);
}

void RunConfig::require_paths(const std::vector<std::string>& keys) const {
    require_keys(keys);
    for (const std::string& key : keys) {
        const std::string path = get(key);
        if (!std::filesystem::exists(path))
            throw ConfigError("config key '" + key + "' points to a missing path: " + path);
    }
}
