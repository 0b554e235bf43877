#pragma once

// Glue between CLI11 options and the flat `key = value` config file.
// Command-line flags always win; a config value is applied only to options
// the user did not pass. Keys are the long flag names without the leading
// dashes; keys a subcommand does not define are ignored so one config file
// can drive the whole pipeline as well as the individual stages.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rbmc/errors.hpp"

namespace rbmctool {

inline std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return std::string(s);
}

/// Parses a flat config file: `key = value` lines, '#' comments, blank
/// lines allowed.
inline std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw rbmc::InvalidConfig("cannot open config file: " + path.string());
    std::map<std::string, std::string> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw rbmc::InvalidConfig(path.string() + ":" + std::to_string(lineno) +
                                      ": expected key = value");
        }
        const std::string key = trim(std::string_view(stripped).substr(0, eq));
        const std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty()) {
            throw rbmc::InvalidConfig(path.string() + ":" + std::to_string(lineno) +
                                      ": empty key");
        }
        entries[key] = value;
    }
    return entries;
}

template <typename T>
void value_from_string(const std::string& text, T& out, const std::string& key) {
    if constexpr (std::is_same_v<T, std::string>) {
        out = text;
    } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
        out = std::filesystem::path(text);
    } else if constexpr (std::is_same_v<T, bool>) {
        if (text == "true" || text == "1" || text == "yes") out = true;
        else if (text == "false" || text == "0" || text == "no") out = false;
        else throw rbmc::InvalidConfig("config key '" + key + "': bad boolean '" + text + "'");
    } else if constexpr (std::is_floating_point_v<T>) {
        const char* last = text.data() + text.size();
        const auto res = std::from_chars(text.data(), last, out);
        if (res.ec != std::errc{} || res.ptr != last) {
            throw rbmc::InvalidConfig("config key '" + key + "': bad number '" + text + "'");
        }
    } else {
        static_assert(std::is_integral_v<T>);
        const char* last = text.data() + text.size();
        const auto res = std::from_chars(text.data(), last, out);
        if (res.ec != std::errc{} || res.ptr != last) {
            throw rbmc::InvalidConfig("config key '" + key + "': bad integer '" + text + "'");
        }
    }
}

template <typename T>
void value_from_string(const std::string& text, std::optional<T>& out, const std::string& key) {
    T value{};
    value_from_string(text, value, key);
    out = value;
}

class ConfigBinder {
public:
    explicit ConfigBinder(CLI::App* cmd) : cmd_(cmd) {
        cmd->add_option("--config", config_path_,
                        "flat key = value config file; command-line flags override");
    }

    template <typename T>
    CLI::Option* add(const std::string& flag, T& var, const std::string& desc) {
        CLI::Option* opt = cmd_->add_option(flag, var, desc);
        bindings_[flag.substr(2)] = {opt, [&var, flag](const std::string& text) {
                                         value_from_string(text, var, flag.substr(2));
                                     }};
        return opt;
    }

    CLI::Option* add_flag(const std::string& flag, bool& var, const std::string& desc) {
        CLI::Option* opt = cmd_->add_flag(flag, var, desc);
        bindings_[flag.substr(2)] = {opt, [&var, flag](const std::string& text) {
                                         value_from_string(text, var, flag.substr(2));
                                     }};
        return opt;
    }

    /// Declares keys that are alternatives of one logical choice: when any
    /// of them appears on the command line, none of them is taken from the
    /// config file (e.g. the three stop-rule options).
    void exclusive_group(std::vector<std::string> keys) { groups_.push_back(std::move(keys)); }

    /// Applies config-file values to options not set on the command line.
    void apply() const {
        if (config_path_.empty()) return;
        std::set<std::string> suppressed;
        for (const auto& group : groups_) {
            const bool any_on_cli = std::any_of(group.begin(), group.end(),
                                                [this](const std::string& key) {
                                                    const auto it = bindings_.find(key);
                                                    return it != bindings_.end() &&
                                                           it->second.option->count() > 0;
                                                });
            if (any_on_cli) suppressed.insert(group.begin(), group.end());
        }
        for (const auto& [key, value] : read_config_file(config_path_)) {
            const auto it = bindings_.find(key);
            if (it == bindings_.end()) continue;  // not used by this subcommand
            if (suppressed.count(key)) continue;
            if (it->second.option->count() == 0) it->second.setter(value);
        }
    }

private:
    struct Binding {
        CLI::Option* option = nullptr;
        std::function<void(const std::string&)> setter;
    };

    CLI::App* cmd_;
    std::filesystem::path config_path_;
    std::map<std::string, Binding> bindings_;
    std::vector<std::vector<std::string>> groups_;
};

/// Comma-separated list of thresholds for --sweep.
inline std::vector<double> parse_sweep_list(const std::string& text) {
    std::vector<double> thetas;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t pos = text.find(',', start);
        const std::string token =
            trim(text.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (token.empty()) throw rbmc::InvalidConfig("--sweep: empty threshold entry");
        double value = 0.0;
        value_from_string(token, value, "sweep");
        thetas.push_back(value);
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    if (thetas.empty()) throw rbmc::InvalidConfig("--sweep: no thresholds given");
    return thetas;
}

}  // namespace rbmctool
