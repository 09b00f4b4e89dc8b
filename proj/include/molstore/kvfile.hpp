#pragma once

// Flat key-value text files: one `key = value` per line, '#' starts a comment.
// Calibration tables, chip scenarios and output header blocks all use it.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace molstore::kv {

class KeyValues {
public:
    /// Throws Format (with the line index) on a line without '='.
    static KeyValues parse(std::string_view text);
    static KeyValues load(const std::filesystem::path& path);

    /// Reads the `# key = value` header block that output files carry.
    static KeyValues parse_header(std::string_view text);

    bool contains(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& at(const std::string& key) const;
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;

    /// Comma-separated entries, each a colon-separated tuple of numbers.
    std::vector<std::vector<double>> get_tuples(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const noexcept { return values_; }

    /// Every key name that is not in `known`, for typo reporting.
    std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

    std::string to_string(std::string_view line_prefix = "") const;

private:
    std::map<std::string, std::string> values_;
};

double parse_double(std::string_view text, std::string_view what);
std::string format_double(double v);
std::string format_tuples(const std::vector<std::vector<double>>& tuples);

} // namespace molstore::kv
