#include "molstore/kvfile.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "molstore/error.hpp"

namespace molstore::kv {

namespace {

std::string_view trim(std::string_view s)
{
    auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        auto next = s.find(sep, pos);
        out.push_back(trim(s.substr(pos, next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

KeyValues parse_lines(std::string_view text, bool header_only)
{
    KeyValues kvs;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? end : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;

        if (header_only) {
            if (line.empty() || line.front() != '#') break;
            line.remove_prefix(1);
        } else {
            auto hash = line.find('#');
            if (hash != std::string_view::npos) line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            if (header_only) continue;
            throw Error(ErrorCategory::Format,
                        "line " + std::to_string(line_no) + ": expected 'key = value'",
                        line_no);
        }
        auto key = trim(line.substr(0, eq));
        if (key.empty())
            throw Error(ErrorCategory::Format,
                        "line " + std::to_string(line_no) + ": empty key", line_no);
        kvs.set(std::string(key), std::string(trim(line.substr(eq + 1))));
    }
    return kvs;
}

} // namespace

double parse_double(std::string_view text, std::string_view what)
{
    text = trim(text);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        throw Error(ErrorCategory::Format,
                    std::string(what) + ": not a number: '" + std::string(text) + "'");
    return v;
}

std::string format_double(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string format_tuples(const std::vector<std::vector<double>>& tuples)
{
    std::string out;
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        if (i) out += ", ";
        for (std::size_t j = 0; j < tuples[i].size(); ++j) {
            if (j) out += ':';
            out += format_double(tuples[i][j]);
        }
    }
    return out;
}

KeyValues KeyValues::parse(std::string_view text) { return parse_lines(text, false); }

KeyValues KeyValues::parse_header(std::string_view text) { return parse_lines(text, true); }

KeyValues KeyValues::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCategory::Io, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const std::string& KeyValues::at(const std::string& key) const
{
    auto it = values_.find(key);
    if (it == values_.end()) throw Error(ErrorCategory::Config, "missing key '" + key + "'");
    return it->second;
}

double KeyValues::get_double(const std::string& key) const
{
    return parse_double(at(key), key);
}

long long KeyValues::get_int(const std::string& key) const
{
    auto text = trim(at(key));
    long long v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        // Accept integral values written in floating notation (1e6).
        double d = parse_double(text, key);
        if (d != static_cast<double>(static_cast<long long>(d)))
            throw Error(ErrorCategory::Format, key + ": not an integer: '" + std::string(text) + "'");
        return static_cast<long long>(d);
    }
    return v;
}

std::vector<std::vector<double>> KeyValues::get_tuples(const std::string& key) const
{
    std::vector<std::vector<double>> out;
    const auto& text = at(key);
    if (trim(text).empty()) return out;
    for (auto entry : split(text, ',')) {
        std::vector<double> tuple;
        for (auto field : split(entry, ':')) tuple.push_back(parse_double(field, key));
        out.push_back(std::move(tuple));
    }
    return out;
}

std::vector<std::string> KeyValues::unknown_keys(const std::vector<std::string>& known) const
{
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        if (std::find(known.begin(), known.end(), k) == known.end()) out.push_back(k);
    return out;
}

std::string KeyValues::to_string(std::string_view line_prefix) const
{
    std::string out;
    for (const auto& [k, v] : values_) {
        out += line_prefix;
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    }
    return out;
}

} // namespace molstore::kv
