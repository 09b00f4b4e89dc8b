#include "molstore/trace_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "molstore/error.hpp"

namespace molstore::poresim {

namespace {

constexpr std::array<char, 4> kMagic{'M', 'T', 'R', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename U>
void put_le(std::ostream& out, U v)
{
    char buf[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
    out.write(buf, sizeof(U));
}

template <typename U>
U get_le(std::istream& in, const char* what)
{
    unsigned char buf[sizeof(U)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(U)))
        throw Error(ErrorCategory::Format, std::string("binary trace truncated reading ") + what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
    return v;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        auto next = s.find(sep, pos);
        out.push_back(s.substr(pos, next == std::string_view::npos ? next : next - pos));
        if (next == std::string_view::npos) return out;
        pos = next + 1;
    }
}

std::string format_float(float v)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

const char* closure_name(ClosureKind k) { return k == ClosureKind::Clog ? "clog" : "gate"; }

} // namespace

TraceFormat trace_format_from_name(std::string_view name)
{
    if (name == "text") return TraceFormat::Text;
    if (name == "binary") return TraceFormat::Binary;
    throw Error(ErrorCategory::Config, "format must be text or binary, got '" + std::string(name) + "'");
}

void write_trace_text(std::ostream& out, const CurrentTrace& trace)
{
    const double rate = trace.sample_rate_hz;
    if (!(rate > 0.0) || rate != std::floor(rate) || rate > 9.0e15)
        throw Error(ErrorCategory::Parameter, "text traces need an integral sample rate");
    out << "sample_rate_hz=" << static_cast<std::uint64_t>(rate) << '\n';
    std::string buf;
    for (float s : trace.samples) {
        buf = format_float(s);
        buf += '\n';
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
}

void write_trace_binary(std::ostream& out, const CurrentTrace& trace)
{
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kVersion);
    put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(trace.sample_rate_hz));
    put_le<std::uint64_t>(out, trace.samples.size());
    for (float s : trace.samples) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(s));
}

CurrentTrace read_trace_text(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCategory::Format, "empty trace file");
    std::string_view header = trim(line);
    constexpr std::string_view key = "sample_rate_hz=";
    if (header.substr(0, key.size()) != key)
        throw Error(ErrorCategory::Format, "trace header must be 'sample_rate_hz=<integer>'", 1);
    std::uint64_t rate = 0;
    auto digits = header.substr(key.size());
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), rate);
    if (ec != std::errc() || p != digits.data() + digits.size() || rate == 0)
        throw Error(ErrorCategory::Format, "trace sample rate must be a positive integer", 1);

    CurrentTrace trace;
    trace.sample_rate_hz = static_cast<double>(rate);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        auto v = trim(line);
        if (v.empty()) continue;
        float x = 0.0f;
        auto [q, ec2] = std::from_chars(v.data(), v.data() + v.size(), x);
        if (ec2 != std::errc() || q != v.data() + v.size())
            throw Error(ErrorCategory::Format, "line " + std::to_string(line_no) + ": not a current value",
                        line_no);
        trace.samples.push_back(x);
    }
    return trace;
}

CurrentTrace read_trace_binary(std::istream& in)
{
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic)
        throw Error(ErrorCategory::Format, "missing MTRC magic");
    auto version = get_le<std::uint32_t>(in, "version");
    if (version != kVersion)
        throw Error(ErrorCategory::Format, "unsupported binary trace version " + std::to_string(version));
    CurrentTrace trace;
    trace.sample_rate_hz = std::bit_cast<double>(get_le<std::uint64_t>(in, "sample rate"));
    if (!(trace.sample_rate_hz > 0.0)) throw Error(ErrorCategory::Format, "sample rate must be positive");
    auto count = get_le<std::uint64_t>(in, "sample count");
    trace.samples.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1ull << 28)));
    for (std::uint64_t i = 0; i < count; ++i)
        trace.samples.push_back(std::bit_cast<float>(get_le<std::uint32_t>(in, "samples")));
    return trace;
}

void save_trace(const std::filesystem::path& path, const CurrentTrace& trace, TraceFormat format)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCategory::Io, "cannot write " + path.string());
    if (format == TraceFormat::Text)
        write_trace_text(out, trace);
    else
        write_trace_binary(out, trace);
    if (!out) throw Error(ErrorCategory::Io, "write failed for " + path.string());
}

CurrentTrace load_trace(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCategory::Io, "cannot open " + path.string());
    std::array<char, 4> head{};
    in.read(head.data(), head.size());
    const bool binary = in.gcount() == 4 && head == kMagic;
    in.clear();
    in.seekg(0);
    return binary ? read_trace_binary(in) : read_trace_text(in);
}

void write_ground_truth(std::ostream& out, const kv::KeyValues& header, const Simulation& sim)
{
    using kv::format_double;
    out << header.to_string("# ");
    out << "kind,pore,t_start_s,t_end_s,complete,orientation,levels,durations_us\n";
    for (const auto& c : sim.closures)
        out << closure_name(c.kind) << ',' << c.pore << ',' << format_double(c.start_s) << ','
            << format_double(c.end_s) << ",,,,\n";
    for (const auto& pe : sim.events) {
        const auto& e = pe.event;
        std::string levels, durs;
        for (std::size_t i = 0; i < e.substates.size(); ++i) {
            if (i) {
                levels += ';';
                durs += ';';
            }
            levels += format_double(e.substates[i].level);
            durs += format_double(e.substates[i].duration_us);
        }
        out << "event," << pe.pore << ',' << format_double(e.t_start_s) << ','
            << format_double(e.t_start_s + e.duration_us() * 1e-6) << ',' << (e.complete ? 1 : 0) << ','
            << orientation_name(e.orientation) << ',' << levels << ',' << durs << '\n';
    }
}

GroundTruth read_ground_truth(std::istream& in)
{
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    GroundTruth gt;
    gt.header = kv::KeyValues::parse_header(text);

    std::istringstream lines(text);
    std::string line;
    std::size_t line_no = 0;
    bool seen_columns = false;
    while (std::getline(lines, line)) {
        ++line_no;
        auto l = trim(line);
        if (l.empty() || l.front() == '#') continue;
        if (!seen_columns) {
            seen_columns = true;
            continue;
        }
        auto f = split(l, ',');
        if (f.size() != 8) throw Error(ErrorCategory::Format, "log line " + std::to_string(line_no) + ": expected 8 fields", line_no);
        auto num = [&](std::string_view s) { return kv::parse_double(s, "log line " + std::to_string(line_no)); };
        auto pore = static_cast<std::size_t>(num(f[1]));
        if (f[0] == "clog" || f[0] == "gate") {
            gt.closures.push_back({pore, num(f[2]), num(f[3]), f[0] == "clog" ? ClosureKind::Clog : ClosureKind::Gate});
        } else if (f[0] == "event") {
            TranslocationEvent e;
            e.t_start_s = num(f[2]);
            e.complete = f[4] == "1";
            e.orientation = orientation_from_name(f[5]);
            auto levels = split(f[6], ';');
            auto durs = split(f[7], ';');
            if (levels.size() != durs.size())
                throw Error(ErrorCategory::Format, "log line " + std::to_string(line_no) + ": substate mismatch", line_no);
            for (std::size_t i = 0; i < levels.size(); ++i) e.substates.push_back({num(levels[i]), num(durs[i])});
            gt.events.push_back({pore, std::move(e)});
        } else {
            throw Error(ErrorCategory::Format, "log line " + std::to_string(line_no) + ": unknown kind", line_no);
        }
    }
    return gt;
}

} // namespace molstore::poresim
