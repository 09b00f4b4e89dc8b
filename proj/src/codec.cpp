#include "molstore/codec.hpp"

#include <cmath>
#include <string>

#include "molstore/error.hpp"

namespace molstore::codec {

namespace {

std::string_view trim_line(std::string_view text)
{
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r'))
        text.remove_suffix(1);
    return text;
}

std::size_t nominal_for(const RunLengthScheme& s, Nucleotide base)
{
    return base == s.zero_base() ? s.zero_run() : s.one_run();
}

} // namespace

char to_char(Nucleotide n) noexcept
{
    static constexpr char table[] = {'A', 'C', 'G', 'T'};
    return table[static_cast<std::uint8_t>(n) & 3u];
}

Nucleotide nucleotide_from_char(char c)
{
    switch (c) {
    case 'A': return Nucleotide::A;
    case 'C': return Nucleotide::C;
    case 'G': return Nucleotide::G;
    case 'T': return Nucleotide::T;
    default:
        throw Error(ErrorCategory::Alphabet,
                    std::string("not a nucleotide: '") + c + "'");
    }
}

std::string BaseSequence::to_string() const
{
    std::string out;
    out.reserve(bases_.size());
    for (auto b : bases_) out.push_back(to_char(b));
    return out;
}

BaseSequence BaseSequence::parse(std::string_view text)
{
    text = trim_line(text);
    std::vector<Nucleotide> bases;
    bases.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c != 'A' && c != 'C' && c != 'G' && c != 'T')
            throw Error(ErrorCategory::Alphabet,
                        "invalid sequence character at position " + std::to_string(i), i);
        bases.push_back(nucleotide_from_char(c));
    }
    return BaseSequence(std::move(bases));
}

std::vector<Run> runs(const BaseSequence& seq)
{
    std::vector<Run> out;
    for (auto b : seq.bases()) {
        if (!out.empty() && out.back().base == b)
            ++out.back().length;
        else
            out.push_back({b, 1});
    }
    return out;
}

RunLengthScheme::RunLengthScheme(Nucleotide zero_base, std::size_t zero_run,
                                 Nucleotide one_base, std::size_t one_run)
    : zero_base_(zero_base), zero_run_(zero_run), one_base_(one_base), one_run_(one_run)
{
    if (zero_base == one_base)
        throw Error(ErrorCategory::Config, "run-length scheme needs two distinct bases");
    if (zero_run == 0 || one_run == 0)
        throw Error(ErrorCategory::Config, "run-length scheme run lengths must be >= 1");
}

RunLengthScheme RunLengthScheme::default_scheme()
{
    return {Nucleotide::A, 20, Nucleotide::C, 30};
}

RunLengthScheme RunLengthScheme::parse(std::string_view text)
{
    auto colon = text.find(':');
    auto bad = [&] {
        return Error(ErrorCategory::Config,
                     "scheme must look like A20:C30, got '" + std::string(text) + "'");
    };
    if (colon == std::string_view::npos) throw bad();
    auto part = [&](std::string_view p) {
        if (p.size() < 2) throw bad();
        Nucleotide base = nucleotide_from_char(p[0]);
        std::size_t n = 0;
        for (char c : p.substr(1)) {
            if (c < '0' || c > '9') throw bad();
            n = n * 10 + static_cast<std::size_t>(c - '0');
        }
        return std::pair{base, n};
    };
    auto [zb, zn] = part(text.substr(0, colon));
    auto [ob, on] = part(text.substr(colon + 1));
    return {zb, zn, ob, on};
}

std::string RunLengthScheme::to_string() const
{
    return std::string(1, to_char(zero_base_)) + std::to_string(zero_run_) + ':' +
           to_char(one_base_) + std::to_string(one_run_);
}

Bits parse_bits(std::string_view text)
{
    text = trim_line(text);
    Bits bits;
    bits.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '0')
            bits.push_back(0);
        else if (text[i] == '1')
            bits.push_back(1);
        else
            throw Error(ErrorCategory::Alphabet,
                        "invalid bit character at position " + std::to_string(i), i);
    }
    return bits;
}

std::string bits_to_string(const Bits& bits)
{
    std::string out;
    out.reserve(bits.size());
    for (auto b : bits) out.push_back(b ? '1' : '0');
    return out;
}

BaseSequence encode_direct(const Bits& bits)
{
    if (bits.size() % 2 != 0)
        throw Error(ErrorCategory::Length,
                    "direct encoding needs an even number of bits, got " +
                        std::to_string(bits.size()));
    std::vector<Nucleotide> bases;
    bases.reserve(bits.size() / 2);
    for (std::size_t i = 0; i < bits.size(); i += 2) {
        auto v = static_cast<std::uint8_t>(((bits[i] & 1u) << 1) | (bits[i + 1] & 1u));
        bases.push_back(static_cast<Nucleotide>(v));
    }
    return BaseSequence(std::move(bases));
}

Bits decode_direct(const BaseSequence& seq)
{
    Bits bits;
    bits.reserve(seq.size() * 2);
    for (auto b : seq.bases()) {
        auto v = static_cast<std::uint8_t>(b);
        bits.push_back((v >> 1) & 1u);
        bits.push_back(v & 1u);
    }
    return bits;
}

BaseSequence encode_runlength(const Bits& bits, const RunLengthScheme& scheme)
{
    BaseSequence seq;
    for (auto b : bits) {
        if (b)
            seq.append(scheme.one_base(), scheme.one_run());
        else
            seq.append(scheme.zero_base(), scheme.zero_run());
    }
    return seq;
}

Bits decode_runlength(const BaseSequence& seq, const RunLengthScheme& scheme,
                      double tolerance)
{
    if (!(tolerance >= 0.0 && tolerance < 1.0))
        throw Error(ErrorCategory::Parameter, "tolerance must lie in [0, 1)");

    Bits bits;
    auto all = runs(seq);
    for (std::size_t i = 0; i < all.size(); ++i) {
        const Run& r = all[i];
        if (r.base != scheme.zero_base() && r.base != scheme.one_base())
            throw Error(ErrorCategory::Alphabet,
                        std::string("run ") + std::to_string(i) + " of base " +
                            to_char(r.base) + " is not in scheme " + scheme.to_string(),
                        i);
        const double nominal = static_cast<double>(nominal_for(scheme, r.base));
        const double len = static_cast<double>(r.length);
        const double k = std::max(1.0, std::round(len / nominal));
        if (std::abs(len - k * nominal) > tolerance * k * nominal)
            throw Error(ErrorCategory::Length,
                        "run " + std::to_string(i) + " has length " +
                            std::to_string(r.length) + ", outside tolerance of " +
                            std::to_string(static_cast<std::size_t>(k * nominal)),
                        i);
        bits.insert(bits.end(), static_cast<std::size_t>(k),
                    r.base == scheme.one_base() ? 1 : 0);
    }
    return bits;
}

} // namespace molstore::codec
