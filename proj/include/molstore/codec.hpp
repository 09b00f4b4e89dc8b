#pragma once

// Bits <-> nucleotide sequences.
//
// Two schemes: the fixed 2-bit table (A=00, C=01, G=10, T=11) and run-length
// homopolymer coding, where each bit becomes a string of identical bases.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace molstore::codec {

enum class Nucleotide : std::uint8_t { A = 0, C = 1, G = 2, T = 3 };

char to_char(Nucleotide n) noexcept;
Nucleotide nucleotide_from_char(char c); // throws Alphabet

/// One binary digit per element, each 0 or 1.
using Bits = std::vector<std::uint8_t>;

/// Ordered 5'->3'.
class BaseSequence {
public:
    BaseSequence() = default;
    explicit BaseSequence(std::vector<Nucleotide> bases) : bases_(std::move(bases)) {}

    const std::vector<Nucleotide>& bases() const noexcept { return bases_; }
    std::size_t size() const noexcept { return bases_.size(); }
    bool empty() const noexcept { return bases_.empty(); }
    Nucleotide operator[](std::size_t i) const { return bases_[i]; }

    void push_back(Nucleotide n) { bases_.push_back(n); }
    void append(Nucleotide n, std::size_t count) { bases_.insert(bases_.end(), count, n); }

    /// Sequence text: characters from {A,C,G,T}, 5' end first.
    std::string to_string() const;
    static BaseSequence parse(std::string_view text);

    friend bool operator==(const BaseSequence&, const BaseSequence&) = default;

private:
    std::vector<Nucleotide> bases_;
};

/// Maximal homopolymer run.
struct Run {
    Nucleotide base;
    std::size_t length;
    friend bool operator==(const Run&, const Run&) = default;
};

std::vector<Run> runs(const BaseSequence& seq);

class RunLengthScheme {
public:
    /// Throws Config when the two bases coincide or a run length is zero.
    RunLengthScheme(Nucleotide zero_base, std::size_t zero_run,
                    Nucleotide one_base, std::size_t one_run);

    /// {A x 20 <-> 0, C x 30 <-> 1}
    static RunLengthScheme default_scheme();

    /// Parses "A20:C30" (zero run first).
    static RunLengthScheme parse(std::string_view text);
    std::string to_string() const;

    Nucleotide zero_base() const noexcept { return zero_base_; }
    std::size_t zero_run() const noexcept { return zero_run_; }
    Nucleotide one_base() const noexcept { return one_base_; }
    std::size_t one_run() const noexcept { return one_run_; }

    friend bool operator==(const RunLengthScheme&, const RunLengthScheme&) = default;

private:
    Nucleotide zero_base_;
    std::size_t zero_run_;
    Nucleotide one_base_;
    std::size_t one_run_;
};

/// Bit payload text: a line of '0'/'1' characters, optional trailing newline.
Bits parse_bits(std::string_view text);
std::string bits_to_string(const Bits& bits);

BaseSequence encode_direct(const Bits& bits);
Bits decode_direct(const BaseSequence& seq);

BaseSequence encode_runlength(const Bits& bits, const RunLengthScheme& scheme);

/// Splits the sequence into maximal runs. A run of the scheme's zero base
/// with length L stands for k = max(1, round(L / zero_run)) zeros and is
/// accepted when |L - k * zero_run| <= tolerance * k * zero_run (same for
/// ones). Adjacent equal bits therefore merge into one longer run and still
/// decode.
///
/// Throws Alphabet for a run of a base outside the scheme and Length for a
/// run outside tolerance; both carry the index of the first offending run.
/// tolerance must lie in [0, 1).
Bits decode_runlength(const BaseSequence& seq, const RunLengthScheme& scheme,
                      double tolerance);

} // namespace molstore::codec
