#include <doctest.h>

#include <random>

#include "molstore/codec.hpp"
#include "molstore/error.hpp"

using namespace molstore;
using namespace molstore::codec;

namespace {

ErrorCategory category_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.category();
    }
    FAIL("expected an error");
    return ErrorCategory::Io;
}

BaseSequence seq(std::string_view s) { return BaseSequence::parse(s); }

} // namespace

TEST_CASE("direct encoding follows the fixed two-bit table")
{
    CHECK(encode_direct({0, 0, 0, 1, 1, 0, 1, 1}).to_string() == "ACGT");
    CHECK(encode_direct({}).empty());
    CHECK(encode_direct({1, 1, 1, 1}).to_string() == "TT");
    CHECK(decode_direct(seq("ACGT")) == Bits{0, 0, 0, 1, 1, 0, 1, 1});
    CHECK(decode_direct(seq("")).empty());
    CHECK(decode_direct(seq("G")) == Bits{1, 0});
}

TEST_CASE("odd-length payload is a length error")
{
    CHECK(category_of([] { encode_direct({0, 1, 1}); }) == ErrorCategory::Length);
}

TEST_CASE("sequence parsing")
{
    CHECK(seq("ACGT\n").size() == 4);
    try {
        seq("ACXT");
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::Alphabet);
        REQUIRE(e.index());
        CHECK(*e.index() == 2);
    }
    CHECK(category_of([] { parse_bits("0120"); }) == ErrorCategory::Alphabet);
}

TEST_CASE("run-length encoding")
{
    auto s = RunLengthScheme::default_scheme();
    auto e = encode_runlength({0, 1}, s);
    CHECK(e.to_string() == std::string(20, 'A') + std::string(30, 'C'));
    CHECK(encode_runlength({}, s).empty());
    CHECK(encode_runlength({1, 1}, s).to_string() == std::string(60, 'C'));
}

TEST_CASE("run-length decoding with tolerance")
{
    auto s = RunLengthScheme::default_scheme();
    CHECK(decode_runlength(seq(std::string(20, 'A') + std::string(30, 'C')), s, 0.1) == Bits{0, 1});
    CHECK(decode_runlength(seq(std::string(19, 'A') + std::string(30, 'C')), s, 0.1) == Bits{0, 1});
    try {
        decode_runlength(seq(std::string(20, 'G')), s, 0.1);
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::Alphabet);
        CHECK(e.index().value() == 0);
    }
    try {
        decode_runlength(seq(std::string(20, 'A') + std::string(24, 'C')), s, 0.1);
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::Length);
        CHECK(e.index().value() == 1);
    }
    CHECK(category_of([] { decode_runlength(seq("A"), RunLengthScheme::default_scheme(), 1.0); }) ==
          ErrorCategory::Parameter);
}

TEST_CASE("scheme validation and text form")
{
    CHECK(RunLengthScheme::parse("A50:C100").to_string() == "A50:C100");
    CHECK(RunLengthScheme::parse("G20:T30").one_base() == Nucleotide::T);
    CHECK(category_of([] { RunLengthScheme::parse("A20:A30"); }) == ErrorCategory::Config);
    CHECK(category_of([] { RunLengthScheme::parse("A0:C30"); }) == ErrorCategory::Config);
    CHECK(category_of([] { RunLengthScheme::parse("A20"); }) == ErrorCategory::Config);
}

TEST_CASE("direct round trip and length law over random payloads")
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> len(0, 64), bit(0, 1);
    for (int i = 0; i < 10000; ++i) {
        Bits b(2 * static_cast<std::size_t>(len(rng)));
        for (auto& x : b) x = static_cast<std::uint8_t>(bit(rng));
        auto s = encode_direct(b);
        REQUIRE(s.size() == b.size() / 2);
        REQUIRE(decode_direct(s) == b);
    }
}

TEST_CASE("run-length round trip, length law and tolerance monotonicity")
{
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> len(0, 24), bit(0, 1), run(1, 40), base(0, 3);
    for (int i = 0; i < 10000; ++i) {
        auto zb = static_cast<Nucleotide>(base(rng));
        auto ob = static_cast<Nucleotide>((static_cast<int>(zb) + 1 + base(rng) % 3) % 4);
        auto zr = static_cast<std::size_t>(run(rng));
        auto orr = static_cast<std::size_t>(run(rng));
        RunLengthScheme s(zb, zr, ob, orr);
        Bits b(static_cast<std::size_t>(len(rng)));
        std::size_t ones = 0;
        for (auto& x : b) ones += (x = static_cast<std::uint8_t>(bit(rng)));
        auto e = encode_runlength(b, s);
        REQUIRE(e.size() == (b.size() - ones) * zr + ones * orr);
        REQUIRE(decode_runlength(e, s, 0.0) == b);
    }

    // Perturbed runs: once decoding succeeds it keeps succeeding, with the
    // same symbols, as the tolerance grows.
    auto s = RunLengthScheme::default_scheme();
    std::uniform_int_distribution<int> jitter(-8, 8);
    for (int i = 0; i < 2000; ++i) {
        BaseSequence q;
        std::size_t n = 1 + static_cast<std::size_t>(len(rng)) % 6;
        for (std::size_t k = 0; k < n; ++k) {
            bool one = bit(rng) != 0;
            int nominal = one ? 30 : 20;
            q.append(one ? Nucleotide::C : Nucleotide::A, static_cast<std::size_t>(nominal + jitter(rng)));
        }
        std::optional<Bits> first;
        for (double t = 0.0; t < 0.5; t += 0.05) {
            try {
                auto got = decode_runlength(q, s, t);
                if (first) REQUIRE(got == *first);
                else first = got;
            } catch (const Error&) {
                REQUIRE_FALSE(first.has_value());
            }
        }
    }
}
