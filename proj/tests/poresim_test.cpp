#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "molstore/error.hpp"
#include "molstore/poresim.hpp"

using namespace molstore;
using namespace molstore::poresim;

namespace {

struct Moments {
    double n = 0, sum = 0, sq = 0;
    void add(double x) { n += 1; sum += x; sq += x * x; }
    double mean() const { return sum / n; }
    double sd() const { return std::sqrt((sq - sum * sum / n) / (n - 1)); }
};

} // namespace

TEST_CASE("molecule layouts")
{
    CHECK(MoleculeSpec::parse("A50C100") == MoleculeSpec::a50_c100());
    CHECK(MoleculeSpec::parse("(AC)60").segments().size() == 120);
    CHECK(MoleculeSpec::ac60().total_bases() == 120);
    CHECK(MoleculeSpec::parse("A5(CG)2T1").to_string() == "A5C1G1C1G1T1");
    CHECK(MoleculeSpec::from_sequence(codec::BaseSequence::parse("AAACC")).to_string() == "A3C2");
    CHECK_THROWS_AS(MoleculeSpec::parse("A0C5"), Error);
    CHECK(MoleculeSpec::parse("A5A5").to_string() == "A10");
    CHECK(MoleculeSpec::parse("A5C").to_string() == "A5C1");
    CHECK_THROWS_AS(MoleculeSpec::parse("(AC"), Error);
    CHECK_THROWS_AS(MoleculeSpec::parse("A5X"), Error);
    CHECK_THROWS_AS(MoleculeSpec::parse(""), Error);
}

TEST_CASE("sample_event: fixed seed gives the same event")
{
    CalibrationTable c;
    ChannelConfig cfg;
    Rng a(5), b(5);
    for (int i = 0; i < 50; ++i) {
        auto x = sample_event(MoleculeSpec::a50_c100(), cfg, c, a);
        auto y = sample_event(MoleculeSpec::a50_c100(), cfg, c, b);
        REQUIRE(x.substates.size() == y.substates.size());
        for (std::size_t k = 0; k < x.substates.size(); ++k) {
            CHECK(x.substates[k].level == y.substates[k].level);
            CHECK(x.substates[k].duration_us == y.substates[k].duration_us);
        }
    }
    cfg.voltage_mV = 0;
    CHECK_THROWS_AS(sample_event(MoleculeSpec::a50_c100(), cfg, c, a), Error);
}

TEST_CASE("sample_event: bi-level statistics at 210 mV")
{
    CalibrationTable c;
    ChannelConfig cfg;
    Rng rng(99);
    const int n = 10000;
    int bilevel = 0, three = 0;
    Moments c3, a3, c5, a5;
    for (int i = 0; i < n; ++i) {
        auto e = sample_event(MoleculeSpec::a50_c100(), cfg, c, rng);
        if (e.substates.size() != 2) continue;
        ++bilevel;
        if (e.orientation == Orientation::ThreePrimeFirst) {
            ++three;
            c3.add(e.substates[0].level);
            a3.add(e.substates[1].level);
        } else {
            a5.add(e.substates[0].level);
            c5.add(e.substates[1].level);
        }
    }
    CHECK(std::abs(bilevel / double(n) - 0.29) <= 0.02);
    CHECK(std::abs(three / double(bilevel) - 0.75) <= 0.03);
    CHECK(std::abs(c3.mean() - 0.37) <= 0.02);
    CHECK(std::abs(a3.mean() - 0.17) <= 0.02);
    CHECK(std::abs(c5.mean() - 0.20) <= 0.02);
    CHECK(std::abs(a5.mean() - 0.12) <= 0.02);
    CHECK(std::abs(c3.sd() / 0.09 - 1) <= 0.25);
    CHECK(std::abs(a3.sd() / 0.04 - 1) <= 0.25);
    CHECK(std::abs(c5.sd() / 0.03 - 1) <= 0.25);
    CHECK(std::abs(a5.sd() / 0.04 - 1) <= 0.25);
}

TEST_CASE("sample_event: no bi-levels below the voltage threshold")
{
    CalibrationTable c;
    for (double v : {120.0, 150.0, 180.0}) {
        ChannelConfig cfg;
        cfg.voltage_mV = v;
        Rng rng(3);
        int bilevel = 0;
        for (int i = 0; i < 5000; ++i) bilevel += sample_event(MoleculeSpec::a50_c100(), cfg, c, rng).substates.size() > 1;
        CHECK(bilevel == 0);
    }
}

TEST_CASE("synthesize_trace: length law and zero-voltage trace")
{
    CalibrationTable c;
    ChannelConfig cfg;
    CHECK(sample_count(0.001, 1e6) == 1000);
    CHECK(synthesize_trace(MoleculeSpec::a50_c100(), cfg, 0.001, c, 1).trace.samples.size() == 1000);

    cfg.voltage_mV = 0;
    auto sim = synthesize_trace(MoleculeSpec::a50_c100(), cfg, 0.5, c, 1);
    CHECK(sim.events.empty());
    double mean = std::accumulate(sim.trace.samples.begin(), sim.trace.samples.end(), 0.0) / sim.trace.samples.size();
    CHECK(std::abs(mean) < 0.05);
    CHECK_THROWS_AS(synthesize_trace(MoleculeSpec::a50_c100(), ChannelConfig{}, 0.0, c, 1), Error);
}

TEST_CASE("synthesize_trace: gating suppresses translocation")
{
    CalibrationTable c;
    ChannelConfig cfg;
    cfg.kcl_molar = 2.0;
    cfg.noise_sigma_pA = 0;
    auto sim = synthesize_trace(MoleculeSpec::a50_c100(), cfg, 1.0, c, 4);
    CHECK(sim.events.empty());
    CHECK_FALSE(sim.closures.empty());
    for (const auto& cl : sim.closures) CHECK(cl.kind == ClosureKind::Gate);
    auto [lo, hi] = std::minmax_element(sim.trace.samples.begin(), sim.trace.samples.end());
    CHECK(*lo == doctest::Approx(30.0));
    CHECK(*hi == doctest::Approx(500.0));
}

TEST_CASE("synthesize_trace: events never overlap within a pore and avoid closures")
{
    CalibrationTable c;
    ChannelConfig cfg;
    cfg.n_pores = 3;
    cfg.clog_rate_hz = 2.0;
    cfg.clog_mean_s = 0.1;
    auto sim = synthesize_trace(MoleculeSpec::a50_c100(), cfg, 5.0, c, 17, 3);
    REQUIRE(sim.events.size() > 100);
    std::vector<double> busy_until(3, -1.0);
    for (const auto& pe : sim.events) {
        CHECK(pe.event.t_start_s >= busy_until[pe.pore]);
        double end = pe.event.t_start_s + pe.event.duration_us() * 1e-6;
        busy_until[pe.pore] = end;
        for (const auto& cl : sim.closures)
            if (cl.pore == pe.pore) CHECK((end <= cl.start_s || pe.event.t_start_s >= cl.end_s));
    }
    for (std::size_t i = 1; i < sim.events.size(); ++i)
        CHECK(sim.events[i - 1].event.t_start_s <= sim.events[i].event.t_start_s);
}

TEST_CASE("synthesize_trace: thread count does not change the result")
{
    CalibrationTable c;
    ChannelConfig cfg;
    cfg.n_pores = 4;
    cfg.clog_rate_hz = 1.0;
    cfg.clog_mean_s = 0.2;
    cfg.lowpass = true;
    auto a = synthesize_trace(MoleculeSpec::a50_c100(), cfg, 1.0, c, 2024, 1);
    auto b = synthesize_trace(MoleculeSpec::a50_c100(), cfg, 1.0, c, 2024, 4);
    CHECK(a.trace.samples == b.trace.samples);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].pore == b.events[i].pore);
        CHECK(a.events[i].event.t_start_s == b.events[i].event.t_start_s);
    }
    auto d = synthesize_trace(MoleculeSpec::a50_c100(), cfg, 1.0, c, 2025, 1);
    CHECK(a.trace.samples != d.trace.samples);
}

TEST_CASE("synthesize_trace: pores add independently")
{
    CalibrationTable c;
    ChannelConfig cfg;
    cfg.sample_rate_hz = 1000;
    cfg.noise_sigma_pA = 0;
    const double expected = 10000.0;
    auto one = synthesize_trace(MoleculeSpec::a50_c100(), cfg, expected / capture_rate(210, c), c, 8);
    cfg.n_pores = 3;
    auto three = synthesize_trace(MoleculeSpec::a50_c100(), cfg, expected / capture_rate(210, c), c, 9, 3);
    double r1 = one.events.size() / one.trace.duration_s();
    double r3 = three.events.size() / three.trace.duration_s();
    CHECK(r3 / (3 * r1) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(three.trace.samples[0] == doctest::Approx(3 * 250.0));
    CHECK(open_pores_at(three, 3, 0.0) == 3);
}

TEST_CASE("synthesize_trace: scripted clogs drop one pore to the clogged level")
{
    CalibrationTable c;
    ChannelConfig cfg;
    cfg.n_pores = 2;
    cfg.noise_sigma_pA = 0;
    cfg.voltage_mV = 150;
    cfg.open_current_pA = 130;
    cfg.clogs.push_back({1, 0.5, 1.0});
    auto sim = synthesize_trace(MoleculeSpec::a50_c100(), cfg, 1.0, c, 3);
    CHECK(sim.open_current_pA == 130.0);
    CHECK(open_pores_at(sim, 2, 0.25) == 2);
    CHECK(open_pores_at(sim, 2, 0.75) == 1);
    CHECK(sim.trace.samples.back() == doctest::Approx(160.0));
}
