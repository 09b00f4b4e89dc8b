#include <doctest.h>

#include "molstore/calibration.hpp"
#include "molstore/error.hpp"

using namespace molstore;
using namespace molstore::poresim;

TEST_CASE("open current is exact at the knots and interpolates between them")
{
    CalibrationTable c;
    CHECK(open_current(210, 1.0, c) == 250.0);
    CHECK(open_current(0, 1.0, c) == 0.0);
    CHECK(open_current(-210, 1.0, c) == -200.0);
    CHECK(open_current(150, 1.0, c) == 160.0);
    CHECK(open_current(120, 1.0, c) == 130.0);
    CHECK(open_current(90, 1.0, c) == 90.0);
    CHECK(open_current(180, 1.0, c) == doctest::Approx(205.0));
    CHECK(open_current(210, 2.0, c) == 500.0);
    CHECK_THROWS_AS(open_current(211, 1.0, c), Error);
    CHECK_THROWS_AS(open_current(100, 0.0, c), Error);
}

TEST_CASE("gating threshold is inclusive")
{
    CalibrationTable c;
    CHECK_FALSE(gating_active(1.0, c));
    CHECK(gating_active(2.0, c));
    CHECK(gating_active(1.5, c));
}

TEST_CASE("capture rate and duration laws")
{
    CalibrationTable c;
    CHECK(capture_rate(150, c) == 10.6);
    CHECK(capture_rate(120, c) == 3.5);
    CHECK(capture_rate(150, c) > capture_rate(120, c));
    CHECK(capture_rate(120, c) > capture_rate(90, c));
    CHECK_THROWS_AS(capture_rate(300, c), Error);
    CHECK(mean_duration(210, 150, c) == doctest::Approx(150.0));
    CHECK(mean_duration(105, 150, c) == doctest::Approx(300.0));
    CHECK(mean_duration(210, 120, c) == doctest::Approx(120.0));
    try {
        mean_duration(0, 150, c);
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::Precondition);
    }
    CHECK(monolevel_blockage(90, c) > monolevel_blockage(120, c));
    CHECK(monolevel_blockage(120, c) > monolevel_blockage(150, c));
}

TEST_CASE("calibration file round trip and validation")
{
    CalibrationTable c;
    c.set_level(Orientation::FivePrimeFirst, Nucleotide::G, {0.5, 0.05});
    auto back = CalibrationTable::from_kv(c.to_kv());
    CHECK(back.to_kv().entries() == c.to_kv().entries());
    CHECK(back.level(Orientation::FivePrimeFirst, Nucleotide::G)->mean == 0.5);

    auto kvs = c.to_kv();
    kvs.set("iv_points", "0:0, 0:10");
    CHECK_THROWS_AS(CalibrationTable::from_kv(kvs), Error);
    kvs = c.to_kv();
    kvs.set("c_first_fraction", "1.5");
    CHECK_THROWS_AS(CalibrationTable::from_kv(kvs), Error);
}

TEST_CASE("channel config validation")
{
    ChannelConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.n_pores = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.clogs.push_back({3, 0.0, 1.0});
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.open_current_pA = 130.0;
    cfg.clogs.push_back({0, 1.0, 2.0});
    auto back = ChannelConfig::from_kv(cfg.to_kv());
    CHECK(back.to_kv().entries() == cfg.to_kv().entries());
    CHECK(pore_open_current(back, CalibrationTable{}) == 130.0);
}
