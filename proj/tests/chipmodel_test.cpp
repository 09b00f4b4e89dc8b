#include <doctest.h>

#include "molstore/chipmodel.hpp"
#include "molstore/error.hpp"

using namespace molstore;
using namespace molstore::chip;

TEST_CASE("area budget")
{
    auto b = area_budget(ChipLayout{});
    CHECK(b.total_cm2 == 1.0);
    CHECK_FALSE(b.over_budget);

    ChipLayout zero{0, 0, 0, 0, 0, 10, 1e6};
    CHECK(area_budget(zero).total_cm2 == 0.0);

    auto doubled = area_budget(with_parking_spots(ChipLayout{}, 2e6));
    CHECK(doubled.parking_cm2 == 0.5);
    CHECK(doubled.total_cm2 == 1.25);
    CHECK(doubled.over_budget);
}

TEST_CASE("capacities")
{
    ChipLayout l;
    CHECK(areal_capacity(l) == 1e12);
    CHECK(volumetric_capacity(l) == 1e15);
    l.block_bytes = 1;
    CHECK(areal_capacity(l) == 1e6);
    l = {};
    l.parking_spots = 5e5;
    CHECK(areal_capacity(l) == 5e11);
    l = {};
    l.layer_thickness_um = 100;
    CHECK(volumetric_capacity(l) == 1e14);
    l.layer_thickness_um = 5;
    CHECK(volumetric_capacity(l) == 2e15);
    CHECK(volumetric_capacity(l) * l.layer_thickness_um == volumetric_capacity(ChipLayout{}) * 10);
    CHECK_THROWS_AS(areal_capacity(ChipLayout{1e6, 0, 0, 0, 0, 10, 1e6}), Error);
}

TEST_CASE("rates, DVD stack and transit")
{
    CHECK(station_rate(2, 150) == doctest::Approx(13333.333333333334));
    CHECK(station_rate(150, 150) == 1e6);
    CHECK(aggregate_rate(1e6, 3000) == 3e9);
    CHECK(aggregate_rate(2e6, 3000) == 2 * aggregate_rate(1e6, 3000));
    CHECK(aggregate_rate(1e6, 6000) == 2 * aggregate_rate(1e6, 3000));
    CHECK_THROWS_AS(station_rate(2, 0), Error);

    CHECK(dvd_stack_height(1e15) == doctest::Approx(127.6596).epsilon(1e-6));
    CHECK(dvd_stack_height(0) == 0.0);
    CHECK(dvd_stack_height(9.4e9) == doctest::Approx(0.0012));

    CHECK(transit_time(1.0, 10) == doctest::Approx(1e-3));
    CHECK(transit_time(1.0, 20) == doctest::Approx(5e-4));
    CHECK(transit_time(2.0, 10) == doctest::Approx(4e-3));
    CHECK_THROWS_AS(transit_time(0, 10), Error);
}

TEST_CASE("scenario planning")
{
    auto r = plan(Scenario{});
    CHECK(r.areal_bytes_per_cm2 == 1e12);
    CHECK(r.volumetric_bytes_per_cm3 == 1e15);
    CHECK(r.per_station_bits_per_s == doctest::Approx(13333.3333));
    CHECK(r.dvd_stack_m == doctest::Approx(127.7).epsilon(0.004));
    CHECK(r.transit_time_s == doctest::Approx(1e-3));

    Scenario s;
    s.layout.stations = 0;
    CHECK(plan(s).aggregate_bits_per_s == 0.0);
    s.layout.stations = 3000;
    s.bits_per_molecule = 150;
    CHECK(plan(s).aggregate_bits_per_s == 3e9);

    auto back = Scenario::from_kv(s.to_kv());
    CHECK(back.to_kv().entries() == s.to_kv().entries());
    auto kvs = s.to_kv();
    kvs.set("stations", "-1");
    CHECK_THROWS_AS(Scenario::from_kv(kvs), Error);
}
