#pragma once

// Capacity, throughput and access-latency arithmetic for a molecular storage
// chip: parking spots and read/write stations tiled on a die, layers stacked.

#include <cstddef>
#include <string>

#include "molstore/kvfile.hpp"

namespace molstore::chip {

struct ChipLayout {
    double parking_spots = 1e6;
    double parking_area_cm2 = 0.25;
    double stations = 1000.0;
    double station_area_cm2 = 0.1;
    double plumbing_area_cm2 = 0.65;
    double layer_thickness_um = 10.0;
    double block_bytes = 1e6;

    void validate() const;
};

/// Same spot pitch, different spot count.
ChipLayout with_parking_spots(const ChipLayout& layout, double spots);

struct AreaBudget {
    double parking_cm2;
    double stations_cm2;
    double plumbing_cm2;
    double total_cm2;
    bool over_budget; // total exceeds the declared die area
};

AreaBudget area_budget(const ChipLayout& layout, double die_area_cm2 = 1.0);

/// spots * block_bytes / total area; Parameter error for zero area.
double areal_capacity(const ChipLayout& layout);

/// areal_capacity * (1e4 um / layer_thickness_um) layers per cm.
double volumetric_capacity(const ChipLayout& layout);

/// bits_per_molecule / (translocation_us * 1e-6), not rounded.
double station_rate(double bits_per_molecule, double translocation_us);
double aggregate_rate(double station_bits_per_s, double n_stations);

struct DvdPlatter {
    double bytes = 9.4e9;     // double-sided, single-layer
    double thickness_mm = 1.2;
};

/// ceil(bytes / platter bytes) platters, in meters.
double dvd_stack_height(double bytes, const DvdPlatter& platter = {});

/// 1 cm in 1 ms under 10 V.
inline constexpr double kDefaultMobility_cm2_per_Vs = 100.0;

/// Electrophoretic drift time d^2 / (mobility * V), in seconds.
double transit_time(double distance_cm, double voltage_V, double mobility_cm2_per_Vs = kDefaultMobility_cm2_per_Vs);

struct Scenario {
    ChipLayout layout;
    double die_area_cm2 = 1.0;
    double bits_per_molecule = 2.0;
    double translocation_us = 150.0;
    double stored_bytes = 1e15;
    DvdPlatter dvd;
    double transit_distance_cm = 1.0;
    double transit_voltage_V = 10.0;
    double mobility_cm2_per_Vs = kDefaultMobility_cm2_per_Vs;

    static Scenario from_kv(const kv::KeyValues& kvs);
    static Scenario from_kv(const kv::KeyValues& kvs, Scenario base);
    kv::KeyValues to_kv() const;
};

struct ThroughputReport {
    AreaBudget area;
    double per_station_bits_per_s;
    double aggregate_bits_per_s;
    double areal_bytes_per_cm2;
    double volumetric_bytes_per_cm3;
    double dvd_stack_m;
    double transit_time_s;

    kv::KeyValues to_kv() const;
    static std::string csv_header();
    std::string csv_row() const;
};

ThroughputReport plan(const Scenario& s);

} // namespace molstore::chip
