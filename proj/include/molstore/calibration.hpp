#pragma once

// Operating point and measured calibration of an alpha-haemolysin read station.
//
// Every number here is a default that a calibration file may override. The
// anchored values: open currents 250/-200 pA at +/-210 mV and 160/130/90 pA at
// 150/120/90 mV (1 M KCl); 30 pA through a clogged pore; three pores capturing
// 31.8 events/s in total at 150 mV, 40% of them complete;
// ~150 us to translocate a 150-base strand at 210 mV; bi-level signals only at
// 210 mV, in 29% of events, three quarters of them with the 3' (C) end first.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "molstore/codec.hpp"
#include "molstore/kvfile.hpp"

namespace molstore::poresim {

using codec::Nucleotide;

enum class Orientation { ThreePrimeFirst, FivePrimeFirst, Unknown };

const char* orientation_name(Orientation o) noexcept;
Orientation orientation_from_name(std::string_view name);

/// Normalized residual current I_blocked / I_open of one segment.
struct LevelStat {
    double mean;
    double sd;
};

struct RatePoint {
    double voltage_mV;
    double events_per_s;      // all captures, complete and partial
    double complete_fraction; // share that translocate fully
};

struct CalibrationTable {
    std::vector<std::pair<double, double>> iv_points{
        {-210.0, -200.0}, {0.0, 0.0}, {90.0, 90.0}, {120.0, 130.0}, {150.0, 160.0}, {210.0, 250.0}};
    double clogged_current_pA = 30.0;

    std::vector<RatePoint> event_rates{
        {90.0, 2.0, 0.40}, {120.0, 3.5, 0.40}, {150.0, 10.6, 0.40}, {210.0, 21.0, 0.40}};

    double base_dwell_us_at_ref = 1.0;
    double ref_voltage_mV = 210.0;

    double bilevel_min_voltage_mV = 210.0;
    /// Share of *all* events at or above the threshold that are bi-level.
    double bilevel_fraction = 0.29;
    double c_first_fraction = 0.75;

    /// Indexed [orientation][nucleotide]; only A and C are measured.
    std::array<std::array<std::optional<LevelStat>, 4>, 2> level_stats{{
        {{LevelStat{0.17, 0.04}, LevelStat{0.37, 0.09}, std::nullopt, std::nullopt}},
        {{LevelStat{0.12, 0.04}, LevelStat{0.20, 0.03}, std::nullopt, std::nullopt}},
    }};

    double gating_threshold_molar = 1.5;
    double gating_open_dwell_ms = 20.0;
    double gating_closed_dwell_ms = 20.0;

    /// Fractional blockage (1 - normalized level) of unresolved complete events.
    std::vector<std::pair<double, double>> monolevel_blockage{
        {90.0, 0.85}, {120.0, 0.80}, {150.0, 0.75}};
    double monolevel_sd = 0.03;

    double incomplete_level_min = 0.3;
    double incomplete_level_max = 0.7;
    double incomplete_mean_us = 15.0;

    /// Coefficient of variation of the log-normal per-segment dwell jitter.
    double duration_cv = 0.1;

    std::optional<LevelStat> level(Orientation o, Nucleotide base) const;
    void set_level(Orientation o, Nucleotide base, LevelStat s);

    /// Throws Config naming the first violated invariant.
    void validate() const;

    /// Overrides any subset of the defaults from a key-value table.
    static CalibrationTable from_kv(const kv::KeyValues& kvs);
    static CalibrationTable from_kv(const kv::KeyValues& kvs, CalibrationTable base);
    static CalibrationTable load(const std::string& path);
    kv::KeyValues to_kv() const;
};

/// Scripted period during which one pore is clogged.
struct ClogInterval {
    std::size_t pore;
    double start_s;
    double end_s;
};

struct ChannelConfig {
    double kcl_molar = 1.0;
    double voltage_mV = 210.0;
    double bandwidth_kHz = 100.0;
    bool lowpass = false;
    double sample_rate_hz = 1e6;
    double noise_sigma_pA = 5.0;
    std::size_t n_pores = 1;

    /// Replaces open_current() for every pore.
    std::optional<double> open_current_pA;

    std::vector<ClogInterval> clogs;
    /// Spontaneous clogging: Poisson onset rate per pore and mean clog length.
    double clog_rate_hz = 0.0;
    double clog_mean_s = 1.0;

    void validate() const;

    static ChannelConfig from_kv(const kv::KeyValues& kvs);
    static ChannelConfig from_kv(const kv::KeyValues& kvs, ChannelConfig base);
    kv::KeyValues to_kv() const;
};

/// Piecewise-linear I-V lookup scaled linearly with KCl molarity. Throws Range
/// outside the tabulated voltages and Parameter for non-positive molarity.
double open_current(double voltage_mV, double kcl_molar, const CalibrationTable& calib);

/// Per-pore open current of a configuration, honouring the override.
double pore_open_current(const ChannelConfig& config, const CalibrationTable& calib);

bool gating_active(double kcl_molar, const CalibrationTable& calib);

/// Events per second per pore; linear between knots, Range error outside.
double capture_rate(double voltage_mV, const CalibrationTable& calib);

/// Fraction of captures that translocate fully; held flat beyond the table.
double complete_fraction(double voltage_mV, const CalibrationTable& calib);

/// Mean blockage of unresolved complete events; held flat beyond the table.
double monolevel_blockage(double voltage_mV, const CalibrationTable& calib);

/// n_bases * dwell * V_ref / V, in microseconds.
double mean_duration(double voltage_mV, double n_bases, const CalibrationTable& calib);

} // namespace molstore::poresim
