#pragma once

// Event detection, substate classification, orientation inference and bit
// recovery from ionic-current traces, plus the rate/open-fraction/census
// statistics of a recording.

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "molstore/calibration.hpp"
#include "molstore/codec.hpp"
#include "molstore/poresim.hpp"

namespace molstore::reader {

using poresim::CalibrationTable;
using poresim::CurrentTrace;
using poresim::Orientation;
using poresim::TranslocationEvent;

struct DetectParams {
    double open_current_pA = 0.0;   // per pore
    double threshold_fraction = 0.8; // of one pore's open current
    double min_duration_us = 10.0;
};

/// Stretch of a trace with a constant number of open pores.
struct CensusSegment {
    std::size_t begin;
    std::size_t end; // exclusive
    std::size_t open_pores;
    double mean_current_pA;
};

struct DetectedEvent {
    std::size_t begin; // first sample below threshold
    std::size_t end;   // exclusive
    double t_start_s;
    double duration_us;
    double baseline_pA;     // total current just outside the event
    double open_current_pA; // per pore, normalizes the blocked pore's level
    double mean_level;      // I_blocked / I_open of the blocked pore
};

/// Single-pore detection: an event is a maximal run of samples below
/// threshold_fraction * open_current lasting at least min_duration_us.
/// Throws Parameter for non-positive open current or a threshold outside (0,1).
std::vector<DetectedEvent> detect_events(const CurrentTrace& trace, const DetectParams& params);

/// Multi-pore detection: inside each census segment with k >= 1 open pores
/// the baseline is k * open + (n - k) * clogged and an event is a run below
/// baseline - (1 - threshold_fraction) * open.
std::vector<DetectedEvent> detect_events(const CurrentTrace& trace, const DetectParams& params,
                                         std::span<const CensusSegment> segments,
                                         double clogged_current_pA, std::size_t n_pores);

/// Blocked-pore level of every sample of an event.
std::vector<double> normalized_samples(const CurrentTrace& trace, const DetectedEvent& ev);

struct BiLevel {
    double first_level;
    double second_level;
    double first_duration_us;
    double second_duration_us;
};

struct MonoLevel {
    double level;
    double duration_us;
};

struct Incomplete {
    double level;
    double duration_us;
};

using EventClass = std::variant<BiLevel, MonoLevel, Incomplete>;

const char* class_name(const EventClass& c) noexcept;

struct ClassifyParams {
    double sample_rate_hz = 1e6;
    double noise_sigma = 0.02; // normalized to the open current
    double min_substate_us = 20.0;
    double complete_floor_us = 0.0;
};

/// 0.4 * mean_duration(V, n_bases): shorter events are partial translocations.
double complete_floor_us(double voltage_mV, std::size_t n_bases, const CalibrationTable& calib,
                         double factor = 0.4);

/// Best single change point by exhaustive search over splits that leave at
/// least min_substate_us on both sides; BiLevel when the two means differ by
/// more than 3 noise_sigma. Events shorter than complete_floor_us are
/// Incomplete.
EventClass classify_event(std::span<const double> normalized, const ClassifyParams& params);

struct OrientationCall {
    Orientation orientation;
    /// The nearest calibrated (first, second) level pair agrees with the call.
    bool depth_consistent;
    double depth_distance;
};

/// Decides entry direction from the level ordering of a bi-level event of a
/// two-segment molecule whose 5' and 3' segment bases are given.
OrientationCall infer_orientation(const BiLevel& cls, const CalibrationTable& calib,
                                  codec::Nucleotide five_prime = codec::Nucleotide::A,
                                  codec::Nucleotide three_prime = codec::Nucleotide::C,
                                  double tie_tolerance = 1e-3);

/// Maps each substate to its nearest calibrated base and converts its dwell
/// into a base count at `voltage_mV`; returns runs 5'->3'. Precondition error
/// for Unknown orientation.
std::vector<codec::Run> recover_bases(const TranslocationEvent& event, Orientation orientation,
                                      const CalibrationTable& calib, double voltage_mV);

/// decode_runlength(recover_bases(event, event.orientation, ...)).
codec::Bits decode_event(const TranslocationEvent& event, const codec::RunLengthScheme& scheme,
                         const CalibrationTable& calib, double voltage_mV, double tolerance = 0.3);

/// k in [0, n_pores] minimizing |sample - (k * open + (n - k) * clogged)|.
std::size_t pore_state_census(double sample_pA, double open_current_pA, double clogged_current_pA,
                              std::size_t n_pores);

/// Per-sample census, then runs shorter than min_dwell_us are folded into the
/// surrounding state so translocation blockades do not count as clogs.
std::vector<CensusSegment> census_segments(const CurrentTrace& trace, double open_current_pA,
                                           double clogged_current_pA, std::size_t n_pores,
                                           double min_dwell_us = 5000.0);

/// Robust noise estimate (pA) from the MAD of first differences.
double estimate_noise_sigma(const CurrentTrace& trace);

struct ClassifiedEvent {
    DetectedEvent detected;
    EventClass cls;
    Orientation orientation = Orientation::Unknown;
    bool depth_consistent = false;

    bool complete() const noexcept { return !std::holds_alternative<Incomplete>(cls); }
    /// Substates from the classification, for recover_bases/decode_event.
    TranslocationEvent to_event() const;
};

struct CensusRate {
    std::size_t open_pores;
    double time_s = 0.0;
    std::size_t complete = 0;
    std::size_t partial = 0;
    double mean_current_pA = 0.0;

    double complete_rate() const { return time_s > 0 ? static_cast<double>(complete) / time_s : 0.0; }
    double partial_rate() const { return time_s > 0 ? static_cast<double>(partial) / time_s : 0.0; }
    double total_rate() const { return complete_rate() + partial_rate(); }
};

struct StatsReport {
    double duration_s = 0.0;
    double open_fraction = 1.0;
    double complete_rate = 0.0;
    double partial_rate = 0.0;
    double total_rate = 0.0;
    std::vector<std::pair<double, double>> duration_blockage_pairs; // (us, %)
    std::vector<std::size_t> pore_census_histogram;                // samples by open pores
    std::vector<CensusRate> census_rates;                          // by open pores, ascending
};

/// open_fraction counts samples outside detected events.
StatsReport trace_stats(const CurrentTrace& trace, std::span<const ClassifiedEvent> events,
                        std::span<const CensusSegment> segments, std::size_t n_pores);

struct ReadParams {
    double voltage_mV = 210.0;
    std::size_t n_pores = 1;
    double open_current_pA = 250.0;
    double clogged_current_pA = 30.0;
    double threshold_fraction = 0.8;
    double min_duration_us = 10.0;
    double min_substate_us = 20.0;
    double noise_sigma_pA = 5.0;
    std::size_t molecule_bases = 150;
    codec::Nucleotide five_prime = codec::Nucleotide::A;
    codec::Nucleotide three_prime = codec::Nucleotide::C;
    double census_min_dwell_us = 5000.0;
};

struct ReadResult {
    std::vector<CensusSegment> segments;
    std::vector<ClassifiedEvent> events;
    StatsReport stats;
};

/// census -> detect -> classify -> orient.
ReadResult read_trace(const CurrentTrace& trace, const ReadParams& params, const CalibrationTable& calib);

} // namespace molstore::reader
