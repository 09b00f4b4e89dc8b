#pragma once

// Stochastic translocation events and multi-pore ionic-current traces.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "molstore/calibration.hpp"
#include "molstore/codec.hpp"

namespace molstore::poresim {

using Rng = std::mt19937_64;

/// Deterministic substream seed: pore p uses derive_seed(seed, p).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

struct Segment {
    Nucleotide base;
    std::size_t count;
    friend bool operator==(const Segment&, const Segment&) = default;
};

/// Homopolymer segments listed 5'->3'.
class MoleculeSpec {
public:
    /// Throws Config if empty, a count is zero, or adjacent bases repeat.
    explicit MoleculeSpec(std::vector<Segment> segments);

    /// 5'A50C100 3'
    static MoleculeSpec a50_c100();
    /// 5'(AC)60 3'
    static MoleculeSpec ac60();

    static MoleculeSpec from_sequence(const codec::BaseSequence& seq);
    /// "A50C100" or "(AC)60".
    static MoleculeSpec parse(std::string_view text);
    std::string to_string() const;

    const std::vector<Segment>& segments() const noexcept { return segments_; }
    std::size_t total_bases() const noexcept;
    friend bool operator==(const MoleculeSpec&, const MoleculeSpec&) = default;

private:
    std::vector<Segment> segments_;
};

struct Substate {
    double level;       // I_blocked / I_open, in (0, 1)
    double duration_us; // > 0
};

struct TranslocationEvent {
    double t_start_s = 0.0;
    std::vector<Substate> substates; // in time order
    bool complete = false;
    Orientation orientation = Orientation::Unknown;

    double duration_us() const noexcept;
    double mean_level() const noexcept; // duration weighted
};

struct CurrentTrace {
    double sample_rate_hz = 1e6;
    std::vector<float> samples; // pA

    double duration_s() const noexcept { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

/// floor(duration * rate), robust to the representation error of the product.
std::size_t sample_count(double duration_s, double sample_rate_hz);

/// One capture at config.voltage_mV (must be > 0; Precondition otherwise).
/// The returned event starts at t = 0.
TranslocationEvent sample_event(const MoleculeSpec& molecule, const ChannelConfig& config,
                                const CalibrationTable& calib, Rng& rng);

struct PoreEvent {
    std::size_t pore;
    TranslocationEvent event;
};

enum class ClosureKind { Clog, Gate };

struct Closure {
    std::size_t pore;
    double start_s;
    double end_s;
    ClosureKind kind;
};

struct Simulation {
    CurrentTrace trace;
    std::vector<PoreEvent> events;   // ordered by start time
    std::vector<Closure> closures;   // ordered by start time
    double open_current_pA = 0.0;    // per pore
};

/// Synthesizes n_pores independent pores plus additive Gaussian noise.
/// Pore p draws from derive_seed(seed, p), the noise from
/// derive_seed(seed, n_pores); `threads` only changes wall time.
Simulation synthesize_trace(const MoleculeSpec& molecule, const ChannelConfig& config,
                            double duration_s, const CalibrationTable& calib,
                            std::uint64_t seed, unsigned threads = 1);

/// Number of pores open (neither clogged nor gated) at time t.
std::size_t open_pores_at(const Simulation& sim, std::size_t n_pores, double t_s);

} // namespace molstore::poresim
