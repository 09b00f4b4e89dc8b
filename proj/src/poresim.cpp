#include "molstore/poresim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>

#include "molstore/error.hpp"

namespace molstore::poresim {

namespace {

double truncated_normal(Rng& rng, double mean, double sd, double lo, double hi)
{
    std::normal_distribution<double> normal(mean, sd);
    for (int i = 0; i < 100000; ++i) {
        double x = normal(rng);
        if (x > lo && x < hi) return x;
    }
    return std::clamp(mean, std::nextafter(lo, hi), std::nextafter(hi, lo));
}

// Mean-one log-normal multiplier with the given coefficient of variation.
double jitter(Rng& rng, double cv)
{
    if (cv <= 0.0) return 1.0;
    const double sigma = std::sqrt(std::log1p(cv * cv));
    std::lognormal_distribution<double> d(-0.5 * sigma * sigma, sigma);
    return d(rng);
}

double positive_exponential(Rng& rng, double mean)
{
    std::exponential_distribution<double> d(1.0 / mean);
    double x = 0.0;
    while (!(x > 0.0)) x = d(rng);
    return x;
}

bool resolvable(const MoleculeSpec& m, const CalibrationTable& calib)
{
    if (m.segments().size() < 2) return false;
    for (const auto& s : m.segments())
        if (!calib.level(Orientation::ThreePrimeFirst, s.base) ||
            !calib.level(Orientation::FivePrimeFirst, s.base))
            return false;
    return true;
}

struct Interval {
    double start;
    double end;
    ClosureKind kind;
};

// Alternating open/closed renewal process starting open.
void alternating_closures(Rng& rng, double open_mean_s, double closed_mean_s, double horizon_s,
                          ClosureKind kind, std::vector<Interval>& out)
{
    double t = 0.0;
    for (;;) {
        t += positive_exponential(rng, open_mean_s);
        if (t >= horizon_s) return;
        double len = positive_exponential(rng, closed_mean_s);
        out.push_back({t, std::min(t + len, horizon_s), kind});
        t += len;
    }
}

struct PoreHistory {
    std::vector<Interval> closures; // disjoint, sorted
    std::vector<TranslocationEvent> events;
};

PoreHistory simulate_pore(std::size_t pore, const MoleculeSpec& molecule, const ChannelConfig& config,
                          double duration_s, const CalibrationTable& calib, double rate, bool gating,
                          std::uint64_t seed)
{
    Rng rng(derive_seed(seed, pore));
    PoreHistory h;

    std::vector<Interval> raw;
    for (const auto& c : config.clogs)
        if (c.pore == pore && c.start_s < duration_s)
            raw.push_back({c.start_s, std::min(c.end_s, duration_s), ClosureKind::Clog});
    if (config.clog_rate_hz > 0.0)
        alternating_closures(rng, 1.0 / config.clog_rate_hz, config.clog_mean_s, duration_s,
                             ClosureKind::Clog, raw);
    if (gating)
        alternating_closures(rng, calib.gating_open_dwell_ms * 1e-3, calib.gating_closed_dwell_ms * 1e-3,
                             duration_s, ClosureKind::Gate, raw);

    std::sort(raw.begin(), raw.end(), [](const Interval& a, const Interval& b) { return a.start < b.start; });
    for (const auto& iv : raw) {
        if (!h.closures.empty() && iv.start <= h.closures.back().end)
            h.closures.back().end = std::max(h.closures.back().end, iv.end);
        else
            h.closures.push_back(iv);
    }

    if (rate <= 0.0) return h;

    // Poisson arrivals; a molecule arriving while the pore is occupied,
    // clogged or gated (or that would still be inside at the next closure)
    // is lost.
    double t = 0.0;
    double busy_until = 0.0;
    std::size_t next_closure = 0;
    for (;;) {
        t += positive_exponential(rng, 1.0 / rate);
        if (t >= duration_s) break;
        while (next_closure < h.closures.size() && h.closures[next_closure].end <= t) ++next_closure;
        if (t < busy_until) continue;
        if (next_closure < h.closures.size() && h.closures[next_closure].start <= t) continue;
        TranslocationEvent ev = sample_event(molecule, config, calib, rng);
        double end = t + ev.duration_us() * 1e-6;
        if (next_closure < h.closures.size() && end > h.closures[next_closure].start) continue;
        ev.t_start_s = t;
        busy_until = end;
        h.events.push_back(std::move(ev));
    }
    return h;
}

void add_over(std::vector<float>& samples, double fs, double start_s, double end_s, double delta)
{
    const auto n = samples.size();
    auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(start_s * fs)));
    auto last = static_cast<std::size_t>(std::max(0.0, std::ceil(end_s * fs)));
    first = std::min(first, n);
    last = std::min(last, n);
    for (std::size_t i = first; i < last; ++i)
        samples[i] = static_cast<float>(static_cast<double>(samples[i]) + delta);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept
{
    // splitmix64 finalizer over (master, stream)
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

MoleculeSpec::MoleculeSpec(std::vector<Segment> segments) : segments_(std::move(segments))
{
    if (segments_.empty()) throw Error(ErrorCategory::Config, "molecule needs at least one segment");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (segments_[i].count == 0) throw Error(ErrorCategory::Config, "segment counts must be >= 1");
        if (i > 0 && segments_[i].base == segments_[i - 1].base)
            throw Error(ErrorCategory::Config, "adjacent segments must use distinct bases");
    }
}

MoleculeSpec MoleculeSpec::a50_c100()
{
    return MoleculeSpec({{Nucleotide::A, 50}, {Nucleotide::C, 100}});
}

MoleculeSpec MoleculeSpec::ac60() { return parse("(AC)60"); }

MoleculeSpec MoleculeSpec::from_sequence(const codec::BaseSequence& seq)
{
    std::vector<Segment> segs;
    for (const auto& r : codec::runs(seq)) segs.push_back({r.base, r.length});
    return MoleculeSpec(std::move(segs));
}

MoleculeSpec MoleculeSpec::parse(std::string_view text)
{
    // Grammar: item* where item = BASE [count] | '(' item* ')' count
    std::size_t pos = 0;
    auto fail = [&](const std::string& why) {
        return Error(ErrorCategory::Config, "molecule '" + std::string(text) + "': " + why);
    };
    auto read_count = [&](std::size_t fallback) {
        std::size_t n = 0;
        bool any = false;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            n = n * 10 + static_cast<std::size_t>(text[pos++] - '0');
            any = true;
        }
        return any ? n : fallback;
    };
    auto parse_items = [&](auto&& self, codec::BaseSequence& out) -> void {
        while (pos < text.size() && text[pos] != ')') {
            if (text[pos] == '(') {
                ++pos;
                codec::BaseSequence inner;
                self(self, inner);
                if (pos >= text.size() || text[pos] != ')') throw fail("unbalanced parenthesis");
                ++pos;
                std::size_t reps = read_count(0);
                if (reps == 0) throw fail("group needs a repeat count");
                for (std::size_t r = 0; r < reps; ++r)
                    for (auto b : inner.bases()) out.push_back(b);
            } else {
                Nucleotide base = codec::nucleotide_from_char(text[pos++]);
                std::size_t n = read_count(1);
                if (n == 0) throw fail("zero-length segment");
                out.append(base, n);
            }
        }
    };
    codec::BaseSequence seq;
    parse_items(parse_items, seq);
    if (pos != text.size()) throw fail("unexpected ')'");
    return from_sequence(seq);
}

std::string MoleculeSpec::to_string() const
{
    std::string out;
    for (const auto& s : segments_) {
        out += codec::to_char(s.base);
        out += std::to_string(s.count);
    }
    return out;
}

std::size_t MoleculeSpec::total_bases() const noexcept
{
    std::size_t n = 0;
    for (const auto& s : segments_) n += s.count;
    return n;
}

double TranslocationEvent::duration_us() const noexcept
{
    double d = 0.0;
    for (const auto& s : substates) d += s.duration_us;
    return d;
}

double TranslocationEvent::mean_level() const noexcept
{
    double w = 0.0, sum = 0.0;
    for (const auto& s : substates) {
        w += s.duration_us;
        sum += s.level * s.duration_us;
    }
    return w > 0.0 ? sum / w : 0.0;
}

std::size_t sample_count(double duration_s, double sample_rate_hz)
{
    const double x = duration_s * sample_rate_hz;
    if (!(x > 0.0)) return 0;
    double n = std::floor(x);
    if (n + 1.0 - x < 1e-9 * x) n += 1.0;
    return static_cast<std::size_t>(n);
}

TranslocationEvent sample_event(const MoleculeSpec& molecule, const ChannelConfig& config,
                                const CalibrationTable& calib, Rng& rng)
{
    const double v = config.voltage_mV;
    if (!(v > 0.0)) throw Error(ErrorCategory::Precondition, "translocation needs a positive voltage");

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    TranslocationEvent ev;
    const double cf = complete_fraction(v, calib);

    if (unit(rng) >= cf) {
        std::uniform_real_distribution<double> band(calib.incomplete_level_min, calib.incomplete_level_max);
        double level = band(rng);
        ev.substates.push_back({level, positive_exponential(rng, calib.incomplete_mean_us)});
        return ev;
    }

    ev.complete = true;
    const double dwell = calib.base_dwell_us_at_ref * calib.ref_voltage_mV / v;

    if (v >= calib.bilevel_min_voltage_mV && resolvable(molecule, calib)) {
        const double p = calib.bilevel_fraction / cf;
        if (p > 1.0) throw Error(ErrorCategory::Config, "bilevel_fraction exceeds the complete fraction");
        if (unit(rng) < p) {
            ev.orientation = unit(rng) < calib.c_first_fraction ? Orientation::ThreePrimeFirst
                                                                : Orientation::FivePrimeFirst;
            std::vector<Segment> order = molecule.segments();
            if (ev.orientation == Orientation::ThreePrimeFirst) std::reverse(order.begin(), order.end());
            for (const auto& seg : order) {
                LevelStat st = *calib.level(ev.orientation, seg.base);
                double level = truncated_normal(rng, st.mean, st.sd, 0.0, 1.0);
                double d = static_cast<double>(seg.count) * dwell * jitter(rng, calib.duration_cv);
                ev.substates.push_back({level, d});
            }
            return ev;
        }
    }

    double level = truncated_normal(rng, 1.0 - monolevel_blockage(v, calib), calib.monolevel_sd, 0.0, 1.0);
    double d = static_cast<double>(molecule.total_bases()) * dwell * jitter(rng, calib.duration_cv);
    ev.substates.push_back({level, d});
    return ev;
}

Simulation synthesize_trace(const MoleculeSpec& molecule, const ChannelConfig& config, double duration_s,
                            const CalibrationTable& calib, std::uint64_t seed, unsigned threads)
{
    config.validate();
    calib.validate();
    if (!(duration_s > 0.0)) throw Error(ErrorCategory::Parameter, "duration_s must be > 0");

    Simulation sim;
    sim.open_current_pA = pore_open_current(config, calib);
    const bool gating = gating_active(config.kcl_molar, calib);
    const double rate = (!gating && config.voltage_mV > 0.0) ? capture_rate(config.voltage_mV, calib) : 0.0;

    const std::size_t n_pores = config.n_pores;
    std::vector<PoreHistory> histories(n_pores);
    auto run = [&](std::size_t p) {
        return simulate_pore(p, molecule, config, duration_s, calib, rate, gating, seed);
    };
    if (threads <= 1 || n_pores == 1) {
        for (std::size_t p = 0; p < n_pores; ++p) histories[p] = run(p);
    } else {
        for (std::size_t base = 0; base < n_pores; base += threads) {
            std::vector<std::future<PoreHistory>> jobs;
            for (std::size_t p = base; p < std::min(n_pores, base + threads); ++p)
                jobs.push_back(std::async(std::launch::async, run, p));
            for (std::size_t i = 0; i < jobs.size(); ++i) histories[base + i] = jobs[i].get();
        }
    }

    const double fs = config.sample_rate_hz;
    const double open = sim.open_current_pA;
    sim.trace.sample_rate_hz = fs;
    sim.trace.samples.assign(sample_count(duration_s, fs), static_cast<float>(open * static_cast<double>(n_pores)));

    for (std::size_t p = 0; p < n_pores; ++p) {
        for (const auto& c : histories[p].closures) {
            add_over(sim.trace.samples, fs, c.start, c.end, calib.clogged_current_pA - open);
            sim.closures.push_back({p, c.start, c.end, c.kind});
        }
        for (auto& ev : histories[p].events) {
            double t = ev.t_start_s;
            for (const auto& s : ev.substates) {
                double end = t + s.duration_us * 1e-6;
                add_over(sim.trace.samples, fs, t, end, open * s.level - open);
                t = end;
            }
            sim.events.push_back({p, std::move(ev)});
        }
    }
    std::stable_sort(sim.events.begin(), sim.events.end(), [](const PoreEvent& a, const PoreEvent& b) {
        return a.event.t_start_s < b.event.t_start_s;
    });
    std::stable_sort(sim.closures.begin(), sim.closures.end(),
                     [](const Closure& a, const Closure& b) { return a.start_s < b.start_s; });

    if (config.noise_sigma_pA > 0.0) {
        Rng noise_rng(derive_seed(seed, n_pores));
        std::normal_distribution<double> noise(0.0, config.noise_sigma_pA);
        for (auto& s : sim.trace.samples) s = static_cast<float>(static_cast<double>(s) + noise(noise_rng));
    }

    if (config.lowpass && !sim.trace.samples.empty()) {
        const double alpha = 1.0 - std::exp(-2.0 * std::numbers::pi * config.bandwidth_kHz * 1e3 / fs);
        double y = sim.trace.samples.front();
        for (auto& s : sim.trace.samples) {
            y += alpha * (static_cast<double>(s) - y);
            s = static_cast<float>(y);
        }
    }
    return sim;
}

std::size_t open_pores_at(const Simulation& sim, std::size_t n_pores, double t_s)
{
    std::vector<bool> closed(n_pores, false);
    for (const auto& c : sim.closures)
        if (c.pore < n_pores && c.start_s <= t_s && t_s < c.end_s) closed[c.pore] = true;
    return static_cast<std::size_t>(std::count(closed.begin(), closed.end(), false));
}

} // namespace molstore::poresim
