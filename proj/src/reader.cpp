#include "molstore/reader.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "molstore/error.hpp"

namespace molstore::reader {

namespace {

std::size_t samples_for_us(double us, double fs)
{
    double n = us * 1e-6 * fs;
    return static_cast<std::size_t>(std::max(1.0, std::ceil(n - 1e-9)));
}

void check_detect_params(const DetectParams& p)
{
    if (!(p.open_current_pA > 0.0))
        throw Error(ErrorCategory::Parameter, "open current must be > 0 for event detection");
    if (!(p.threshold_fraction > 0.0 && p.threshold_fraction < 1.0))
        throw Error(ErrorCategory::Parameter, "threshold_fraction must lie in (0, 1)");
    if (!(p.min_duration_us >= 0.0)) throw Error(ErrorCategory::Parameter, "min_duration_us must be >= 0");
}

void detect_in(const CurrentTrace& trace, const DetectParams& p, std::size_t begin, std::size_t end,
               double baseline, std::vector<DetectedEvent>& out)
{
    const double fs = trace.sample_rate_hz;
    const double open = p.open_current_pA;
    const double threshold = baseline - (1.0 - p.threshold_fraction) * open;
    const std::size_t min_len = p.min_duration_us > 0.0 ? samples_for_us(p.min_duration_us, fs) : 1;
    const auto& x = trace.samples;

    std::size_t i = begin;
    while (i < end) {
        if (!(x[i] < threshold)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        double sum = 0.0;
        while (j < end && x[j] < threshold) sum += x[j++];
        const std::size_t n = j - i;
        if (n >= min_len) {
            DetectedEvent ev;
            ev.begin = i;
            ev.end = j;
            ev.t_start_s = static_cast<double>(i) / fs;
            ev.duration_us = static_cast<double>(n) / fs * 1e6;
            ev.baseline_pA = baseline;
            ev.open_current_pA = open;
            ev.mean_level = (sum / static_cast<double>(n) - (baseline - open)) / open;
            out.push_back(ev);
        }
        i = j;
    }
}

// Levels of the calibrated (first, second) pair in time order.
std::pair<double, double> expected_pair(const CalibrationTable& calib, Orientation o, codec::Nucleotide five,
                                        codec::Nucleotide three)
{
    auto a = calib.level(o, five);
    auto b = calib.level(o, three);
    if (!a || !b) throw Error(ErrorCategory::Config, "calibration lacks level statistics for the molecule's bases");
    return o == Orientation::ThreePrimeFirst ? std::pair{b->mean, a->mean} : std::pair{a->mean, b->mean};
}

} // namespace

std::vector<DetectedEvent> detect_events(const CurrentTrace& trace, const DetectParams& params)
{
    check_detect_params(params);
    std::vector<DetectedEvent> out;
    detect_in(trace, params, 0, trace.samples.size(), params.open_current_pA, out);
    return out;
}

std::vector<DetectedEvent> detect_events(const CurrentTrace& trace, const DetectParams& params,
                                         std::span<const CensusSegment> segments, double clogged_current_pA,
                                         std::size_t n_pores)
{
    check_detect_params(params);
    std::vector<DetectedEvent> out;
    for (const auto& seg : segments) {
        if (seg.open_pores == 0) continue;
        const double baseline = static_cast<double>(seg.open_pores) * params.open_current_pA +
                                static_cast<double>(n_pores - seg.open_pores) * clogged_current_pA;
        detect_in(trace, params, seg.begin, std::min(seg.end, trace.samples.size()), baseline, out);
    }
    return out;
}

std::vector<double> normalized_samples(const CurrentTrace& trace, const DetectedEvent& ev)
{
    std::vector<double> out;
    out.reserve(ev.end - ev.begin);
    const double offset = ev.baseline_pA - ev.open_current_pA;
    for (std::size_t i = ev.begin; i < ev.end; ++i)
        out.push_back((static_cast<double>(trace.samples[i]) - offset) / ev.open_current_pA);
    return out;
}

const char* class_name(const EventClass& c) noexcept
{
    switch (c.index()) {
    case 0: return "bilevel";
    case 1: return "monolevel";
    default: return "incomplete";
    }
}

double complete_floor_us(double voltage_mV, std::size_t n_bases, const CalibrationTable& calib, double factor)
{
    return factor * poresim::mean_duration(voltage_mV, static_cast<double>(n_bases), calib);
}

EventClass classify_event(std::span<const double> x, const ClassifyParams& p)
{
    const std::size_t n = x.size();
    const double fs = p.sample_rate_hz;
    const double duration_us = static_cast<double>(n) / fs * 1e6;

    double total = 0.0;
    for (double v : x) total += v;
    const double mean = n ? total / static_cast<double>(n) : 0.0;

    if (duration_us < p.complete_floor_us) return Incomplete{mean, duration_us};

    const std::size_t m = samples_for_us(p.min_substate_us, fs);
    if (n < 2 * m) return MonoLevel{mean, duration_us};

    // prefix sums of x and x^2
    std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        s1[i + 1] = s1[i] + x[i];
        s2[i + 1] = s2[i] + x[i] * x[i];
    }
    auto sse = [&](std::size_t a, std::size_t b) {
        const double len = static_cast<double>(b - a);
        const double s = s1[b] - s1[a];
        return (s2[b] - s2[a]) - s * s / len;
    };
    std::size_t best = 1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < n; ++k) {
        double c = sse(0, k) + sse(k, n);
        if (c < best_cost) {
            best_cost = c;
            best = k;
        }
    }
    const double m1 = s1[best] / static_cast<double>(best);
    const double m2 = (s1[n] - s1[best]) / static_cast<double>(n - best);
    if (best >= m && n - best >= m && std::abs(m1 - m2) > 3.0 * p.noise_sigma)
        return BiLevel{m1, m2, static_cast<double>(best) / fs * 1e6, static_cast<double>(n - best) / fs * 1e6};
    return MonoLevel{mean, duration_us};
}

OrientationCall infer_orientation(const BiLevel& cls, const CalibrationTable& calib, codec::Nucleotide five_prime,
                                  codec::Nucleotide three_prime, double tie_tolerance)
{
    const auto tp = expected_pair(calib, Orientation::ThreePrimeFirst, five_prime, three_prime);
    const auto fp = expected_pair(calib, Orientation::FivePrimeFirst, five_prime, three_prime);

    // tp.first is the 3' base; fp.second is the 3' base too.
    const bool three_higher_tp = tp.first > tp.second;
    const bool three_higher_fp = fp.second > fp.first;
    if (three_higher_tp != three_higher_fp)
        throw Error(ErrorCategory::Config, "calibrated levels do not order the two segments consistently");

    OrientationCall call{Orientation::Unknown, false, 0.0};
    if (std::abs(cls.first_level - cls.second_level) <= tie_tolerance) return call;

    const bool first_higher = cls.first_level > cls.second_level;
    call.orientation = (first_higher == three_higher_tp) ? Orientation::ThreePrimeFirst : Orientation::FivePrimeFirst;

    auto dist = [&](std::pair<double, double> e) {
        return std::hypot(cls.first_level - e.first, cls.second_level - e.second);
    };
    const double d_tp = dist(tp);
    const double d_fp = dist(fp);
    const Orientation nearest = d_tp <= d_fp ? Orientation::ThreePrimeFirst : Orientation::FivePrimeFirst;
    call.depth_consistent = nearest == call.orientation;
    call.depth_distance = std::min(d_tp, d_fp);
    return call;
}

std::vector<codec::Run> recover_bases(const TranslocationEvent& event, Orientation orientation,
                                      const CalibrationTable& calib, double voltage_mV)
{
    if (orientation == Orientation::Unknown)
        throw Error(ErrorCategory::Precondition, "cannot recover bases with unknown orientation");
    if (event.substates.empty()) throw Error(ErrorCategory::Precondition, "event has no substates");

    std::vector<std::pair<codec::Nucleotide, double>> means;
    for (auto b : {codec::Nucleotide::A, codec::Nucleotide::C, codec::Nucleotide::G, codec::Nucleotide::T})
        if (auto st = calib.level(orientation, b)) means.emplace_back(b, st->mean);
    if (means.empty()) throw Error(ErrorCategory::Config, "calibration has no level statistics for this orientation");

    std::vector<codec::Nucleotide> bases;
    if (event.substates.size() == 2 && means.size() >= 2) {
        // two substates are two different segments: best distinct pair
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& [b1, m1] : means)
            for (const auto& [b2, m2] : means) {
                if (b1 == b2) continue;
                double d = std::abs(event.substates[0].level - m1) + std::abs(event.substates[1].level - m2);
                if (d < best_d) {
                    best_d = d;
                    bases = {b1, b2};
                }
            }
    } else {
        for (const auto& s : event.substates) {
            auto it = std::min_element(means.begin(), means.end(), [&](const auto& a, const auto& b) {
                return std::abs(s.level - a.second) < std::abs(s.level - b.second);
            });
            bases.push_back(it->first);
        }
    }

    const double dwell = poresim::mean_duration(voltage_mV, 1.0, calib);
    std::vector<codec::Run> runs;
    for (std::size_t i = 0; i < event.substates.size(); ++i) {
        auto count = static_cast<std::size_t>(std::llround(event.substates[i].duration_us / dwell));
        if (count == 0) continue;
        if (!runs.empty() && runs.back().base == bases[i])
            runs.back().length += count;
        else
            runs.push_back({bases[i], count});
    }
    if (orientation == Orientation::ThreePrimeFirst) {
        std::reverse(runs.begin(), runs.end());
    }
    return runs;
}

codec::Bits decode_event(const TranslocationEvent& event, const codec::RunLengthScheme& scheme,
                         const CalibrationTable& calib, double voltage_mV, double tolerance)
{
    codec::BaseSequence seq;
    for (const auto& r : recover_bases(event, event.orientation, calib, voltage_mV)) seq.append(r.base, r.length);
    return codec::decode_runlength(seq, scheme, tolerance);
}

std::size_t pore_state_census(double sample_pA, double open_current_pA, double clogged_current_pA,
                              std::size_t n_pores)
{
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= n_pores; ++k) {
        double expect = static_cast<double>(k) * open_current_pA +
                        static_cast<double>(n_pores - k) * clogged_current_pA;
        double d = std::abs(sample_pA - expect);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

std::vector<CensusSegment> census_segments(const CurrentTrace& trace, double open_current_pA,
                                           double clogged_current_pA, std::size_t n_pores, double min_dwell_us)
{
    std::vector<CensusSegment> out;
    const auto& x = trace.samples;
    if (x.empty()) return out;

    struct RawRun {
        std::size_t k, begin, end;
    };
    std::vector<RawRun> raw;
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::size_t k = pore_state_census(x[i], open_current_pA, clogged_current_pA, n_pores);
        if (!raw.empty() && raw.back().k == k)
            raw.back().end = i + 1;
        else
            raw.push_back({k, i, i + 1});
    }

    const std::size_t min_len = samples_for_us(min_dwell_us, trace.sample_rate_hz);
    std::size_t state = raw.front().k;
    for (const auto& r : raw)
        if (r.end - r.begin >= min_len) {
            state = r.k;
            break;
        }

    std::size_t seg_begin = 0;
    for (const auto& r : raw) {
        if (r.end - r.begin >= min_len && r.k != state) {
            out.push_back({seg_begin, r.begin, state, 0.0});
            seg_begin = r.begin;
            state = r.k;
        }
    }
    out.push_back({seg_begin, x.size(), state, 0.0});

    for (auto& seg : out) {
        double sum = 0.0;
        for (std::size_t i = seg.begin; i < seg.end; ++i) sum += x[i];
        seg.mean_current_pA = sum / static_cast<double>(seg.end - seg.begin);
    }
    return out;
}

double estimate_noise_sigma(const CurrentTrace& trace)
{
    const auto& x = trace.samples;
    if (x.size() < 3) return 0.0;
    const std::size_t stride = std::max<std::size_t>(1, x.size() / 1000000);
    std::vector<double> d;
    d.reserve(x.size() / stride + 1);
    for (std::size_t i = 1; i < x.size(); i += stride)
        d.push_back(std::abs(static_cast<double>(x[i]) - static_cast<double>(x[i - 1])));
    auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    // |N(0, 2 sigma^2)| has median 0.6745 * sqrt(2) * sigma
    return *mid / (0.6744897501960817 * std::sqrt(2.0));
}

TranslocationEvent ClassifiedEvent::to_event() const
{
    TranslocationEvent ev;
    ev.t_start_s = detected.t_start_s;
    ev.orientation = orientation;
    if (const auto* b = std::get_if<BiLevel>(&cls)) {
        ev.complete = true;
        ev.substates = {{b->first_level, b->first_duration_us}, {b->second_level, b->second_duration_us}};
    } else if (const auto* m = std::get_if<MonoLevel>(&cls)) {
        ev.complete = true;
        ev.substates = {{m->level, m->duration_us}};
    } else {
        const auto& i = std::get<Incomplete>(cls);
        ev.substates = {{i.level, i.duration_us}};
    }
    return ev;
}

StatsReport trace_stats(const CurrentTrace& trace, std::span<const ClassifiedEvent> events,
                        std::span<const CensusSegment> segments, std::size_t n_pores)
{
    StatsReport r;
    const std::size_t n = trace.samples.size();
    r.duration_s = trace.duration_s();
    r.pore_census_histogram.assign(n_pores + 1, 0);

    std::size_t event_samples = 0;
    std::size_t complete = 0;
    for (const auto& e : events) {
        event_samples += e.detected.end - e.detected.begin;
        if (e.complete()) ++complete;
        r.duration_blockage_pairs.emplace_back(e.detected.duration_us, 100.0 * (1.0 - e.detected.mean_level));
    }
    const std::size_t partial = events.size() - complete;
    r.open_fraction = n ? 1.0 - static_cast<double>(event_samples) / static_cast<double>(n) : 1.0;
    if (r.duration_s > 0.0) {
        r.complete_rate = static_cast<double>(complete) / r.duration_s;
        r.partial_rate = static_cast<double>(partial) / r.duration_s;
    }
    r.total_rate = r.complete_rate + r.partial_rate;

    const double fs = trace.sample_rate_hz;
    std::vector<CensusRate> by_state(n_pores + 1);
    std::vector<double> current_sum(n_pores + 1, 0.0);
    for (std::size_t k = 0; k <= n_pores; ++k) by_state[k].open_pores = k;
    for (const auto& seg : segments) {
        const std::size_t k = std::min(seg.open_pores, n_pores);
        const std::size_t len = seg.end - seg.begin;
        r.pore_census_histogram[k] += len;
        by_state[k].time_s += static_cast<double>(len) / fs;
        current_sum[k] += seg.mean_current_pA * static_cast<double>(len);
    }
    for (const auto& e : events) {
        auto seg = std::upper_bound(segments.begin(), segments.end(), e.detected.begin,
                                    [](std::size_t i, const CensusSegment& s) { return i < s.begin; });
        if (seg == segments.begin()) continue;
        const std::size_t k = std::min(std::prev(seg)->open_pores, n_pores);
        if (e.complete())
            ++by_state[k].complete;
        else
            ++by_state[k].partial;
    }
    for (std::size_t k = 0; k <= n_pores; ++k) {
        const double samples = static_cast<double>(r.pore_census_histogram[k]);
        if (samples > 0) {
            by_state[k].mean_current_pA = current_sum[k] / samples;
            r.census_rates.push_back(by_state[k]);
        }
    }
    return r;
}

ReadResult read_trace(const CurrentTrace& trace, const ReadParams& p, const CalibrationTable& calib)
{
    ReadResult out;
    out.segments = census_segments(trace, p.open_current_pA, p.clogged_current_pA, p.n_pores, p.census_min_dwell_us);
    DetectParams dp{p.open_current_pA, p.threshold_fraction, p.min_duration_us};
    auto detected = detect_events(trace, dp, out.segments, p.clogged_current_pA, p.n_pores);

    ClassifyParams cp;
    cp.sample_rate_hz = trace.sample_rate_hz;
    cp.noise_sigma = p.noise_sigma_pA / p.open_current_pA;
    cp.min_substate_us = p.min_substate_us;
    cp.complete_floor_us = complete_floor_us(p.voltage_mV, p.molecule_bases, calib);

    out.events.reserve(detected.size());
    for (const auto& d : detected) {
        auto samples = normalized_samples(trace, d);
        ClassifiedEvent ce{d, classify_event(samples, cp)};
        if (const auto* b = std::get_if<BiLevel>(&ce.cls)) {
            auto call = infer_orientation(*b, calib, p.five_prime, p.three_prime);
            ce.orientation = call.orientation;
            ce.depth_consistent = call.depth_consistent;
        }
        out.events.push_back(std::move(ce));
    }
    out.stats = trace_stats(trace, out.events, out.segments, p.n_pores);
    return out;
}

} // namespace molstore::reader
