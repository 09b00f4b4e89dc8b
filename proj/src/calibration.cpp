#include "molstore/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "molstore/error.hpp"

namespace molstore::poresim {

namespace {

Error config_error(const std::string& what) { return Error(ErrorCategory::Config, what); }

// Linear interpolation over knots sorted by x. Returns nullopt outside.
std::optional<double> interpolate(const std::vector<std::pair<double, double>>& knots, double x)
{
    if (knots.empty() || x < knots.front().first || x > knots.back().first) return std::nullopt;
    auto hi = std::lower_bound(knots.begin(), knots.end(), x,
                               [](const auto& k, double v) { return k.first < v; });
    if (hi->first == x) return hi->second;
    auto lo = std::prev(hi);
    double t = (x - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

double interpolate_clamped(const std::vector<std::pair<double, double>>& knots, double x)
{
    if (x <= knots.front().first) return knots.front().second;
    if (x >= knots.back().first) return knots.back().second;
    return *interpolate(knots, x);
}

template <typename Proj>
std::vector<std::pair<double, double>> rate_column(const std::vector<RatePoint>& rates, Proj proj)
{
    std::vector<std::pair<double, double>> out;
    out.reserve(rates.size());
    for (const auto& r : rates) out.emplace_back(r.voltage_mV, proj(r));
    return out;
}

const char* level_key_prefix(Orientation o)
{
    return o == Orientation::ThreePrimeFirst ? "level.3p." : "level.5p.";
}

std::vector<std::pair<double, double>> pairs_from(const kv::KeyValues& kvs, const std::string& key)
{
    std::vector<std::pair<double, double>> out;
    for (const auto& t : kvs.get_tuples(key)) {
        if (t.size() != 2) throw config_error(key + ": expected entries of the form x:y");
        out.emplace_back(t[0], t[1]);
    }
    return out;
}

std::vector<std::vector<double>> tuples_from(const std::vector<std::pair<double, double>>& v)
{
    std::vector<std::vector<double>> out;
    for (const auto& [a, b] : v) out.push_back({a, b});
    return out;
}

} // namespace

const char* orientation_name(Orientation o) noexcept
{
    switch (o) {
    case Orientation::ThreePrimeFirst: return "three_prime_first";
    case Orientation::FivePrimeFirst: return "five_prime_first";
    case Orientation::Unknown: return "unknown";
    }
    return "unknown";
}

Orientation orientation_from_name(std::string_view name)
{
    if (name == "three_prime_first") return Orientation::ThreePrimeFirst;
    if (name == "five_prime_first") return Orientation::FivePrimeFirst;
    if (name == "unknown") return Orientation::Unknown;
    throw Error(ErrorCategory::Format, "unknown orientation '" + std::string(name) + "'");
}

std::optional<LevelStat> CalibrationTable::level(Orientation o, Nucleotide base) const
{
    if (o == Orientation::Unknown) return std::nullopt;
    return level_stats[o == Orientation::ThreePrimeFirst ? 0 : 1][static_cast<std::size_t>(base)];
}

void CalibrationTable::set_level(Orientation o, Nucleotide base, LevelStat s)
{
    if (o == Orientation::Unknown) throw config_error("level statistics need a known orientation");
    level_stats[o == Orientation::ThreePrimeFirst ? 0 : 1][static_cast<std::size_t>(base)] = s;
}

void CalibrationTable::validate() const
{
    if (iv_points.size() < 2) throw config_error("iv_points needs at least two entries");
    if (std::find(iv_points.begin(), iv_points.end(), std::pair{0.0, 0.0}) == iv_points.end())
        throw config_error("iv_points must contain (0, 0)");
    for (std::size_t i = 1; i < iv_points.size(); ++i) {
        if (!(iv_points[i].first > iv_points[i - 1].first))
            throw config_error("iv_points voltages must be strictly increasing");
        if (!(iv_points[i].second > iv_points[i - 1].second))
            throw config_error("open current must be strictly increasing in voltage");
    }

    if (event_rates.empty()) throw config_error("event_rates is empty");
    for (std::size_t i = 0; i < event_rates.size(); ++i) {
        const auto& r = event_rates[i];
        if (!(r.events_per_s > 0.0)) throw config_error("event_rates must be positive");
        if (!(r.complete_fraction > 0.0 && r.complete_fraction <= 1.0))
            throw config_error("complete fraction must lie in (0, 1]");
        if (i > 0 && !(r.voltage_mV > event_rates[i - 1].voltage_mV &&
                       r.events_per_s > event_rates[i - 1].events_per_s))
            throw config_error("event_rates must be strictly increasing in voltage");
    }

    for (const auto& row : level_stats)
        for (const auto& s : row)
            if (s && !(s->mean > 0.0 && s->mean < 1.0 && s->sd > 0.0))
                throw config_error("level means must lie in (0, 1) with positive SD");

    if (monolevel_blockage.empty()) throw config_error("monolevel_blockage is empty");
    for (std::size_t i = 0; i < monolevel_blockage.size(); ++i) {
        const auto& [v, b] = monolevel_blockage[i];
        if (!(b > 0.0 && b < 1.0)) throw config_error("monolevel blockage must lie in (0, 1)");
        if (i > 0 && !(v > monolevel_blockage[i - 1].first && b < monolevel_blockage[i - 1].second))
            throw config_error("monolevel blockage must be strictly decreasing in voltage");
    }

    if (!(clogged_current_pA >= 0.0)) throw config_error("clogged_current_pA must be >= 0");
    if (!(base_dwell_us_at_ref > 0.0)) throw config_error("base_dwell_us_at_ref must be > 0");
    if (!(ref_voltage_mV > 0.0)) throw config_error("ref_voltage_mV must be > 0");
    if (!(bilevel_fraction >= 0.0 && bilevel_fraction <= 1.0))
        throw config_error("bilevel_fraction must lie in [0, 1]");
    if (!(c_first_fraction >= 0.0 && c_first_fraction <= 1.0))
        throw config_error("c_first_fraction must lie in [0, 1]");
    if (!(gating_threshold_molar > 0.0)) throw config_error("gating_threshold_molar must be > 0");
    if (!(gating_open_dwell_ms > 0.0 && gating_closed_dwell_ms > 0.0))
        throw config_error("gating dwell times must be > 0");
    if (!(monolevel_sd > 0.0)) throw config_error("monolevel_sd must be > 0");
    if (!(incomplete_level_min > 0.0 && incomplete_level_min <= incomplete_level_max &&
          incomplete_level_max < 1.0))
        throw config_error("incomplete level band must satisfy 0 < min <= max < 1");
    if (!(incomplete_mean_us > 0.0)) throw config_error("incomplete_mean_us must be > 0");
    if (!(duration_cv >= 0.0)) throw config_error("duration_cv must be >= 0");

    // Bi-level events are a subset of complete ones.
    for (const auto& r : event_rates)
        if (r.voltage_mV >= bilevel_min_voltage_mV && bilevel_fraction > r.complete_fraction)
            throw config_error("bilevel_fraction exceeds the complete fraction at " +
                               kv::format_double(r.voltage_mV) + " mV");
}

CalibrationTable CalibrationTable::from_kv(const kv::KeyValues& kvs) { return from_kv(kvs, CalibrationTable{}); }

CalibrationTable CalibrationTable::from_kv(const kv::KeyValues& kvs, CalibrationTable c)
{
    auto num = [&](const char* key, double& field) {
        if (kvs.contains(key)) field = kvs.get_double(key);
    };
    if (kvs.contains("iv_points")) c.iv_points = pairs_from(kvs, "iv_points");
    if (kvs.contains("monolevel_blockage")) c.monolevel_blockage = pairs_from(kvs, "monolevel_blockage");
    if (kvs.contains("event_rates")) {
        c.event_rates.clear();
        for (const auto& t : kvs.get_tuples("event_rates")) {
            if (t.size() != 3) throw config_error("event_rates: expected voltage:rate:complete_fraction");
            c.event_rates.push_back({t[0], t[1], t[2]});
        }
    }
    num("clogged_current_pA", c.clogged_current_pA);
    num("base_dwell_us_at_ref", c.base_dwell_us_at_ref);
    num("ref_voltage_mV", c.ref_voltage_mV);
    num("bilevel_min_voltage_mV", c.bilevel_min_voltage_mV);
    num("bilevel_fraction", c.bilevel_fraction);
    num("c_first_fraction", c.c_first_fraction);
    num("gating_threshold_molar", c.gating_threshold_molar);
    num("gating_open_dwell_ms", c.gating_open_dwell_ms);
    num("gating_closed_dwell_ms", c.gating_closed_dwell_ms);
    num("monolevel_sd", c.monolevel_sd);
    num("incomplete_level_min", c.incomplete_level_min);
    num("incomplete_level_max", c.incomplete_level_max);
    num("incomplete_mean_us", c.incomplete_mean_us);
    num("duration_cv", c.duration_cv);
    for (auto o : {Orientation::ThreePrimeFirst, Orientation::FivePrimeFirst}) {
        for (char b : {'A', 'C', 'G', 'T'}) {
            std::string key = level_key_prefix(o) + std::string(1, b);
            if (!kvs.contains(key)) continue;
            auto t = kvs.get_tuples(key);
            if (t.size() != 1 || t[0].size() != 2) throw config_error(key + ": expected mean:sd");
            c.set_level(o, codec::nucleotide_from_char(b), {t[0][0], t[0][1]});
        }
    }
    c.validate();
    return c;
}

CalibrationTable CalibrationTable::load(const std::string& path)
{
    return from_kv(kv::KeyValues::load(path));
}

kv::KeyValues CalibrationTable::to_kv() const
{
    using kv::format_double;
    kv::KeyValues out;
    out.set("iv_points", kv::format_tuples(tuples_from(iv_points)));
    out.set("monolevel_blockage", kv::format_tuples(tuples_from(monolevel_blockage)));
    std::vector<std::vector<double>> rates;
    for (const auto& r : event_rates) rates.push_back({r.voltage_mV, r.events_per_s, r.complete_fraction});
    out.set("event_rates", kv::format_tuples(rates));
    out.set("clogged_current_pA", format_double(clogged_current_pA));
    out.set("base_dwell_us_at_ref", format_double(base_dwell_us_at_ref));
    out.set("ref_voltage_mV", format_double(ref_voltage_mV));
    out.set("bilevel_min_voltage_mV", format_double(bilevel_min_voltage_mV));
    out.set("bilevel_fraction", format_double(bilevel_fraction));
    out.set("c_first_fraction", format_double(c_first_fraction));
    out.set("gating_threshold_molar", format_double(gating_threshold_molar));
    out.set("gating_open_dwell_ms", format_double(gating_open_dwell_ms));
    out.set("gating_closed_dwell_ms", format_double(gating_closed_dwell_ms));
    out.set("monolevel_sd", format_double(monolevel_sd));
    out.set("incomplete_level_min", format_double(incomplete_level_min));
    out.set("incomplete_level_max", format_double(incomplete_level_max));
    out.set("incomplete_mean_us", format_double(incomplete_mean_us));
    out.set("duration_cv", format_double(duration_cv));
    for (auto o : {Orientation::ThreePrimeFirst, Orientation::FivePrimeFirst})
        for (char b : {'A', 'C', 'G', 'T'})
            if (auto s = level(o, codec::nucleotide_from_char(b)))
                out.set(level_key_prefix(o) + std::string(1, b),
                        format_double(s->mean) + ":" + format_double(s->sd));
    return out;
}

void ChannelConfig::validate() const
{
    if (!(kcl_molar > 0.0)) throw config_error("kcl_molar must be > 0");
    if (!(sample_rate_hz > 0.0)) throw config_error("sample_rate_hz must be > 0");
    if (!(noise_sigma_pA >= 0.0)) throw config_error("noise_sigma_pA must be >= 0");
    if (n_pores < 1) throw config_error("n_pores must be >= 1");
    if (lowpass && !(bandwidth_kHz > 0.0)) throw config_error("bandwidth_kHz must be > 0");
    if (open_current_pA && !std::isfinite(*open_current_pA))
        throw config_error("open_current_pA must be finite");
    if (!(clog_rate_hz >= 0.0)) throw config_error("clog_rate_hz must be >= 0");
    if (clog_rate_hz > 0.0 && !(clog_mean_s > 0.0)) throw config_error("clog_mean_s must be > 0");
    for (const auto& c : clogs) {
        if (c.pore >= n_pores)
            throw config_error("clog interval names pore " + std::to_string(c.pore) + " but n_pores is " +
                               std::to_string(n_pores));
        if (!(c.start_s >= 0.0 && c.end_s > c.start_s))
            throw config_error("clog interval must satisfy 0 <= start < end");
    }
}

ChannelConfig ChannelConfig::from_kv(const kv::KeyValues& kvs) { return from_kv(kvs, ChannelConfig{}); }

ChannelConfig ChannelConfig::from_kv(const kv::KeyValues& kvs, ChannelConfig c)
{
    auto num = [&](const char* key, double& field) {
        if (kvs.contains(key)) field = kvs.get_double(key);
    };
    num("kcl_molar", c.kcl_molar);
    num("voltage_mV", c.voltage_mV);
    num("bandwidth_kHz", c.bandwidth_kHz);
    num("sample_rate_hz", c.sample_rate_hz);
    num("noise_sigma_pA", c.noise_sigma_pA);
    num("clog_rate_hz", c.clog_rate_hz);
    num("clog_mean_s", c.clog_mean_s);
    if (kvs.contains("lowpass")) c.lowpass = kvs.get_int("lowpass") != 0;
    if (kvs.contains("n_pores")) {
        auto n = kvs.get_int("n_pores");
        if (n < 1) throw config_error("n_pores must be >= 1");
        c.n_pores = static_cast<std::size_t>(n);
    }
    if (kvs.contains("open_current_pA")) {
        if (kvs.at("open_current_pA").empty() || kvs.at("open_current_pA") == "calibrated")
            c.open_current_pA.reset();
        else
            c.open_current_pA = kvs.get_double("open_current_pA");
    }
    if (kvs.contains("clogs")) {
        c.clogs.clear();
        for (const auto& t : kvs.get_tuples("clogs")) {
            if (t.size() != 3 || t[0] < 0 || t[0] != std::floor(t[0]))
                throw config_error("clogs: expected pore:start_s:end_s");
            c.clogs.push_back({static_cast<std::size_t>(t[0]), t[1], t[2]});
        }
    }
    c.validate();
    return c;
}

kv::KeyValues ChannelConfig::to_kv() const
{
    using kv::format_double;
    kv::KeyValues out;
    out.set("kcl_molar", format_double(kcl_molar));
    out.set("voltage_mV", format_double(voltage_mV));
    out.set("bandwidth_kHz", format_double(bandwidth_kHz));
    out.set("lowpass", lowpass ? "1" : "0");
    out.set("sample_rate_hz", format_double(sample_rate_hz));
    out.set("noise_sigma_pA", format_double(noise_sigma_pA));
    out.set("n_pores", std::to_string(n_pores));
    out.set("open_current_pA", open_current_pA ? format_double(*open_current_pA) : "calibrated");
    std::vector<std::vector<double>> cl;
    for (const auto& c : clogs) cl.push_back({static_cast<double>(c.pore), c.start_s, c.end_s});
    out.set("clogs", kv::format_tuples(cl));
    out.set("clog_rate_hz", format_double(clog_rate_hz));
    out.set("clog_mean_s", format_double(clog_mean_s));
    return out;
}

double open_current(double voltage_mV, double kcl_molar, const CalibrationTable& calib)
{
    if (!(kcl_molar > 0.0)) throw Error(ErrorCategory::Parameter, "kcl_molar must be > 0");
    auto i = interpolate(calib.iv_points, voltage_mV);
    if (!i)
        throw Error(ErrorCategory::Range,
                    "voltage " + kv::format_double(voltage_mV) + " mV outside the I-V table [" +
                        kv::format_double(calib.iv_points.front().first) + ", " +
                        kv::format_double(calib.iv_points.back().first) + "]");
    return *i * kcl_molar;
}

double pore_open_current(const ChannelConfig& config, const CalibrationTable& calib)
{
    if (config.open_current_pA) return *config.open_current_pA;
    return open_current(config.voltage_mV, config.kcl_molar, calib);
}

bool gating_active(double kcl_molar, const CalibrationTable& calib)
{
    if (!(kcl_molar > 0.0)) throw Error(ErrorCategory::Parameter, "kcl_molar must be > 0");
    return kcl_molar >= calib.gating_threshold_molar;
}

double capture_rate(double voltage_mV, const CalibrationTable& calib)
{
    auto r = interpolate(rate_column(calib.event_rates, [](const RatePoint& p) { return p.events_per_s; }),
                         voltage_mV);
    if (!r)
        throw Error(ErrorCategory::Range,
                    "voltage " + kv::format_double(voltage_mV) + " mV outside the capture-rate table [" +
                        kv::format_double(calib.event_rates.front().voltage_mV) + ", " +
                        kv::format_double(calib.event_rates.back().voltage_mV) + "]");
    return *r;
}

double complete_fraction(double voltage_mV, const CalibrationTable& calib)
{
    return interpolate_clamped(
        rate_column(calib.event_rates, [](const RatePoint& p) { return p.complete_fraction; }), voltage_mV);
}

double monolevel_blockage(double voltage_mV, const CalibrationTable& calib)
{
    return interpolate_clamped(calib.monolevel_blockage, voltage_mV);
}

double mean_duration(double voltage_mV, double n_bases, const CalibrationTable& calib)
{
    if (!(voltage_mV > 0.0))
        throw Error(ErrorCategory::Precondition, "translocation needs a positive voltage");
    return n_bases * calib.base_dwell_us_at_ref * calib.ref_voltage_mV / voltage_mV;
}

} // namespace molstore::poresim
