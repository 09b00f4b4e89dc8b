#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "molstore/calibration.hpp"
#include "molstore/chipmodel.hpp"
#include "molstore/codec.hpp"
#include "molstore/error.hpp"
#include "molstore/kvfile.hpp"
#include "molstore/poresim.hpp"
#include "molstore/reader.hpp"
#include "molstore/trace_io.hpp"

namespace molstore::cli {

namespace {

using kv::format_double;
using poresim::CalibrationTable;
using poresim::ChannelConfig;

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCategory::Io, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCategory::Io, "cannot write " + path);
    out << content;
    if (!out) throw Error(ErrorCategory::Io, "write failed for " + path);
}

void emit(const std::string& path, const std::string& content, std::ostream& out)
{
    if (path.empty() || path == "-")
        out << content;
    else
        write_file(path, content);
}

CalibrationTable resolve_calibration(const std::string& path)
{
    if (!path.empty()) return CalibrationTable::load(path);
    if (const char* env = std::getenv("MOLSTORE_CALIBRATION"); env && *env) return CalibrationTable::load(env);
    return {};
}

void merge(kv::KeyValues& into, const kv::KeyValues& from)
{
    for (const auto& [k, v] : from.entries()) into.set(k, v);
}

// --- encode / decode ------------------------------------------------------

struct CodecOpts {
    std::string input;
    std::string output;
    std::string mode = "direct";
    std::string scheme = "A20:C30";
    double tolerance = 0.0;
};

void check_mode(const std::string& mode)
{
    if (mode != "direct" && mode != "runlength")
        throw Error(ErrorCategory::Config, "mode must be direct or runlength, got '" + mode + "'");
}

void cmd_encode(const CodecOpts& o, std::ostream& out)
{
    check_mode(o.mode);
    auto bits = codec::parse_bits(read_file(o.input));
    codec::BaseSequence seq = o.mode == "direct"
                                  ? codec::encode_direct(bits)
                                  : codec::encode_runlength(bits, codec::RunLengthScheme::parse(o.scheme));
    emit(o.output, seq.size() ? seq.to_string() + "\n" : std::string{}, out);
}

void cmd_decode(const CodecOpts& o, std::ostream& out)
{
    check_mode(o.mode);
    auto seq = codec::BaseSequence::parse(read_file(o.input));
    codec::Bits bits = o.mode == "direct"
                           ? codec::decode_direct(seq)
                           : codec::decode_runlength(seq, codec::RunLengthScheme::parse(o.scheme), o.tolerance);
    emit(o.output, bits.empty() ? std::string{} : codec::bits_to_string(bits) + "\n", out);
}

// --- simulate -------------------------------------------------------------

struct SimulateOpts {
    std::string calibration;
    std::string molecule = "A50C100";
    std::string sequence;
    std::optional<double> voltage_mV, kcl_molar, sample_rate_hz, noise_sigma_pA, open_current_pA;
    std::optional<double> clog_rate_hz, clog_mean_s, bandwidth_kHz;
    std::optional<std::size_t> pores;
    std::vector<std::string> clogs;
    bool lowpass = false;
    std::optional<double> duration_s;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string format = "text";
    std::string output;
    std::string log;
    std::string replay;
};

poresim::ClogInterval parse_clog(const std::string& text)
{
    kv::KeyValues tmp;
    tmp.set("clogs", text);
    auto t = tmp.get_tuples("clogs");
    if (t.size() != 1 || t[0].size() != 3 || t[0][0] < 0 || t[0][0] != static_cast<double>(static_cast<std::size_t>(t[0][0])))
        throw Error(ErrorCategory::Config, "--clog expects pore:start_s:end_s, got '" + text + "'");
    return {static_cast<std::size_t>(t[0][0]), t[0][1], t[0][2]};
}

void cmd_simulate(const SimulateOpts& o, std::ostream& out)
{
    CalibrationTable calib;
    ChannelConfig config;
    std::string molecule_text;
    double duration_s = 0.0;
    std::uint64_t seed = 0;
    std::string format = o.format;

    if (!o.replay.empty()) {
        auto header = kv::KeyValues::parse_header(read_file(o.replay));
        calib = CalibrationTable::from_kv(header);
        config = ChannelConfig::from_kv(header);
        molecule_text = header.at("molecule");
        duration_s = header.get_double("duration_s");
        seed = static_cast<std::uint64_t>(std::stoull(header.at("seed")));
        if (header.contains("format")) format = header.at("format");
    } else {
        if (!o.seed) throw Error(ErrorCategory::Config, "simulate needs an explicit --seed");
        if (!o.duration_s) throw Error(ErrorCategory::Config, "simulate needs --duration-s");
        calib = resolve_calibration(o.calibration);
        if (o.voltage_mV) config.voltage_mV = *o.voltage_mV;
        if (o.kcl_molar) config.kcl_molar = *o.kcl_molar;
        if (o.sample_rate_hz) config.sample_rate_hz = *o.sample_rate_hz;
        if (o.noise_sigma_pA) config.noise_sigma_pA = *o.noise_sigma_pA;
        if (o.pores) config.n_pores = *o.pores;
        if (o.open_current_pA) config.open_current_pA = *o.open_current_pA;
        if (o.clog_rate_hz) config.clog_rate_hz = *o.clog_rate_hz;
        if (o.clog_mean_s) config.clog_mean_s = *o.clog_mean_s;
        if (o.bandwidth_kHz) config.bandwidth_kHz = *o.bandwidth_kHz;
        config.lowpass = o.lowpass;
        for (const auto& c : o.clogs) config.clogs.push_back(parse_clog(c));
        molecule_text = o.sequence.empty()
                            ? o.molecule
                            : poresim::MoleculeSpec::from_sequence(codec::BaseSequence::parse(read_file(o.sequence))).to_string();
        duration_s = *o.duration_s;
        seed = *o.seed;
    }
    config.validate();
    const auto fmt = poresim::trace_format_from_name(format);
    const auto molecule = poresim::MoleculeSpec::parse(molecule_text);

    auto sim = poresim::synthesize_trace(molecule, config, duration_s, calib, seed, o.threads);

    kv::KeyValues header;
    merge(header, calib.to_kv());
    merge(header, config.to_kv());
    header.set("seed", std::to_string(seed));
    header.set("molecule", molecule.to_string());
    header.set("duration_s", format_double(duration_s));
    header.set("format", format);
    header.set("open_current_per_pore_pA", format_double(sim.open_current_pA));

    poresim::save_trace(o.output, sim.trace, fmt);
    std::ostringstream log;
    poresim::write_ground_truth(log, header, sim);
    write_file(o.log.empty() ? o.output + ".events.csv" : o.log, log.str());

    std::size_t complete = 0;
    for (const auto& e : sim.events) complete += e.event.complete ? 1 : 0;
    out << "samples = " << sim.trace.samples.size() << "\n"
        << "events = " << sim.events.size() << "\n"
        << "complete_events = " << complete << "\n"
        << "closures = " << sim.closures.size() << "\n";
}

// --- read / stats -----------------------------------------------------------

struct ReadOpts {
    std::string calibration;
    std::string trace;
    double voltage_mV = 210.0;
    double kcl_molar = 1.0;
    std::size_t pores = 1;
    std::optional<double> open_current_pA, clogged_current_pA, noise_sigma_pA;
    double threshold = 0.8;
    double min_duration_us = 10.0;
    double min_substate_us = 20.0;
    double census_min_dwell_us = 5000.0;
    std::string molecule = "A50C100";
    std::string scheme = "A20:C30";
    double tolerance = 0.3;
    std::string events;
    std::string summary;
    std::string payload;
    std::string pairs;
    std::string census;
};

struct ReadRun {
    poresim::CurrentTrace trace;
    reader::ReadParams params;
    reader::ReadResult result;
    CalibrationTable calib;
    kv::KeyValues header;
};

ReadRun run_reader(const ReadOpts& o)
{
    ReadRun r;
    r.calib = resolve_calibration(o.calibration);
    r.trace = poresim::load_trace(o.trace);
    auto molecule = poresim::MoleculeSpec::parse(o.molecule);

    auto& p = r.params;
    p.voltage_mV = o.voltage_mV;
    p.n_pores = o.pores;
    p.open_current_pA = o.open_current_pA ? *o.open_current_pA : poresim::open_current(o.voltage_mV, o.kcl_molar, r.calib);
    p.clogged_current_pA = o.clogged_current_pA ? *o.clogged_current_pA : r.calib.clogged_current_pA;
    p.threshold_fraction = o.threshold;
    p.min_duration_us = o.min_duration_us;
    p.min_substate_us = o.min_substate_us;
    p.noise_sigma_pA = o.noise_sigma_pA ? *o.noise_sigma_pA : reader::estimate_noise_sigma(r.trace);
    p.molecule_bases = molecule.total_bases();
    p.five_prime = molecule.segments().front().base;
    p.three_prime = molecule.segments().back().base;
    p.census_min_dwell_us = o.census_min_dwell_us;
    if (p.n_pores < 1) throw Error(ErrorCategory::Config, "--pores must be >= 1");

    r.result = reader::read_trace(r.trace, p, r.calib);

    merge(r.header, r.calib.to_kv());
    r.header.set("voltage_mV", format_double(p.voltage_mV));
    r.header.set("kcl_molar", format_double(o.kcl_molar));
    r.header.set("n_pores", std::to_string(p.n_pores));
    r.header.set("open_current_per_pore_pA", format_double(p.open_current_pA));
    r.header.set("clogged_current_pA", format_double(p.clogged_current_pA));
    r.header.set("threshold_fraction", format_double(p.threshold_fraction));
    r.header.set("min_duration_us", format_double(p.min_duration_us));
    r.header.set("min_substate_us", format_double(p.min_substate_us));
    r.header.set("noise_sigma_pA", format_double(p.noise_sigma_pA));
    r.header.set("census_min_dwell_us", format_double(p.census_min_dwell_us));
    r.header.set("molecule", molecule.to_string());
    r.header.set("trace_sample_rate_hz", format_double(r.trace.sample_rate_hz));
    r.header.set("trace_samples", std::to_string(r.trace.samples.size()));
    return r;
}

kv::KeyValues stats_kv(const reader::StatsReport& s)
{
    kv::KeyValues k;
    k.set("duration_s", format_double(s.duration_s));
    k.set("open_fraction", format_double(s.open_fraction));
    k.set("complete_rate", format_double(s.complete_rate));
    k.set("partial_rate", format_double(s.partial_rate));
    k.set("total_rate", format_double(s.total_rate));
    k.set("events", std::to_string(s.duration_blockage_pairs.size()));
    for (std::size_t i = 0; i < s.pore_census_histogram.size(); ++i)
        k.set("census_samples." + std::to_string(i), std::to_string(s.pore_census_histogram[i]));
    for (const auto& c : s.census_rates) {
        const std::string pre = "census." + std::to_string(c.open_pores) + ".";
        k.set(pre + "time_s", format_double(c.time_s));
        k.set(pre + "mean_current_pA", format_double(c.mean_current_pA));
        k.set(pre + "complete_rate", format_double(c.complete_rate()));
        k.set(pre + "partial_rate", format_double(c.partial_rate()));
        k.set(pre + "total_rate", format_double(c.total_rate()));
    }
    return k;
}

void cmd_read(const ReadOpts& o, std::ostream& out)
{
    auto r = run_reader(o);
    const auto scheme = codec::RunLengthScheme::parse(o.scheme);
    r.header.set("scheme", scheme.to_string());
    r.header.set("tolerance", format_double(o.tolerance));

    std::ostringstream csv;
    csv << r.header.to_string("# ");
    csv << "start_s,duration_us,blockage_pct,class,orientation\n";
    std::string payload;
    std::size_t bilevel = 0, oriented = 0, decoded = 0;
    for (const auto& e : r.result.events) {
        csv << format_double(e.detected.t_start_s) << ',' << format_double(e.detected.duration_us) << ','
            << format_double(100.0 * (1.0 - e.detected.mean_level)) << ',' << reader::class_name(e.cls) << ','
            << poresim::orientation_name(e.orientation) << '\n';
        if (!std::holds_alternative<reader::BiLevel>(e.cls)) continue;
        ++bilevel;
        if (e.orientation == poresim::Orientation::Unknown) continue;
        ++oriented;
        try {
            auto bits = reader::decode_event(e.to_event(), scheme, r.calib, r.params.voltage_mV, o.tolerance);
            payload += codec::bits_to_string(bits) + "\n";
            ++decoded;
        } catch (const Error&) {
            // undecodable events are counted, not fatal
        }
    }

    auto summary = r.header;
    merge(summary, stats_kv(r.result.stats));
    summary.set("bilevel_events", std::to_string(bilevel));
    summary.set("oriented_events", std::to_string(oriented));
    summary.set("decoded_events", std::to_string(decoded));
    summary.set("decode_failures", std::to_string(oriented - decoded));

    if (!o.events.empty()) write_file(o.events, csv.str());
    if (!o.payload.empty()) write_file(o.payload, payload);
    emit(o.summary, summary.to_string(), out);
}

void cmd_stats(const ReadOpts& o, std::ostream& out)
{
    auto r = run_reader(o);
    const auto& s = r.result.stats;

    if (!o.pairs.empty()) {
        std::ostringstream csv;
        csv << r.header.to_string("# ") << "duration_us,blockage_pct\n";
        for (const auto& [d, b] : s.duration_blockage_pairs) csv << format_double(d) << ',' << format_double(b) << '\n';
        write_file(o.pairs, csv.str());
    }
    if (!o.census.empty()) {
        std::ostringstream csv;
        csv << r.header.to_string("# ") << "open_pores,time_s,mean_current_pA,complete_rate,partial_rate,total_rate\n";
        for (const auto& c : s.census_rates)
            csv << c.open_pores << ',' << format_double(c.time_s) << ',' << format_double(c.mean_current_pA) << ','
                << format_double(c.complete_rate()) << ',' << format_double(c.partial_rate()) << ','
                << format_double(c.total_rate()) << '\n';
        write_file(o.census, csv.str());
    }
    auto summary = r.header;
    merge(summary, stats_kv(s));
    emit(o.summary, summary.to_string(), out);
}

// --- plan -----------------------------------------------------------------

struct PlanOpts {
    std::string scenario;
    std::vector<std::string> overrides;
    std::string output;
    std::string csv;
};

void cmd_plan(const PlanOpts& o, std::ostream& out)
{
    kv::KeyValues kvs;
    if (!o.scenario.empty()) kvs = kv::KeyValues::load(o.scenario);
    for (const auto& s : o.overrides) merge(kvs, kv::KeyValues::parse(s));
    auto scenario = chip::Scenario::from_kv(kvs);
    auto report = chip::plan(scenario);

    auto text = scenario.to_kv();
    merge(text, report.to_kv());
    emit(o.output, text.to_string(), out);
    if (!o.csv.empty()) write_file(o.csv, chip::ThroughputReport::csv_header() + "\n" + report.csv_row() + "\n");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Molecular data storage: codec, nanopore simulator, trace reader, chip planner", "molstore"};
    app.require_subcommand(1);

    CodecOpts enc, dec;
    auto* encode = app.add_subcommand("encode", "Encode a bit payload into a nucleotide sequence");
    encode->add_option("input,--input", enc.input, "Payload file (0/1 characters)")->required();
    encode->add_option("-o,--output", enc.output, "Sequence file (default stdout)");
    encode->add_option("--mode", enc.mode, "direct | runlength")->capture_default_str();
    encode->add_option("--scheme", enc.scheme, "Run-length scheme, zero run first")->capture_default_str();

    auto* decode = app.add_subcommand("decode", "Decode a nucleotide sequence into bits");
    decode->add_option("input,--input", dec.input, "Sequence file")->required();
    decode->add_option("-o,--output", dec.output, "Payload file (default stdout)");
    decode->add_option("--mode", dec.mode, "direct | runlength")->capture_default_str();
    decode->add_option("--scheme", dec.scheme, "Run-length scheme, zero run first")->capture_default_str();
    decode->add_option("--tolerance", dec.tolerance, "Relative run-length tolerance")->capture_default_str();

    SimulateOpts sim;
    auto* simulate = app.add_subcommand("simulate", "Synthesize a translocation current trace");
    simulate->add_option("--calibration", sim.calibration, "Calibration key-value file");
    simulate->add_option("--molecule", sim.molecule, "Molecule, e.g. A50C100 or (AC)60")->capture_default_str();
    simulate->add_option("--sequence", sim.sequence, "Sequence file to use as the molecule");
    simulate->add_option("--voltage-mv", sim.voltage_mV, "Applied voltage (mV)");
    simulate->add_option("--kcl-molar", sim.kcl_molar, "KCl concentration (mol/L)");
    simulate->add_option("--pores", sim.pores, "Number of pores");
    simulate->add_option("--duration-s", sim.duration_s, "Trace duration (s)");
    simulate->add_option("--seed", sim.seed, "64-bit seed");
    simulate->add_option("--sample-rate-hz", sim.sample_rate_hz, "Sample rate (Hz)");
    simulate->add_option("--noise-sigma-pa", sim.noise_sigma_pA, "Gaussian noise SD (pA)");
    simulate->add_option("--open-current-pa", sim.open_current_pA, "Per-pore open current override (pA)");
    simulate->add_option("--clog", sim.clogs, "Scripted clog pore:start_s:end_s (repeatable)");
    simulate->add_option("--clog-rate-hz", sim.clog_rate_hz, "Spontaneous clog rate per pore");
    simulate->add_option("--clog-mean-s", sim.clog_mean_s, "Mean spontaneous clog length");
    simulate->add_flag("--lowpass", sim.lowpass, "Apply the amplifier low-pass");
    simulate->add_option("--bandwidth-khz", sim.bandwidth_kHz, "Amplifier bandwidth (kHz)");
    simulate->add_option("--threads", sim.threads, "Worker threads for per-pore simulation")->capture_default_str();
    simulate->add_option("--format", sim.format, "text | binary")->capture_default_str();
    simulate->add_option("-o,--output", sim.output, "Trace file")->required();
    simulate->add_option("--log", sim.log, "Ground-truth log (default <output>.events.csv)");
    simulate->add_option("--replay", sim.replay, "Re-run the configuration recorded in a ground-truth log");

    ReadOpts rd, st;
    auto add_read_opts = [](CLI::App* c, ReadOpts& o) {
        c->add_option("trace,--trace", o.trace, "Trace file (text or binary)")->required();
        c->add_option("--calibration", o.calibration, "Calibration key-value file");
        c->add_option("--voltage-mv", o.voltage_mV, "Applied voltage (mV)")->capture_default_str();
        c->add_option("--kcl-molar", o.kcl_molar, "KCl concentration (mol/L)")->capture_default_str();
        c->add_option("--pores", o.pores, "Number of pores")->capture_default_str();
        c->add_option("--open-current-pa", o.open_current_pA, "Per-pore open current (default from calibration)");
        c->add_option("--clogged-current-pa", o.clogged_current_pA, "Clogged-pore current (default from calibration)");
        c->add_option("--noise-sigma-pa", o.noise_sigma_pA, "Noise SD (default estimated from the trace)");
        c->add_option("--threshold", o.threshold, "Detection threshold, fraction of open current")->capture_default_str();
        c->add_option("--min-duration-us", o.min_duration_us, "Shortest event kept")->capture_default_str();
        c->add_option("--min-substate-us", o.min_substate_us, "Shortest bi-level substate")->capture_default_str();
        c->add_option("--census-min-dwell-us", o.census_min_dwell_us, "Shortest pore-census state")->capture_default_str();
        c->add_option("--molecule", o.molecule, "Expected molecule layout")->capture_default_str();
        c->add_option("--summary", o.summary, "Summary key-value file (default stdout)");
    };
    auto* read = app.add_subcommand("read", "Detect, classify and decode events in a trace");
    add_read_opts(read, rd);
    read->add_option("--scheme", rd.scheme, "Run-length scheme, zero run first")->capture_default_str();
    read->add_option("--tolerance", rd.tolerance, "Run-length decode tolerance")->capture_default_str();
    read->add_option("--events", rd.events, "Events CSV");
    read->add_option("--payload", rd.payload, "Recovered payloads, one per decoded event");

    auto* stats = app.add_subcommand("stats", "Open fraction, event rates and pore census of a trace");
    add_read_opts(stats, st);
    stats->add_option("--pairs", st.pairs, "Duration/blockage CSV");
    stats->add_option("--census", st.census, "Per-census-state rate CSV");

    PlanOpts pl;
    auto* planc = app.add_subcommand("plan", "Chip capacity and throughput report");
    planc->add_option("scenario,--scenario", pl.scenario, "Scenario key-value file");
    planc->add_option("--set", pl.overrides, "Override key=value (repeatable)");
    planc->add_option("-o,--output", pl.output, "Report file (default stdout)");
    planc->add_option("--csv", pl.csv, "CSV report file");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << e.what() << "\n";
        return 64;
    }

    try {
        if (*encode) cmd_encode(enc, out);
        else if (*decode) cmd_decode(dec, out);
        else if (*simulate) cmd_simulate(sim, out);
        else if (*read) cmd_read(rd, out);
        else if (*stats) cmd_stats(st, out);
        else if (*planc) cmd_plan(pl, out);
    } catch (const Error& e) {
        err << "error: " << category_name(e.category()) << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace molstore::cli
