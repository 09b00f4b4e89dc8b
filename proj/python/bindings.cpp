#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "molstore/calibration.hpp"
#include "molstore/chipmodel.hpp"
#include "molstore/codec.hpp"
#include "molstore/error.hpp"
#include "molstore/poresim.hpp"
#include "molstore/reader.hpp"
#include "molstore/trace_io.hpp"

namespace py = pybind11;
using namespace molstore;

namespace {

codec::Bits to_bits(const std::vector<int>& v)
{
    codec::Bits b;
    b.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 0 && v[i] != 1) throw Error(ErrorCategory::Alphabet, "bits must be 0 or 1", i);
        b.push_back(static_cast<std::uint8_t>(v[i]));
    }
    return b;
}

std::vector<int> from_bits(const codec::Bits& b) { return {b.begin(), b.end()}; }

poresim::CalibrationTable calibration(const std::optional<std::string>& path)
{
    return path ? poresim::CalibrationTable::load(*path) : poresim::CalibrationTable{};
}

poresim::ChannelConfig channel(const py::dict& overrides)
{
    kv::KeyValues k;
    for (auto [key, value] : overrides) k.set(py::str(key), py::str(value));
    return poresim::ChannelConfig::from_kv(k);
}

py::array_t<float> samples_array(const poresim::CurrentTrace& t)
{
    py::array_t<float> a(static_cast<py::ssize_t>(t.samples.size()));
    std::copy(t.samples.begin(), t.samples.end(), a.mutable_data());
    return a;
}

poresim::CurrentTrace trace_from(py::array_t<float, py::array::c_style | py::array::forcecast> samples, double rate)
{
    poresim::CurrentTrace t;
    t.sample_rate_hz = rate;
    t.samples.assign(samples.data(), samples.data() + samples.size());
    return t;
}

py::dict event_dict(const poresim::TranslocationEvent& e)
{
    py::list levels, durations;
    for (const auto& s : e.substates) {
        levels.append(s.level);
        durations.append(s.duration_us);
    }
    py::dict d;
    d["t_start_s"] = e.t_start_s;
    d["complete"] = e.complete;
    d["orientation"] = poresim::orientation_name(e.orientation);
    d["levels"] = levels;
    d["durations_us"] = durations;
    return d;
}

py::dict kv_dict(const kv::KeyValues& k)
{
    py::dict d;
    for (const auto& [key, value] : k.entries()) d[py::str(key)] = value;
    return d;
}

} // namespace

PYBIND11_MODULE(_molstore, m)
{
    m.doc() = "Molecular data storage: codec, nanopore simulator, trace reader, chip planner";

    static py::exception<Error> error(m, "MolstoreError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, (std::string(category_name(e.category())) + ": " + e.what()).c_str());
        }
    });

    m.def("encode_direct", [](const std::vector<int>& bits) { return codec::encode_direct(to_bits(bits)).to_string(); },
          py::arg("bits"));
    m.def("decode_direct", [](const std::string& seq) { return from_bits(codec::decode_direct(codec::BaseSequence::parse(seq))); },
          py::arg("sequence"));
    m.def(
        "encode_runlength",
        [](const std::vector<int>& bits, const std::string& scheme) {
            return codec::encode_runlength(to_bits(bits), codec::RunLengthScheme::parse(scheme)).to_string();
        },
        py::arg("bits"), py::arg("scheme") = "A20:C30");
    m.def(
        "decode_runlength",
        [](const std::string& seq, const std::string& scheme, double tolerance) {
            return from_bits(
                codec::decode_runlength(codec::BaseSequence::parse(seq), codec::RunLengthScheme::parse(scheme), tolerance));
        },
        py::arg("sequence"), py::arg("scheme") = "A20:C30", py::arg("tolerance") = 0.0);

    m.def(
        "open_current",
        [](double v, double kcl, std::optional<std::string> cal) { return poresim::open_current(v, kcl, calibration(cal)); },
        py::arg("voltage_mV"), py::arg("kcl_molar") = 1.0, py::arg("calibration") = py::none());
    m.def(
        "capture_rate", [](double v, std::optional<std::string> cal) { return poresim::capture_rate(v, calibration(cal)); },
        py::arg("voltage_mV"), py::arg("calibration") = py::none());
    m.def(
        "mean_duration",
        [](double v, double n, std::optional<std::string> cal) { return poresim::mean_duration(v, n, calibration(cal)); },
        py::arg("voltage_mV"), py::arg("n_bases"), py::arg("calibration") = py::none());

    m.def(
        "simulate",
        [](const std::string& molecule, double duration_s, std::uint64_t seed, const py::dict& config,
           std::optional<std::string> cal, unsigned threads) {
            auto sim = [&] {
                auto mol = poresim::MoleculeSpec::parse(molecule);
                auto cfg = channel(config);
                auto c = calibration(cal);
                py::gil_scoped_release release;
                return poresim::synthesize_trace(mol, cfg, duration_s, c, seed, threads);
            }();
            py::list events, closures;
            for (const auto& pe : sim.events) {
                auto d = event_dict(pe.event);
                d["pore"] = pe.pore;
                events.append(d);
            }
            for (const auto& c : sim.closures) {
                py::dict d;
                d["pore"] = c.pore;
                d["start_s"] = c.start_s;
                d["end_s"] = c.end_s;
                d["kind"] = c.kind == poresim::ClosureKind::Clog ? "clog" : "gate";
                closures.append(d);
            }
            py::dict out;
            out["samples"] = samples_array(sim.trace);
            out["sample_rate_hz"] = sim.trace.sample_rate_hz;
            out["events"] = events;
            out["closures"] = closures;
            out["open_current_pA"] = sim.open_current_pA;
            return out;
        },
        py::arg("molecule") = "A50C100", py::arg("duration_s") = 1.0, py::arg("seed") = 1, py::arg("config") = py::dict(),
        py::arg("calibration") = py::none(), py::arg("threads") = 1,
        "Synthesize a trace. `config` holds channel keys such as voltage_mV, n_pores or clogs.");

    m.def(
        "read",
        [](py::array_t<float, py::array::c_style | py::array::forcecast> samples, double sample_rate_hz,
           double voltage_mV, std::size_t n_pores, std::optional<double> open_current_pA, double threshold,
           double min_duration_us, std::optional<double> noise_sigma_pA, const std::string& molecule,
           std::optional<std::string> scheme, double tolerance, std::optional<std::string> cal) {
            auto trace = trace_from(samples, sample_rate_hz);
            auto c = calibration(cal);
            auto mol = poresim::MoleculeSpec::parse(molecule);
            reader::ReadParams p;
            p.voltage_mV = voltage_mV;
            p.n_pores = n_pores;
            p.open_current_pA = open_current_pA ? *open_current_pA : poresim::open_current(voltage_mV, 1.0, c);
            p.clogged_current_pA = c.clogged_current_pA;
            p.threshold_fraction = threshold;
            p.min_duration_us = min_duration_us;
            p.noise_sigma_pA = noise_sigma_pA ? *noise_sigma_pA : reader::estimate_noise_sigma(trace);
            p.molecule_bases = mol.total_bases();
            p.five_prime = mol.segments().front().base;
            p.three_prime = mol.segments().back().base;
            reader::ReadResult r;
            {
                py::gil_scoped_release release;
                r = reader::read_trace(trace, p, c);
            }
            std::optional<codec::RunLengthScheme> sch;
            if (scheme) sch = codec::RunLengthScheme::parse(*scheme);
            py::list events;
            for (const auto& e : r.events) {
                py::dict d;
                d["t_start_s"] = e.detected.t_start_s;
                d["duration_us"] = e.detected.duration_us;
                d["mean_level"] = e.detected.mean_level;
                d["class"] = reader::class_name(e.cls);
                d["orientation"] = poresim::orientation_name(e.orientation);
                d["bits"] = py::none();
                if (sch && std::holds_alternative<reader::BiLevel>(e.cls) && e.orientation != poresim::Orientation::Unknown) {
                    try {
                        d["bits"] = from_bits(reader::decode_event(e.to_event(), *sch, c, voltage_mV, tolerance));
                    } catch (const Error&) {
                    }
                }
                events.append(d);
            }
            py::dict stats;
            stats["duration_s"] = r.stats.duration_s;
            stats["open_fraction"] = r.stats.open_fraction;
            stats["complete_rate"] = r.stats.complete_rate;
            stats["partial_rate"] = r.stats.partial_rate;
            stats["total_rate"] = r.stats.total_rate;
            py::dict census;
            for (const auto& cr : r.stats.census_rates) {
                py::dict d;
                d["time_s"] = cr.time_s;
                d["mean_current_pA"] = cr.mean_current_pA;
                d["complete_rate"] = cr.complete_rate();
                d["partial_rate"] = cr.partial_rate();
                d["total_rate"] = cr.total_rate();
                census[py::int_(cr.open_pores)] = d;
            }
            stats["census"] = census;
            py::dict out;
            out["events"] = events;
            out["stats"] = stats;
            return out;
        },
        py::arg("samples"), py::arg("sample_rate_hz") = 1e6, py::arg("voltage_mV") = 210.0, py::arg("n_pores") = 1,
        py::arg("open_current_pA") = py::none(), py::arg("threshold") = 0.8, py::arg("min_duration_us") = 10.0,
        py::arg("noise_sigma_pA") = py::none(), py::arg("molecule") = "A50C100", py::arg("scheme") = py::none(),
        py::arg("tolerance") = 0.3, py::arg("calibration") = py::none());

    m.def("pore_state_census", &reader::pore_state_census, py::arg("sample_pA"), py::arg("open_current_pA"),
          py::arg("clogged_current_pA"), py::arg("n_pores"));

    m.def(
        "save_trace",
        [](const std::string& path, py::array_t<float, py::array::c_style | py::array::forcecast> samples,
           double sample_rate_hz, const std::string& format) {
            poresim::save_trace(path, trace_from(samples, sample_rate_hz), poresim::trace_format_from_name(format));
        },
        py::arg("path"), py::arg("samples"), py::arg("sample_rate_hz") = 1e6, py::arg("format") = "text");
    m.def(
        "load_trace",
        [](const std::string& path) {
            auto t = poresim::load_trace(path);
            return py::make_tuple(samples_array(t), t.sample_rate_hz);
        },
        py::arg("path"));

    m.def(
        "plan",
        [](const py::dict& overrides) {
            kv::KeyValues k;
            for (auto [key, value] : overrides) k.set(py::str(key), py::str(value));
            auto s = chip::Scenario::from_kv(k);
            auto out = kv_dict(s.to_kv());
            const auto report = chip::plan(s).to_kv();
            for (const auto& [key, value] : report.entries()) out[py::str(key)] = value;
            return out;
        },
        py::arg("scenario") = py::dict(), "Capacity and throughput report; values are decimal strings.");
    m.def("station_rate", &chip::station_rate, py::arg("bits_per_molecule"), py::arg("translocation_us"));
    m.def("transit_time", &chip::transit_time, py::arg("distance_cm"), py::arg("voltage_V"),
          py::arg("mobility_cm2_per_Vs") = chip::kDefaultMobility_cm2_per_Vs);
}
