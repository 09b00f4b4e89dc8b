#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "molstore/kvfile.hpp"
#include "molstore/trace_io.hpp"

using namespace molstore;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args)
{
    std::ostringstream out, err;
    int code = molstore::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path tmp(const std::string& name)
{
    const char* env = std::getenv("MOLSTORE_TEST_TMP");
    fs::path p = fs::path(env ? env : fs::temp_directory_path().string()) / "cli";
    fs::create_directories(p);
    return p / name;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void put(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

} // namespace

TEST_CASE("cli encode and decode")
{
    put(tmp("p.txt"), "0001\n");
    auto r = invoke({"encode", tmp("p.txt").string()});
    CHECK(r.code == 0);
    CHECK(r.out == "AC\n");

    put(tmp("empty.txt"), "");
    CHECK(invoke({"encode", tmp("empty.txt").string(), "-o", tmp("empty.seq").string()}).code == 0);
    CHECK(slurp(tmp("empty.seq")).empty());

    put(tmp("p01.txt"), "01");
    CHECK(invoke({"encode", tmp("p01.txt").string(), "--mode", "runlength", "-o", tmp("p01.seq").string()}).code == 0);
    CHECK(slurp(tmp("p01.seq")) == std::string(20, 'A') + std::string(30, 'C') + "\n");
    r = invoke({"decode", tmp("p01.seq").string(), "--mode", "runlength"});
    CHECK(r.out == "01\n");
}

TEST_CASE("cli errors are one machine-parseable line")
{
    put(tmp("odd.txt"), "011");
    auto r = invoke({"encode", tmp("odd.txt").string()});
    CHECK(r.code == 2);
    CHECK(r.err == "error: length: " + r.err.substr(15));
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

    r = invoke({"frobnicate"});
    CHECK(r.code == 64);
    CHECK(r.err.rfind("error: usage: ", 0) == 0);

    r = invoke({"simulate", "-o", tmp("x.txt").string(), "--duration-s", "0.01"});
    CHECK(r.code == 2);
    CHECK(r.err.rfind("error: config: ", 0) == 0);

    r = invoke({"simulate", "-o", tmp("x.txt").string(), "--duration-s", "0.01", "--seed", "1", "--pores", "0"});
    CHECK(r.err.rfind("error: config: ", 0) == 0);

    r = invoke({"decode", tmp("missing.seq").string()});
    CHECK(r.err.rfind("error: io: ", 0) == 0);
}

TEST_CASE("cli simulate is reproducible from its own header")
{
    auto trace = tmp("sim.txt"), log = tmp("sim.log");
    auto r = invoke({"simulate", "--seed", "1", "--duration-s", "0.3", "--pores", "2", "--voltage-mv", "210", "-o",
                  trace.string(), "--log", log.string(), "--threads", "2"});
    REQUIRE(r.code == 0);
    auto first = slurp(trace), first_log = slurp(log);

    CHECK(invoke({"simulate", "--seed", "1", "--duration-s", "0.3", "--pores", "2", "--voltage-mv", "210", "-o",
               trace.string(), "--log", log.string()})
              .code == 0);
    CHECK(slurp(trace) == first);
    CHECK(slurp(log) == first_log);

    auto replay_trace = tmp("replay.txt"), replay_log = tmp("replay.log");
    CHECK(invoke({"simulate", "--replay", log.string(), "-o", replay_trace.string(), "--log", replay_log.string()}).code == 0);
    CHECK(slurp(replay_trace) == first);
    CHECK(slurp(replay_log) == first_log);
}

TEST_CASE("cli simulate at 2 M KCl logs no translocations")
{
    auto trace = tmp("gate.bin"), log = tmp("gate.log");
    REQUIRE(invoke({"simulate", "--seed", "3", "--duration-s", "0.5", "--kcl-molar", "2", "--format", "binary", "-o",
                 trace.string(), "--log", log.string()})
                .code == 0);
    std::ifstream in(log);
    auto gt = poresim::read_ground_truth(in);
    CHECK(gt.events.empty());
    CHECK_FALSE(gt.closures.empty());
    CHECK(poresim::load_trace(trace).samples.size() == 500000);
}

TEST_CASE("cli read recovers the payload and stats reports census rates")
{
    auto trace = tmp("rt.bin");
    REQUIRE(invoke({"simulate", "--seed", "5", "--duration-s", "3", "--format", "binary", "-o", trace.string()}).code == 0);
    auto r = invoke({"read", trace.string(), "--scheme", "A50:C100", "--payload", tmp("rt.payload").string(), "--events",
                  tmp("rt.csv").string()});
    REQUIRE(r.code == 0);
    auto summary = kv::KeyValues::parse(r.out);
    CHECK(summary.get_int("decoded_events") > 0);
    std::istringstream payload(slurp(tmp("rt.payload")));
    std::string line;
    int lines = 0, good = 0;
    while (std::getline(payload, line)) {
        ++lines;
        good += line == "01";
    }
    CHECK(lines == summary.get_int("decoded_events"));
    CHECK(good >= lines - 1);
    CHECK(kv::KeyValues::parse_header(slurp(tmp("rt.csv"))).at("molecule") == "A50C100");

    auto s = invoke({"stats", trace.string(), "--census", tmp("rt.census.csv").string(), "--pairs",
                  tmp("rt.pairs.csv").string()});
    REQUIRE(s.code == 0);
    auto stats = kv::KeyValues::parse(s.out);
    CHECK(stats.get_double("total_rate") ==
          doctest::Approx(stats.get_double("complete_rate") + stats.get_double("partial_rate")));
    CHECK(stats.contains("census.1.total_rate"));
}

TEST_CASE("cli read of an empty trace")
{
    put(tmp("empty.trace"), "sample_rate_hz=1000000\n");
    auto r = invoke({"read", tmp("empty.trace").string(), "--events", tmp("empty.csv").string(), "--noise-sigma-pa", "5"});
    REQUIRE(r.code == 0);
    CHECK(kv::KeyValues::parse(r.out).get_double("open_fraction") == 1.0);
    auto csv = slurp(tmp("empty.csv"));
    CHECK(csv.substr(csv.rfind("start_s")) == "start_s,duration_us,blockage_pct,class,orientation\n");
}

TEST_CASE("cli plan")
{
    auto r = invoke({"plan"});
    REQUIRE(r.code == 0);
    auto k = kv::KeyValues::parse(r.out);
    CHECK(k.get_double("areal_bytes_per_cm2") == 1e12);
    CHECK(k.get_double("volumetric_bytes_per_cm3") == 1e15);
    CHECK(k.get_double("transit_time_s") == doctest::Approx(1e-3));

    put(tmp("scenario.kv"), "stations = 3000\nbits_per_molecule = 150\n");
    r = invoke({"plan", tmp("scenario.kv").string(), "--csv", tmp("plan.csv").string()});
    CHECK(kv::KeyValues::parse(r.out).get_double("aggregate_bits_per_s") == 3e9);
    r = invoke({"plan", "--set", "stations = 0"});
    CHECK(kv::KeyValues::parse(r.out).get_double("aggregate_bits_per_s") == 0.0);
}
