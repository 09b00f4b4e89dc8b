#pragma once

// On-disk formats for current traces and simulator ground-truth logs.
//
// Text trace:   "sample_rate_hz=<integer>\n" then one pA value per line.
// Binary trace: "MTRC" | u32 version=1 | f64 sample rate | u64 count | f32 samples,
//               all little-endian.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "molstore/kvfile.hpp"
#include "molstore/poresim.hpp"

namespace molstore::poresim {

enum class TraceFormat { Text, Binary };

TraceFormat trace_format_from_name(std::string_view name);

void write_trace_text(std::ostream& out, const CurrentTrace& trace);
void write_trace_binary(std::ostream& out, const CurrentTrace& trace);
CurrentTrace read_trace_text(std::istream& in);
CurrentTrace read_trace_binary(std::istream& in);

void save_trace(const std::filesystem::path& path, const CurrentTrace& trace, TraceFormat format);
/// Detects the format from the leading magic bytes.
CurrentTrace load_trace(const std::filesystem::path& path);

/// Ground-truth log: a `# key = value` header block (resolved configuration)
/// followed by a CSV of injected events and closure intervals.
struct GroundTruth {
    kv::KeyValues header;
    std::vector<PoreEvent> events;
    std::vector<Closure> closures;
};

void write_ground_truth(std::ostream& out, const kv::KeyValues& header, const Simulation& sim);
GroundTruth read_ground_truth(std::istream& in);

} // namespace molstore::poresim
