#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gpulat/runner.hpp"
#include "gpulat/types.hpp"

namespace gpulat::ref {
class ReferenceData;
}

namespace gpulat::analysis {

enum class Provenance : std::uint8_t { Measured, Replayed, ReferenceTable };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view text);

struct Dispersion {
  Cycles min = 0;
  Cycles max = 0;
  std::size_t count = 0;
  bool operator==(const Dispersion&) const = default;
};

struct LatencyRecord {
  std::string key;          // reference row key or probe kind name
  std::string category;     // category name or "Memory"
  std::string instruction;  // mnemonic or probe kind
  std::string dtype;        // empty for probes
  std::string variant;      // divisor variant, empty otherwise
  std::string kernel_id;    // empty for derived records
  std::string output_name;

  std::string gpu_name;
  OptLevel opt_level = OptLevel::O3;
  std::string toolchain_version;
  L1Mode l1_mode = L1Mode::NotApplicable;

  Cycles latency_cycles = 0;
  Dispersion dispersion;
  Provenance derived_from = Provenance::Measured;
  bool anomalous = false;

  bool operator==(const LatencyRecord&) const = default;
};

// Lower median of the values (sorted[(n-1)/2]). Throws EmptySamples.
Cycles median(std::span<const Cycles> values);

// Median of the calibration deltas. Throws EmptySamples.
Cycles clock_overhead(std::span<const Cycles> samples);

struct NetLatency {
  Cycles cycles = 0;
  bool anomalous = false;  // raw delta was below the overhead
  bool operator==(const NetLatency&) const = default;
};

NetLatency net_latency(Cycles raw_delta, Cycles overhead);

// Regular iff |d| is an exact power of two. Throws ZeroDivisor.
DivVariant classify_divisor(std::int64_t d);
DivVariant classify_divisor(double d);

Cycles div_average(Cycles regular, Cycles irregular);

struct DivTriple {
  Cycles regular = 0;
  Cycles irregular = 0;
  Cycles average = 0;
  static DivTriple from(Cycles regular, Cycles irregular) {
    return {regular, irregular, div_average(regular, irregular)};
  }
  bool operator==(const DivTriple&) const = default;
};

// The first repetition is a warm-up and is dropped, except for cold
// measurements and single-sample series.
std::vector<Cycles> apply_warmup(std::span<const Cycles> samples, bool cold);

// Reduces one output of `samples` (the only one when `output` is empty)
// against an already computed overhead. The record's latency is the median
// of per-sample net latencies. Throws EmptySamples.
LatencyRecord aggregate(const runner::RawSamples& samples, Cycles overhead, std::string_view output = {},
                        Provenance provenance = Provenance::Measured);

// Full reduction of one kernel's samples: calibrate from the overhead
// samples, apply the warm-up policy and aggregate every output.
std::vector<LatencyRecord> reduce(const runner::RawSamples& samples, Provenance provenance);

// Adds an "(average)" record for every regular/irregular pair sharing
// gpu, opt level, toolchain and family. Returns the input plus the
// derived records.
std::vector<LatencyRecord> derive_div_averages(std::vector<LatencyRecord> records);

enum class Axis : std::uint8_t { OptLevel, Gpu, ToolchainVersion };

std::string_view to_string(Axis a);
Axis parse_axis(std::string_view text);

struct DeltaRow {
  std::string key;
  std::vector<std::optional<Cycles>> values;          // one per axis point
  std::vector<std::optional<std::int64_t>> deltas;    // value - baseline
  std::vector<std::optional<double>> relative;        // delta / baseline
};

struct DeltaTable {
  Axis axis = Axis::OptLevel;
  std::vector<std::string> points;  // baseline first
  std::vector<DeltaRow> rows;
};

// Throws MixedKeys when records differ in a key field other than `axis`.
// The baseline is `baseline` when given, else the first axis point seen.
DeltaTable compare(const std::vector<LatencyRecord>& records, Axis axis,
                   std::optional<std::string> baseline = std::nullopt);

enum class ConformanceStatus : std::uint8_t { Exact, WithinTolerance, OutOfTolerance, MissingInReference, NotApplicable };

std::string_view to_string(ConformanceStatus s);

struct Tolerance {
  Cycles alu_cycles = 2;
  double memory_fraction = 0.10;
  static Tolerance exact() { return {0, 0.0}; }
};

struct ConformanceEntry {
  LatencyRecord record;
  ConformanceStatus status = ConformanceStatus::MissingInReference;
  std::optional<Cycles> reference;
  std::int64_t delta = 0;  // record - reference
};

struct ConformanceReport {
  std::vector<ConformanceEntry> entries;
  std::size_t exact = 0;
  std::size_t within_tolerance = 0;
  std::size_t out_of_tolerance = 0;
  std::size_t missing = 0;
  std::size_t not_applicable = 0;

  std::size_t compared() const { return exact + within_tolerance + out_of_tolerance; }
  // Fractions over the records that have a reference value; 1 when none.
  double exact_fraction() const;
  double conforming_fraction() const;
};

// Records taken with a GPU's published toolchain are checked against the
// ALU and memory tables; records from the alternative toolchain against
// the compiler-version table. O1/O2 records have no reference.
ConformanceReport diff_vs_reference(const std::vector<LatencyRecord>& records, const ref::ReferenceData& table,
                                    const Tolerance& tolerance = {});

}  // namespace gpulat::analysis
