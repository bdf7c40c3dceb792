#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpulat/analysis.hpp"
#include "gpulat/reference_data.hpp"

namespace gpulat::report {

enum class Format : std::uint8_t { Markdown, Csv, Json };

std::string_view to_string(Format f);
Format parse_format(std::string_view text);  // "md"/"markdown", "csv", "json"

inline constexpr std::string_view kMissingCell = "-";
inline constexpr std::string_view kNaCell = "NA";

struct ViewOptions {
  // Toolchain whose records fill the ALU and memory views; each board's
  // published toolchain when unset.
  std::optional<std::string> toolchain;
};

// ALU table layout: the published rows (plus any measured keys the table
// lacks) with one rendered cell per column. Dual columns render "a / b"
// when their boards differ.
struct AppendixView {
  struct Row {
    InstructionCategory category = InstructionCategory::IntArith;
    std::string label;
    std::string key;
    bool published = true;
    std::vector<std::string> optimized;
    std::vector<std::string> non_optimized;
  };
  std::vector<ref::AppendixColumn> columns;
  std::vector<Row> rows;
};

AppendixView build_appendix_view(const std::vector<analysis::LatencyRecord>& records,
                                 const ref::ReferenceData& data = ref::ReferenceData::embedded(),
                                 const ViewOptions& options = {});

struct MemoryView {
  struct Row {
    std::string label;
    std::string key;
    std::vector<std::string> optimized;  // one per gpu
    std::vector<std::string> non_optimized;
  };
  std::vector<std::string> gpus;
  std::vector<Row> rows;
};

MemoryView build_memory_view(const std::vector<analysis::LatencyRecord>& records,
                             const ref::ReferenceData& data = ref::ReferenceData::embedded(),
                             const ViewOptions& options = {});

struct CompilerView {
  struct Row {
    std::string section;
    std::string label;
    std::string baseline;
    std::string candidate;
    std::string delta;
  };
  std::string gpu_label;  // "TITAN V / V100"
  std::string baseline_version;
  std::string candidate_version;
  std::vector<Row> rows;
};

CompilerView build_compiler_view(const std::vector<analysis::LatencyRecord>& records,
                                 const ref::ReferenceData& data = ref::ReferenceData::embedded());

// Deterministic record order used by every renderer.
std::vector<analysis::LatencyRecord> sorted_records(std::vector<analysis::LatencyRecord> records);

std::string render_markdown(const std::vector<analysis::LatencyRecord>& records,
                            const ref::ReferenceData& data = ref::ReferenceData::embedded(),
                            const ViewOptions& options = {});
std::string render_csv(const std::vector<analysis::LatencyRecord>& records);
std::string render_json(const std::vector<analysis::LatencyRecord>& records);
// Inverse of render_json. Throws SchemaError.
std::vector<analysis::LatencyRecord> parse_records_json(std::string_view text);

std::string render(const std::vector<analysis::LatencyRecord>& records, Format format,
                   const ref::ReferenceData& data = ref::ReferenceData::embedded(),
                   const ViewOptions& options = {});

inline constexpr const char* kCsvHeader =
    "category,instruction,dtype,variant,gpu,opt_level,toolchain,latency_cycles,min,max,n,source";

std::string render_conformance(const analysis::ConformanceReport& report, Format format);

// Tables straight from the reference data.
std::string render_reference(const ref::ReferenceData& data, Format format, std::string_view table = "all");

}  // namespace gpulat::report
