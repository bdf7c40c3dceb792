#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gpulat/gpu_target.hpp"
#include "gpulat/types.hpp"

namespace gpulat::ref {

inline constexpr int kReferenceSchemaVersion = 1;

// One published column. Dual columns ("K40m / K80c") list two boards.
struct AppendixColumn {
  std::string label;
  std::vector<std::string> gpus;
};

// A row of the ALU latency table with its cells as printed.
struct AppendixRow {
  InstructionCategory category = InstructionCategory::IntArith;
  std::string label;  // "add / sub / min / max"
  std::string key;    // "add/sub/min/max [int]"
  std::vector<std::string> optimized;      // one per column
  std::vector<std::string> non_optimized;  // one per column
};

// One cell resolved to a single board. nullopt means NA.
struct ReferenceCell {
  std::string row_label;
  std::string key;
  InstructionCategory category = InstructionCategory::IntArith;
  std::string gpu;
  std::optional<Cycles> optimized;
  std::optional<Cycles> non_optimized;
};

struct MemoryRow {
  MemoryProbeKind probe = MemoryProbeKind::SharedMemory;
  std::string label;
  std::vector<Cycles> optimized;  // one per memory_gpus()
  std::vector<Cycles> non_optimized;
};

struct CudaVersionRow {
  std::string section;       // "FP32", "FP64", "IntIntrinsic"
  std::string label;         // as printed
  std::string key;           // lookup key, "div f64"
  std::string appendix_key;  // matching ALU table row
  Cycles baseline = 0;
  Cycles candidate = 0;
};

struct CudaVersionTable {
  std::vector<std::string> gpus;
  std::string baseline;   // "9.0"
  std::string candidate;  // "10.0"
  std::vector<CudaVersionRow> rows;
};

// FNV-1a 64-bit, rendered "fnv1a64:<16 hex digits>".
std::string fnv1a64(std::string_view data);

// Splits a printed cell into per-board values: "686 / 479" -> {686, 479},
// "9" -> {9}, "NA" -> {nullopt}. Throws SchemaError on anything else.
std::vector<std::optional<Cycles>> parse_cell(std::string_view text);

// Immutable after load.
class ReferenceData {
 public:
  // The tables compiled into the library.
  static const ReferenceData& embedded();

  // Throws IoError/SchemaError, including on checksum mismatch.
  static ReferenceData load(const std::filesystem::path& path);
  static ReferenceData parse(std::string_view json_text);

  const std::vector<GpuTarget>& gpus() const { return gpus_; }
  // By name ("TITAN RTX") or slug ("rtx"); throws NotInTable.
  const GpuTarget& gpu(std::string_view name_or_slug) const;
  const GpuTarget* find_gpu(std::string_view name_or_slug) const;

  const std::vector<AppendixColumn>& columns() const { return columns_; }
  const std::vector<AppendixRow>& rows() const { return rows_; }
  const AppendixRow* find_row(std::string_view key) const;
  // Column index holding the board; throws NotInTable.
  std::size_t column_of(std::string_view gpu) const;

  // Every row resolved per board, in row then board order.
  std::vector<ReferenceCell> cells() const;

  // Throws NotInTable for unknown boards or rows, NotApplicable for NA
  // cells.
  Cycles lookup(std::string_view gpu, std::string_view row_key, OptClass opt) const;

  const std::vector<std::string>& memory_gpus() const { return memory_gpus_; }
  const std::vector<MemoryRow>& memory_rows() const { return memory_rows_; }
  // Only SharedMemory and ConstantMemory are tabulated; throws NotInTable.
  Cycles lookup_memory(std::string_view gpu, MemoryProbeKind probe, OptClass opt) const;

  const CudaVersionTable& cuda_versions() const { return cuda_; }
  // By row key ("popc()", "div f64") or appendix key; throws NotInTable.
  std::pair<Cycles, Cycles> lookup_cuda_delta(std::string_view instruction) const;
  const CudaVersionRow* find_cuda_row(std::string_view instruction) const;

  const std::string& checksum() const { return checksum_; }

 private:
  std::vector<GpuTarget> gpus_;
  std::vector<AppendixColumn> columns_;
  std::vector<AppendixRow> rows_;
  std::vector<std::string> memory_gpus_;
  std::vector<MemoryRow> memory_rows_;
  CudaVersionTable cuda_;
  std::string checksum_;
};

// Checksum over the canonical serialization of the "tables" object.
std::string compute_tables_checksum(std::string_view json_text);

}  // namespace gpulat::ref
