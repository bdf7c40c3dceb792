#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace gpulat {

using Cycles = std::uint32_t;

enum class InstructionCategory : std::uint8_t {
  IntArith,
  LogicShift,
  FP32,
  FP64,
  FP16,
  MultiPrecision,
  SpecialMath,
  IntIntrinsic,
};

inline constexpr std::array kAllCategories = {
    InstructionCategory::IntArith,       InstructionCategory::LogicShift,
    InstructionCategory::FP32,           InstructionCategory::FP64,
    InstructionCategory::FP16,           InstructionCategory::MultiPrecision,
    InstructionCategory::SpecialMath,    InstructionCategory::IntIntrinsic,
};

enum class DataType : std::uint8_t { u32, s32, u64, s64, f16, f32, f64, pred };

enum class Signedness : std::uint8_t { Signed, Unsigned, NotApplicable };

enum class DivVariant : std::uint8_t { Regular, Irregular, Average };

enum class MemoryProbeKind : std::uint8_t {
  GlobalMemory,
  L1Hit,
  L2Hit,
  TextureMemory,
  TextureCacheHit,
  SharedMemory,
  ConstantMemory,
  ClockOverhead,
};

inline constexpr std::array kAllProbeKinds = {
    MemoryProbeKind::GlobalMemory,  MemoryProbeKind::L1Hit,
    MemoryProbeKind::L2Hit,         MemoryProbeKind::TextureMemory,
    MemoryProbeKind::TextureCacheHit, MemoryProbeKind::SharedMemory,
    MemoryProbeKind::ConstantMemory, MemoryProbeKind::ClockOverhead,
};

enum class OptLevel : std::uint8_t { O0, O1, O2, O3 };

// The published tables only distinguish -O3 ("optimized") and -O0.
enum class OptClass : std::uint8_t { Optimized, NonOptimized };

enum class L1Mode : std::uint8_t { Enabled, Disabled, NotApplicable };

struct ComputeCapability {
  int major = 0;
  int minor = 0;

  auto operator<=>(const ComputeCapability&) const = default;

  // Accepts "7.0", "sm_70" and "70".
  static ComputeCapability parse(std::string_view text);
  std::string to_string() const;   // "7.0"
  std::string sm_name() const;     // "sm_70"
};

std::string_view to_string(InstructionCategory c);
std::string_view category_heading(InstructionCategory c);
std::string_view category_tag(InstructionCategory c);
std::string_view to_string(DataType t);
std::string_view to_string(Signedness s);
std::string_view to_string(DivVariant v);
std::string_view to_string(MemoryProbeKind k);
std::string_view to_string(OptLevel o);
std::string_view to_string(OptClass o);
std::string_view to_string(L1Mode m);

InstructionCategory parse_category(std::string_view text);
DataType parse_data_type(std::string_view text);
DivVariant parse_div_variant(std::string_view text);
MemoryProbeKind parse_probe_kind(std::string_view text);
OptLevel parse_opt_level(std::string_view text);
L1Mode parse_l1_mode(std::string_view text);

std::optional<OptClass> opt_class_of(OptLevel level);

}  // namespace gpulat
