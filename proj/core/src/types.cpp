#include "gpulat/types.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "gpulat/errors.hpp"

namespace gpulat {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::array<Enum, N>& values, std::string_view what) {
  for (Enum v : values) {
    if (to_string(v) == text) return v;
  }
  throw ParseError("unknown " + std::string(what) + " '" + std::string(text) + "'");
}

int parse_int(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

ComputeCapability ComputeCapability::parse(std::string_view text) {
  if (text.starts_with("sm_")) text.remove_prefix(3);
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    return {parse_int(text.substr(0, dot)), parse_int(text.substr(dot + 1))};
  }
  if (text.size() < 2 || !std::all_of(text.begin(), text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw ParseError("malformed compute capability '" + std::string(text) + "'");
  }
  return {parse_int(text.substr(0, text.size() - 1)), parse_int(text.substr(text.size() - 1))};
}

std::string ComputeCapability::to_string() const {
  return std::to_string(major) + "." + std::to_string(minor);
}

std::string ComputeCapability::sm_name() const {
  return "sm_" + std::to_string(major) + std::to_string(minor);
}

std::string_view to_string(InstructionCategory c) {
  switch (c) {
    case InstructionCategory::IntArith: return "IntArith";
    case InstructionCategory::LogicShift: return "LogicShift";
    case InstructionCategory::FP32: return "FP32";
    case InstructionCategory::FP64: return "FP64";
    case InstructionCategory::FP16: return "FP16";
    case InstructionCategory::MultiPrecision: return "MultiPrecision";
    case InstructionCategory::SpecialMath: return "SpecialMath";
    case InstructionCategory::IntIntrinsic: return "IntIntrinsic";
  }
  return "?";
}

std::string_view category_heading(InstructionCategory c) {
  switch (c) {
    case InstructionCategory::IntArith: return "(1) Integer Arithmetic Instructions";
    case InstructionCategory::LogicShift: return "(2) Logic and Shift Instructions";
    case InstructionCategory::FP32: return "(3) Floating Single Precision Instructions";
    case InstructionCategory::FP64: return "(4) Double Precision Instructions";
    case InstructionCategory::FP16: return "(5) Half Precision Instructions";
    case InstructionCategory::MultiPrecision: return "(6) Multi Precision Instructions";
    case InstructionCategory::SpecialMath: return "(7) Special Mathematical Instructions";
    case InstructionCategory::IntIntrinsic: return "(8) Integer Intrinsic Instructions";
  }
  return "?";
}

// Suffix used in reference-table row keys, e.g. "add/sub/min/max [int]".
std::string_view category_tag(InstructionCategory c) {
  switch (c) {
    case InstructionCategory::IntArith: return "int";
    case InstructionCategory::LogicShift: return "logic";
    case InstructionCategory::FP32: return "f32";
    case InstructionCategory::FP64: return "f64";
    case InstructionCategory::FP16: return "f16";
    case InstructionCategory::MultiPrecision: return "mp";
    case InstructionCategory::SpecialMath: return "math";
    case InstructionCategory::IntIntrinsic: return "intrinsic";
  }
  return "?";
}

std::string_view to_string(DataType t) {
  switch (t) {
    case DataType::u32: return "u32";
    case DataType::s32: return "s32";
    case DataType::u64: return "u64";
    case DataType::s64: return "s64";
    case DataType::f16: return "f16";
    case DataType::f32: return "f32";
    case DataType::f64: return "f64";
    case DataType::pred: return "pred";
  }
  return "?";
}

std::string_view to_string(Signedness s) {
  switch (s) {
    case Signedness::Signed: return "signed";
    case Signedness::Unsigned: return "unsigned";
    case Signedness::NotApplicable: return "n/a";
  }
  return "?";
}

std::string_view to_string(DivVariant v) {
  switch (v) {
    case DivVariant::Regular: return "regular";
    case DivVariant::Irregular: return "irregular";
    case DivVariant::Average: return "average";
  }
  return "?";
}

std::string_view to_string(MemoryProbeKind k) {
  switch (k) {
    case MemoryProbeKind::GlobalMemory: return "GlobalMemory";
    case MemoryProbeKind::L1Hit: return "L1Hit";
    case MemoryProbeKind::L2Hit: return "L2Hit";
    case MemoryProbeKind::TextureMemory: return "TextureMemory";
    case MemoryProbeKind::TextureCacheHit: return "TextureCacheHit";
    case MemoryProbeKind::SharedMemory: return "SharedMemory";
    case MemoryProbeKind::ConstantMemory: return "ConstantMemory";
    case MemoryProbeKind::ClockOverhead: return "ClockOverhead";
  }
  return "?";
}

std::string_view to_string(OptLevel o) {
  switch (o) {
    case OptLevel::O0: return "O0";
    case OptLevel::O1: return "O1";
    case OptLevel::O2: return "O2";
    case OptLevel::O3: return "O3";
  }
  return "?";
}

std::string_view to_string(OptClass o) {
  return o == OptClass::Optimized ? "optimized" : "nonOptimized";
}

std::string_view to_string(L1Mode m) {
  switch (m) {
    case L1Mode::Enabled: return "enabled";
    case L1Mode::Disabled: return "disabled";
    case L1Mode::NotApplicable: return "n/a";
  }
  return "?";
}

InstructionCategory parse_category(std::string_view text) {
  return parse_enum(text, kAllCategories, "instruction category");
}

DataType parse_data_type(std::string_view text) {
  static constexpr std::array kTypes = {DataType::u32, DataType::s32, DataType::u64, DataType::s64,
                                        DataType::f16, DataType::f32, DataType::f64, DataType::pred};
  return parse_enum(text, kTypes, "data type");
}

DivVariant parse_div_variant(std::string_view text) {
  static constexpr std::array kVariants = {DivVariant::Regular, DivVariant::Irregular, DivVariant::Average};
  return parse_enum(text, kVariants, "divisor variant");
}

MemoryProbeKind parse_probe_kind(std::string_view text) {
  return parse_enum(text, kAllProbeKinds, "memory probe");
}

OptLevel parse_opt_level(std::string_view text) {
  if (text.size() == 1 && text[0] >= '0' && text[0] <= '3') {
    return static_cast<OptLevel>(text[0] - '0');
  }
  if (text.starts_with("-")) text.remove_prefix(1);
  static constexpr std::array kLevels = {OptLevel::O0, OptLevel::O1, OptLevel::O2, OptLevel::O3};
  return parse_enum(text, kLevels, "optimization level");
}

L1Mode parse_l1_mode(std::string_view text) {
  if (text == "on" || text == "enabled" || text == "ca") return L1Mode::Enabled;
  if (text == "off" || text == "disabled" || text == "cg") return L1Mode::Disabled;
  if (text == "na" || text == "n/a" || text == "none") return L1Mode::NotApplicable;
  throw ParseError("unknown L1 mode '" + std::string(text) + "' (expected on|off|na)");
}

std::optional<OptClass> opt_class_of(OptLevel level) {
  switch (level) {
    case OptLevel::O3: return OptClass::Optimized;
    case OptLevel::O0: return OptClass::NonOptimized;
    default: return std::nullopt;
  }
}

}  // namespace gpulat

#include "gpulat/gpu_target.hpp"

namespace gpulat {

std::string_view to_string(Architecture a) {
  switch (a) {
    case Architecture::Kepler: return "Kepler";
    case Architecture::Maxwell: return "Maxwell";
    case Architecture::Pascal: return "Pascal";
    case Architecture::Volta: return "Volta";
    case Architecture::Turing: return "Turing";
  }
  return "?";
}

Architecture parse_architecture(std::string_view text) {
  static constexpr std::array kArchs = {Architecture::Kepler, Architecture::Maxwell, Architecture::Pascal,
                                        Architecture::Volta, Architecture::Turing};
  return parse_enum(text, kArchs, "architecture");
}

bool compute_capability_matches(Architecture a, ComputeCapability cc) {
  switch (a) {
    case Architecture::Kepler: return cc.major == 3;
    case Architecture::Maxwell: return cc.major == 5;
    case Architecture::Pascal: return cc.major == 6;
    case Architecture::Volta: return cc == ComputeCapability{7, 0};
    case Architecture::Turing: return cc == ComputeCapability{7, 5};
  }
  return false;
}

}  // namespace gpulat
