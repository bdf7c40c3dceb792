#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "gpulat/isa_catalog.hpp"
#include "gpulat/ptx_module.hpp"

namespace gpulat::ptx {

inline constexpr const char* kPtxIsaVersion = "6.4";

struct CodegenOptions {
  std::string target_arch = "sm_70";
  std::string ptx_version = kPtxIsaVersion;
};

// Where operand values come from. Parameters (the default) keep values
// opaque to the compiler; Immediates materializes them with mov before the
// timed region and lets constant folding see them.
struct OperandPolicy {
  enum class Source : std::uint8_t { Parameters, Immediates };
  Source source = Source::Parameters;
  std::vector<std::string> values;  // decimal literals; defaults per type when empty

  static OperandPolicy parameters(std::vector<std::string> values = {}) {
    return {Source::Parameters, std::move(values)};
  }
  static OperandPolicy literals(std::vector<std::string> values = {}) {
    return {Source::Immediates, std::move(values)};
  }
};

using Divisor = std::variant<std::int64_t, double>;

// Counts registers per class and hands out unique names (%r1, %rd1, ...).
class RegisterAllocator {
 public:
  enum class Class : std::uint8_t { b32, b64, pred, f32, f64, f16 };

  std::string allocate(Class c);
  std::vector<RegisterDecl> declarations() const;

  static Class class_for(DataType t);

 private:
  std::array<int, 6> counters_{};
};

PtxModule emit_clock_overhead_kernel(const CodegenOptions& options = {});

// Throws UnsupportedOnTarget when the descriptor needs a newer compute
// capability than options.target_arch. Div descriptors are routed to
// emit_div_kernel with the default divisor for their variant.
PtxModule emit_alu_kernel(const isa::InstructionDescriptor& desc, const OperandPolicy& operands = {},
                          const CodegenOptions& options = {});

// The divisor is emitted as an immediate so strength reduction can fire.
// Throws ZeroDivisor for 0.
PtxModule emit_div_kernel(const isa::InstructionDescriptor& desc, Divisor divisor,
                          const CodegenOptions& options = {});

Divisor default_divisor(DataType type, DivVariant variant);

PtxModule emit_global_memory_kernel(const CodegenOptions& options = {});
PtxModule emit_shared_kernel(const CodegenOptions& options = {});
PtxModule emit_constant_kernel(const CodegenOptions& options = {});
PtxModule emit_texture_kernel(const CodegenOptions& options = {});

// Dispatches on the probe kernel id ("global_ld", "shared_ld", ...).
PtxModule emit_probe_kernel(const isa::ProbeKernel& probe, const CodegenOptions& options = {});

// Bit pattern of a decimal literal in the given type (f16 rounds to nearest even).
std::uint64_t encode_literal(DataType type, const std::string& value);

// Byte distance between global loads in the memory kernel; stays inside
// one 32-byte sector/line.
inline constexpr std::int64_t kGlobalHitOffsetBytes = 4;
inline constexpr std::int64_t kMinCacheLineBytes = 32;

}  // namespace gpulat::ptx
