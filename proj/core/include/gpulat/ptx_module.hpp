#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gpulat/isa_catalog.hpp"
#include "gpulat/ptx_ast.hpp"
#include "gpulat/types.hpp"

namespace gpulat::ptx {

enum class ParamRole : std::uint8_t {
  InputPointer,   // device buffer holding operand values
  CycleOutput,    // receives a clock delta; printed as a RESULT line
  SinkOutput,     // receives the dependent dummy result
  TextureObject,  // 1-D texture object handle
};

std::string_view to_string(ParamRole r);

struct KernelParam {
  std::string name;
  ParamRole role = ParamRole::InputPointer;
  std::string output_name;  // RESULT name for CycleOutput, "sink" for SinkOutput
  int element_bits = 32;    // width of the pointed-to element
  std::vector<std::uint64_t> initial_bits;  // host-side initial contents
  bool operator==(const KernelParam&) const = default;
};

struct TimingBlock {
  std::string start_clock_reg;
  std::string end_clock_reg;
  std::vector<Instruction> timed_instructions;
  std::string result_reg;  // receives end - start
  std::string output_name;
  bool operator==(const TimingBlock&) const = default;
};

enum class KernelKind : std::uint8_t { Alu, Div, ClockOverhead, GlobalMemory, SharedMemory, ConstantMemory, Texture };

std::string_view to_string(KernelKind k);

struct PtxModule {
  std::string text;
  std::string entry_name;
  std::vector<KernelParam> params;
  std::vector<TimingBlock> timing_blocks;
  std::string target_version;
  std::string target_arch;

  KernelKind kind = KernelKind::Alu;
  std::string kernel_id;
  std::string file_stem;
  std::optional<isa::InstructionDescriptor> descriptor;
  std::optional<DivVariant> divisor_class;
  std::optional<std::string> divisor_literal;  // PTX immediate text

  Module ast;

  std::vector<std::string> cycle_output_names() const;
};

}  // namespace gpulat::ptx
