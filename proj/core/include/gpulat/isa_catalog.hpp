#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gpulat/gpu_target.hpp"
#include "gpulat/types.hpp"

namespace gpulat::isa {

// One benchmarked PTX instruction variant.
struct InstructionDescriptor {
  std::string mnemonic;  // catalog name, e.g. "add", "mul64hi", "sqrt.approx"
  InstructionCategory category = InstructionCategory::IntArith;
  DataType data_type = DataType::u32;
  Signedness signedness = Signedness::NotApplicable;
  std::optional<DivVariant> div_variant;  // set only for div
  int operand_arity = 2;
  bool is_intrinsic = false;
  ComputeCapability min_compute_capability{3, 0};

  // Reference-table row this descriptor reports into. Rows the tables
  // group ("add / sub / min / max") are shared by several descriptors.
  std::string report_group;

  // PTX opcodes emitted between the clock reads, in order.
  std::vector<std::string> ptx_sequence;

  // Untimed instruction emitted before the sandwich, e.g. to set the
  // carry flag consumed by addc/subc/madc. Empty when not needed.
  std::string setup_opcode;

  // Identifier used for kernel entry names, fixtures and records:
  // "add_u32", "div_s32_irregular", "sqrt_approx_f32".
  std::string kernel_id() const;

  // Output file stem: "<category>__<mnemonic>__<dtype>[__<variant>]".
  std::string file_stem() const;

  bool supported_on(ComputeCapability cc) const { return min_compute_capability <= cc; }

  bool operator==(const InstructionDescriptor&) const = default;
};

// Number of descriptors in the catalog. Asserted against a row census of
// the published ALU table in the tests.
inline constexpr std::size_t kCatalogSize = 68;

// Memory-hierarchy and calibration kernels. A kernel may feed several
// probe kinds (the global kernel reports device latency and a cache hit).
struct ProbeOutput {
  std::string output_name;  // RESULT-line output name
  MemoryProbeKind kind;
  bool cold = false;  // first-touch measurement: warm-up is not discarded
};

struct ProbeKernel {
  std::string kernel_id;  // "global_ld", "shared_ld", ...
  std::string file_stem;  // "Memory__global__u32"
  std::vector<ProbeOutput> outputs;
  bool uses_l1_mode = false;

  // Probe kind reported by `output_name` under the given L1 mode.
  std::optional<MemoryProbeKind> kind_for(std::string_view output_name, L1Mode l1) const;
};

// Immutable after construction; safe for concurrent readers.
class InstructionCatalog {
 public:
  static const InstructionCatalog& instance();

  std::span<const InstructionDescriptor> all() const { return descriptors_; }

  // Sorted by (category, mnemonic, data type, divisor variant). Filtering by
  // compute capability drops descriptors the target cannot run.
  std::vector<InstructionDescriptor> list_instructions(
      std::optional<InstructionCategory> category = std::nullopt,
      std::optional<ComputeCapability> cc = std::nullopt) const;

  std::vector<InstructionDescriptor> list_instructions(std::optional<InstructionCategory> category,
                                                       const GpuTarget& gpu) const {
    return list_instructions(category, gpu.compute_capability);
  }

  // Throws UnknownInstruction when absent, or when `mnemonic` is div and no
  // divisor variant is given.
  const InstructionDescriptor& descriptor_for(std::string_view mnemonic, DataType type,
                                              std::optional<DivVariant> variant = std::nullopt) const;

  const InstructionDescriptor* find_by_kernel_id(std::string_view kernel_id) const;

  std::span<const ProbeKernel> probe_kernels() const { return probes_; }
  const ProbeKernel* find_probe_kernel(std::string_view kernel_id) const;
  const ProbeKernel& probe_kernel_for(MemoryProbeKind kind) const;

  // PTX 6.4 instructions outside the benchmarked set.
  static std::span<const std::string_view> uncataloged_ptx_opcodes();

 private:
  InstructionCatalog();

  std::vector<InstructionDescriptor> descriptors_;
  std::vector<ProbeKernel> probes_;
};

// Convenience wrappers over InstructionCatalog::instance().
std::vector<InstructionDescriptor> list_instructions(
    std::optional<InstructionCategory> category = std::nullopt,
    std::optional<ComputeCapability> cc = std::nullopt);
const InstructionDescriptor& descriptor_for(std::string_view mnemonic, DataType type,
                                            std::optional<DivVariant> variant = std::nullopt);

}  // namespace gpulat::isa
