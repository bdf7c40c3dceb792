#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "gpulat/types.hpp"

namespace gpulat {

enum class Architecture : std::uint8_t { Kepler, Maxwell, Pascal, Volta, Turing };

std::string_view to_string(Architecture a);
Architecture parse_architecture(std::string_view text);

// True when the compute capability belongs to the architecture's family
// (Kepler 3.x, Maxwell 5.x, Pascal 6.x, Volta 7.0, Turing 7.5).
bool compute_capability_matches(Architecture a, ComputeCapability cc);

struct PerSmxUnits {
  int sp = 0;
  int dp = 0;
  int sfu = 0;
  int ldst = 0;
};

// Published board configuration. Only the five headline boards have one.
struct GpuConfiguration {
  int gpu_clock_mhz = 0;
  int mem_clock_mhz = 0;
  int mem_size_gb = 0;
  std::string mem_type;
  int mem_bus_bits = 0;
  double mem_bandwidth_gbs = 0.0;
  int l1_size_kb = 0;
  std::string l2_size;
  std::optional<double> tflops_fp16;
  double tflops_fp32 = 0.0;
  double tflops_fp64 = 0.0;
  double texture_rate_gtexels = 0.0;
  int cores_total = 0;
  int smx_count = 0;
  PerSmxUnits per_smx;
};

struct GpuTarget {
  std::string name;   // "K40m", "TITAN RTX"
  std::string slug;   // "k40m", "rtx"; used in fixture file names
  Architecture architecture = Architecture::Kepler;
  std::optional<std::string> chip;
  ComputeCapability compute_capability;
  std::string toolchain_version;  // toolchain the published numbers were taken with
  std::optional<GpuConfiguration> config;
};

}  // namespace gpulat
