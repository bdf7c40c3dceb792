#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gpulat/analysis.hpp"
#include "gpulat/runner.hpp"
#include "gpulat/toolchain.hpp"

namespace gpulat::pipeline {

struct Outcome {
  std::vector<runner::RawSamples> samples;
  std::vector<analysis::LatencyRecord> records;  // includes derived averages
  std::vector<runner::KernelFailure> failures;
};

// Reduces samples to records and adds the derived division averages.
std::vector<analysis::LatencyRecord> reduce_all(const std::vector<runner::RawSamples>& samples,
                                                analysis::Provenance provenance);

// Replays every fixture in `dir` through the replay backend.
Outcome replay_directory(const std::filesystem::path& dir);

// A kernel to build and time on hardware.
struct SuiteEntry {
  std::string kernel_id;  // descriptor kernel id or probe kernel id
  L1Mode l1_mode = L1Mode::NotApplicable;
};

// Every descriptor the target can run (optionally one category) and, when
// `with_probes`, the memory probes, with the global probe under both L1
// modes.
std::vector<SuiteEntry> default_suite(ComputeCapability cc, std::optional<InstructionCategory> category,
                                      bool with_probes);

struct HardwareOptions {
  std::string gpu_name;
  std::string target_arch = "sm_70";
  std::string toolchain_version;  // detected version
  std::vector<OptLevel> opt_levels = {OptLevel::O0, OptLevel::O3};
  std::map<std::string, std::string> tool_paths;
  std::filesystem::path work_dir = "gpulat-build";
  runner::LaunchConfig launch;
  const toolchain::CommandTemplates* templates = nullptr;  // builtin when null
};

// Builds each kernel (plus the calibration kernel per opt level), then
// times them one after another. Build and run failures are collected per
// kernel.
Outcome measure_hardware(const std::vector<SuiteEntry>& suite, const HardwareOptions& options);

// True when a CUDA driver device node is present.
bool gpu_device_present();

}  // namespace gpulat::pipeline
