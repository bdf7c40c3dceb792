#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpulat/types.hpp"

namespace gpulat::runner {

struct Dim3 {
  unsigned x = 1;
  unsigned y = 1;
  unsigned z = 1;
  bool operator==(const Dim3&) const = default;
};

struct LaunchConfig {
  Dim3 grid;
  Dim3 block;
  unsigned repetitions = 11;  // independent process launches

  // Throws ConfigError unless exactly one thread is launched and
  // repetitions >= 3.
  void validate() const;
};

// Upper bound on a plausible cycle delta; larger values are treated as
// counter wraparound artifacts.
inline constexpr Cycles kMaxPlausibleDelta = 1u << 31;

struct RawSamples {
  std::string kernel_id;
  std::string gpu_name;
  std::string toolchain_version;
  OptLevel opt_level = OptLevel::O3;
  L1Mode l1_mode = L1Mode::NotApplicable;
  std::map<std::string, std::vector<Cycles>> samples;  // per output name
  std::vector<Cycles> clock_overhead_samples;
  std::optional<std::string> provenance;

  // Throws SchemaError when empty or out of range.
  void validate() const;

  bool operator==(const RawSamples&) const = default;
};

inline constexpr int kFixtureSchemaVersion = 1;

void record_fixture(const RawSamples& samples, const std::filesystem::path& path);
RawSamples load_fixture(const std::filesystem::path& path);
std::string fixture_to_json(const RawSamples& samples);
RawSamples fixture_from_json(std::string_view text);

// `<gpu-slug>_<kernelId>_<opt>[_<l1>][_cuda<version>].json`; the toolchain
// suffix is omitted when it equals the GPU's published toolchain.
std::string fixture_filename(std::string_view gpu_slug, std::string_view kernel_id, OptLevel opt,
                             std::string_view toolchain, std::string_view default_toolchain,
                             L1Mode l1 = L1Mode::NotApplicable);

// One parsed `RESULT <kernel> <output-name> <value>` line.
struct ResultLine {
  std::string kernel;
  std::string output;
  Cycles value = 0;
  bool operator==(const ResultLine&) const = default;
};

// Parses launcher stdout. Comment lines ("# ...") and blank lines are
// skipped; anything else must be a well-formed RESULT line. Throws
// ParseError naming the offending line.
std::vector<ResultLine> parse_result_lines(std::string_view stdout_text);

// What a backend needs to produce the samples of one kernel.
struct KernelRef {
  std::string kernel_id;
  std::string gpu_name;
  std::string toolchain_version;
  OptLevel opt_level = OptLevel::O3;
  L1Mode l1_mode = L1Mode::NotApplicable;
  std::vector<std::string> output_names;  // expected RESULT outputs

  std::filesystem::path executable;                // hardware
  std::filesystem::path clock_overhead_executable;  // hardware
  std::filesystem::path fixture;                    // replay
};

class ExecutionBackend {
 public:
  virtual ~ExecutionBackend() = default;
  virtual std::string_view name() const = 0;
  // Throws BackendFailure.
  virtual RawSamples run(const KernelRef& ref, const LaunchConfig& launch) = 0;
};

// Spawns the built executables; one measurement process at a time.
class HardwareBackend final : public ExecutionBackend {
 public:
  std::string_view name() const override { return "hw"; }
  RawSamples run(const KernelRef& ref, const LaunchConfig& launch) override;

 private:
  std::vector<ResultLine> launch_once(const std::filesystem::path& exe, const std::string& kernel_id);
  std::mutex exclusive_;
};

// Reads fixture files; never touches hardware.
class ReplayBackend final : public ExecutionBackend {
 public:
  std::string_view name() const override { return "replay"; }
  RawSamples run(const KernelRef& ref, const LaunchConfig& launch) override;
};

struct KernelFailure {
  std::string kernel_id;
  std::string detail;
};

struct MeasurementResult {
  std::vector<RawSamples> samples;
  std::vector<KernelFailure> failures;
};

// Runs the suite strictly in order; a failing kernel is recorded and the
// rest still run.
MeasurementResult run_measurement(const std::vector<KernelRef>& suite, ExecutionBackend& backend,
                                  const LaunchConfig& launch = {});

// Replay refs for every fixture file in a directory, sorted by file name.
std::vector<KernelRef> discover_fixtures(const std::filesystem::path& dir);

}  // namespace gpulat::runner
