#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gpulat/reference_data.hpp"
#include "gpulat/runner.hpp"

namespace gpulat::fixtures {

// Synthetic samples: every delta is the table latency plus a fixed clock
// overhead, and the first repetition carries a warm-up penalty.
inline constexpr Cycles kSyntheticOverhead = 14;
inline constexpr Cycles kWarmupPenalty = 40;
inline constexpr unsigned kSyntheticRepetitions = 11;
inline constexpr const char* kSyntheticProvenance =
    "synthetic: table latency + 14 cycle clock overhead; first repetition is a warm-up outlier";

struct FixtureFile {
  std::string filename;
  runner::RawSamples samples;
};

// Samples whose reduction yields `latency` for a single output.
runner::RawSamples synthesize(const std::string& kernel_id, const std::string& output, Cycles latency,
                              const GpuTarget& gpu, const std::string& toolchain, OptLevel opt, bool cold = false);

// The shipped reference set: every cataloged instruction on every board
// that can run it at O0 and O3 with its published toolchain, the
// compiler-version rows with the newer toolchain on the boards that table
// covers, and the shared/constant probes for the boards in the memory
// table.
std::vector<FixtureFile> reference_fixtures(const ref::ReferenceData& data = ref::ReferenceData::embedded());

// Writes reference_fixtures() into dir. Returns the number of files.
std::size_t write_reference_fixtures(const std::filesystem::path& dir,
                                     const ref::ReferenceData& data = ref::ReferenceData::embedded());

}  // namespace gpulat::fixtures
