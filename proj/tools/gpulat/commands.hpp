#pragma once

#include <optional>
#include <string>
#include <vector>

namespace gpulat::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kPartialFailure = 3;
inline constexpr int kConformanceFailure = 4;

// Prints {"error": ..., "message": ..., "hint": ...} to stderr.
void print_error(const std::string& code, const std::string& message, const std::string& hint = {});

struct ListArgs {
  std::optional<std::string> category;
  std::optional<std::string> gpu;
  bool probes = false;
  std::string format = "text";
};

struct GenerateArgs {
  std::string out_dir = "ptx";
  std::string arch = "sm_70";
  std::optional<std::string> category;
  std::vector<std::string> kernels;
  bool literals = false;
  bool probes = true;
};

struct BuildArgs {
  std::string out_dir = "gpulat-build";
  std::vector<std::string> opt_levels = {"O3"};
  std::string arch = "sm_70";
  std::string l1 = "both";  // on, off, both; applies to the global probe
  std::optional<std::string> category;
  std::vector<std::string> kernels;
  std::string toolchain = "default";
  std::optional<std::string> templates;
  bool dry_run = false;
  bool probes = true;
};

struct MeasureArgs {
  std::string backend = "replay";
  std::optional<std::string> fixtures;
  unsigned reps = 11;
  std::optional<std::string> gpu;
  std::string arch;
  std::vector<std::string> opt_levels = {"O0", "O3"};
  std::optional<std::string> category;
  bool probes = false;
  std::string report = "md";
  std::optional<std::string> out;
  std::optional<std::string> record_dir;
  std::optional<std::string> templates;
  std::string work_dir = "gpulat-build";
  std::optional<std::string> toolchain;  // report view toolchain
};

struct ReportArgs {
  std::optional<std::string> records;
  std::optional<std::string> fixtures;
  std::string format = "md";
  std::optional<std::string> out;
  std::optional<std::string> toolchain;
};

struct DiffArgs {
  std::string against = "paper";
  std::optional<std::string> fixtures;
  std::optional<std::string> records;
  std::optional<unsigned> tolerance;
  std::optional<double> memory_tolerance;
  double threshold = 1.0;
  std::string format = "text";
  std::optional<std::string> out;
};

struct ReferenceArgs {
  std::string table = "all";
  std::string format = "csv";
  std::optional<std::string> lookup;
  std::optional<std::string> gpu;
  std::string opt = "optimized";
  bool checksum = false;
  std::optional<std::string> data;
};

struct FixturesArgs {
  std::string out_dir = "fixtures/reference";
  bool check = false;
};

struct CalibrateArgs {
  std::string backend = "replay";
  std::optional<std::string> fixtures;
  unsigned reps = 11;
  std::string arch;
  std::optional<std::string> gpu;
  std::string opt = "O3";
  std::string work_dir = "gpulat-build";
};

int cmd_list(const ListArgs& args);
int cmd_generate(const GenerateArgs& args);
int cmd_build(const BuildArgs& args);
int cmd_calibrate(const CalibrateArgs& args);
int cmd_measure(const MeasureArgs& args);
int cmd_report(const ReportArgs& args);
int cmd_diff(const DiffArgs& args);
int cmd_reference(const ReferenceArgs& args);
int cmd_fixtures(const FixturesArgs& args);

}  // namespace gpulat::cli
