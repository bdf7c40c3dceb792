#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpulat/ptx_module.hpp"
#include "gpulat/runner.hpp"
#include "gpulat/types.hpp"

namespace gpulat::toolchain {

struct BuildConfig {
  OptLevel opt_level = OptLevel::O3;
  L1Mode l1_mode = L1Mode::NotApplicable;
  std::string target_arch = "sm_70";       // "sm_70", "7.0" or "70"
  std::string toolchain_version = "default";  // template key
  std::map<std::string, std::string> tool_paths;  // tool name -> executable
  std::filesystem::path work_dir = ".";
};

struct TemplateStep {
  std::string name;
  std::string tool;
  std::vector<std::string> args;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string stdout_file;  // empty: stdout is only captured
};

struct ToolchainTemplate {
  std::map<std::string, std::string> opt_flags;       // "O3" -> "-O3"
  std::map<std::string, std::string> host_opt_flags;
  std::string arch_flag;                              // "-arch={sm}"
  std::map<std::string, std::string> l1_flags;        // "enabled" -> "-dlcm=ca"
  std::vector<TemplateStep> steps;
};

// Command templates keyed by toolchain version, with "default" as the
// fallback for versions not listed.
class CommandTemplates {
 public:
  static const CommandTemplates& builtin();
  static CommandTemplates parse(std::string_view json_text);
  static CommandTemplates load(const std::filesystem::path& path);

  const ToolchainTemplate& for_version(std::string_view version) const;
  std::vector<std::string> versions() const;

 private:
  std::map<std::string, ToolchainTemplate, std::less<>> toolchains_;
};

struct CommandStep {
  std::string name;
  std::string tool;        // template tool name, "ptxas"
  std::string executable;  // resolved path or bare name
  std::vector<std::string> args;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string stdout_file;

  std::string command_line() const;  // executable + args (+ " > file")
  bool operator==(const CommandStep&) const = default;
};

struct GeneratedFile {
  std::string path;  // relative to the work dir
  std::string content;
  bool operator==(const GeneratedFile&) const = default;
};

struct CommandPlan {
  std::string kernel_id;
  std::string opt_level;
  std::string l1_mode;
  std::string target_arch;
  std::string toolchain_version;
  std::filesystem::path work_dir;
  std::vector<GeneratedFile> sources;  // written before the first step
  std::vector<CommandStep> steps;
  std::string artifact;  // executable, relative to work_dir

  // Initial inputs are the generated sources.
  std::vector<std::string> initial_inputs() const;
  bool operator==(const CommandPlan&) const = default;
};

// Line-oriented rendering used for dry runs and golden files.
std::string format_transcript(const CommandPlan& plan);

// Pure. Throws UnsupportedConfig for unrealizable configurations (FP16 on
// an architecture below sm_60, an L1 mode on a kernel without global
// loads) and ConfigError for malformed templates.
CommandPlan plan_compilation(const ptx::PtxModule& module, const BuildConfig& cfg,
                             const runner::LaunchConfig& launch = {},
                             const CommandTemplates& templates = CommandTemplates::builtin());

enum class ExecMode : std::uint8_t { Real, DryRun };
enum class StepStatus : std::uint8_t { Planned, Succeeded, Failed, Skipped };

std::string_view to_string(StepStatus s);

struct StepResult {
  std::size_t index = 0;
  std::string name;
  std::string command;
  StepStatus status = StepStatus::Planned;
  int exit_code = 0;
  std::string stdout_text;
  std::string stderr_text;
};

struct BuildResult {
  ExecMode mode = ExecMode::DryRun;
  StepStatus status = StepStatus::Planned;
  std::vector<StepResult> steps;
  std::filesystem::path artifact;
  std::string transcript;
};

// Dry runs touch neither the filesystem nor the process table. Real runs
// write the sources, then run the steps in order and stop at the first
// failure. Throws ToolNotFound (checked for every step before anything
// runs) and StepFailed.
BuildResult execute_plan(const CommandPlan& plan, ExecMode mode);

// File names derived from a module under a configuration.
std::string build_stem(const ptx::PtxModule& module, const BuildConfig& cfg);

// C++ host program for the driver API: loads the embedded fatbinary,
// prepares every parameter, launches with the given geometry, copies back
// the outputs and prints `RESULT <kernel> <output> <value>` per cycle
// output. `fatbin_header` and `fatbin_symbol` name the embedded image.
std::string emit_host_launcher(const ptx::PtxModule& module, const runner::LaunchConfig& launch = {},
                               const std::string& fatbin_header = "kernel_fatbin.h",
                               const std::string& fatbin_symbol = "kernel_fatbin");

struct ToolchainInfo {
  bool available = false;
  std::string version;  // "10.0"
  std::map<std::string, std::string> tool_paths;
  std::vector<std::string> architectures;  // sm_XX targets the version accepts
  std::string detail;                      // why unavailable
};

// Runs `<ptxas or nvcc> --version`. Never throws.
ToolchainInfo detect_toolchain(const std::map<std::string, std::string>& tool_paths);

// Extracts "X.Y" from "... release X.Y, ..."; nullopt when absent.
std::optional<std::string> parse_release_version(std::string_view version_output);

// Tool paths for an installation root ($root/bin/<tool>).
std::map<std::string, std::string> tool_paths_for_root(const std::filesystem::path& root);

inline constexpr const char* kCudaRootEnv = "GPULAT_CUDA_ROOT";

// $GPULAT_CUDA_ROOT when set, else the installation holding nvcc on PATH.
// Empty when neither exists.
std::map<std::string, std::string> default_tool_paths();

}  // namespace gpulat::toolchain
