#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gpulat::proc {

struct ProcessResult {
  int exit_code = 0;  // 128 + signal when killed by a signal
  std::string stdout_text;
  std::string stderr_text;
};

// Runs argv[0] (searched on PATH when it contains no slash) with the given
// working directory and waits for it. Throws ToolNotFound when the
// executable cannot be started and IoError on pipe failures.
ProcessResult run(const std::vector<std::string>& argv, const std::filesystem::path& cwd = {});

// Resolves an executable name against PATH; absolute and relative paths
// are checked directly.
std::optional<std::filesystem::path> find_executable(const std::string& name);

// Counts child processes spawned through run(). Used by tests to assert
// serialization.
struct ProcessRegistry {
  static std::size_t live();
  static std::size_t peak();
  static std::size_t spawned();
  static void reset_peak();
};

}  // namespace gpulat::proc
