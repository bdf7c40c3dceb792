#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gpulat {

// Every error the library raises derives from Error and carries a stable
// machine-readable code used by the CLI's structured error output.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define GPULAT_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  }

GPULAT_DEFINE_ERROR(UnknownInstruction);
GPULAT_DEFINE_ERROR(UnsupportedOnTarget);
GPULAT_DEFINE_ERROR(UnsupportedConfig);
GPULAT_DEFINE_ERROR(ZeroDivisor);
GPULAT_DEFINE_ERROR(ToolNotFound);
GPULAT_DEFINE_ERROR(IoError);
GPULAT_DEFINE_ERROR(SchemaError);
GPULAT_DEFINE_ERROR(EmptySamples);
GPULAT_DEFINE_ERROR(MixedKeys);
GPULAT_DEFINE_ERROR(NotInTable);
GPULAT_DEFINE_ERROR(NotApplicable);
GPULAT_DEFINE_ERROR(ParseError);
GPULAT_DEFINE_ERROR(ConfigError);

#undef GPULAT_DEFINE_ERROR

class StepFailed : public Error {
 public:
  StepFailed(std::size_t step_index, int exit_code, std::string captured_stderr)
      : Error("StepFailed", "build step " + std::to_string(step_index) +
                                " failed with exit code " + std::to_string(exit_code) +
                                (captured_stderr.empty() ? "" : ": " + captured_stderr)),
        step_index_(step_index),
        exit_code_(exit_code),
        stderr_(std::move(captured_stderr)) {}

  std::size_t step_index() const noexcept { return step_index_; }
  int exit_code() const noexcept { return exit_code_; }
  const std::string& captured_stderr() const noexcept { return stderr_; }

 private:
  std::size_t step_index_;
  int exit_code_;
  std::string stderr_;
};

class BackendFailure : public Error {
 public:
  BackendFailure(std::string kernel_id, std::string detail)
      : Error("BackendFailure", kernel_id + ": " + detail),
        kernel_id_(std::move(kernel_id)),
        detail_(std::move(detail)) {}

  const std::string& kernel_id() const noexcept { return kernel_id_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string kernel_id_;
  std::string detail_;
};

}  // namespace gpulat
