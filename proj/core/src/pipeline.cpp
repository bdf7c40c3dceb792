#include "gpulat/pipeline.hpp"

#include <filesystem>

#include "gpulat/errors.hpp"
#include "gpulat/isa_catalog.hpp"
#include "gpulat/ptx_codegen.hpp"

namespace gpulat::pipeline {

std::vector<analysis::LatencyRecord> reduce_all(const std::vector<runner::RawSamples>& samples,
                                                analysis::Provenance provenance) {
  std::vector<analysis::LatencyRecord> records;
  for (const auto& s : samples) {
    auto r = analysis::reduce(s, provenance);
    records.insert(records.end(), r.begin(), r.end());
  }
  return analysis::derive_div_averages(std::move(records));
}

Outcome replay_directory(const std::filesystem::path& dir) {
  runner::ReplayBackend backend;
  auto m = runner::run_measurement(runner::discover_fixtures(dir), backend);
  Outcome out;
  out.failures = std::move(m.failures);
  out.samples = std::move(m.samples);
  out.records = reduce_all(out.samples, analysis::Provenance::Replayed);
  return out;
}

std::vector<SuiteEntry> default_suite(ComputeCapability cc, std::optional<InstructionCategory> category,
                                      bool with_probes) {
  std::vector<SuiteEntry> suite;
  for (const auto& d : isa::list_instructions(category, cc)) suite.push_back({d.kernel_id(), L1Mode::NotApplicable});
  if (with_probes) {
    for (const auto& p : isa::InstructionCatalog::instance().probe_kernels()) {
      if (p.kernel_id == "clock_overhead") continue;
      if (p.uses_l1_mode) {
        suite.push_back({p.kernel_id, L1Mode::Enabled});
        suite.push_back({p.kernel_id, L1Mode::Disabled});
      } else {
        suite.push_back({p.kernel_id, L1Mode::NotApplicable});
      }
    }
  }
  return suite;
}

namespace {

ptx::PtxModule module_for(const std::string& kernel_id, const ptx::CodegenOptions& options) {
  const auto& catalog = isa::InstructionCatalog::instance();
  if (const auto* d = catalog.find_by_kernel_id(kernel_id)) return ptx::emit_alu_kernel(*d, {}, options);
  if (const auto* p = catalog.find_probe_kernel(kernel_id)) return ptx::emit_probe_kernel(*p, options);
  throw UnknownInstruction("unknown kernel '" + kernel_id + "'");
}

std::filesystem::path build_one(const ptx::PtxModule& module, const toolchain::BuildConfig& cfg,
                                const HardwareOptions& options) {
  const auto& templates = options.templates ? *options.templates : toolchain::CommandTemplates::builtin();
  const auto plan = toolchain::plan_compilation(module, cfg, options.launch, templates);
  const auto result = toolchain::execute_plan(plan, toolchain::ExecMode::Real);
  return std::filesystem::absolute(result.artifact);
}

}  // namespace

Outcome measure_hardware(const std::vector<SuiteEntry>& suite, const HardwareOptions& options) {
  Outcome out;
  ptx::CodegenOptions codegen;
  codegen.target_arch = ComputeCapability::parse(options.target_arch).sm_name();

  std::vector<runner::KernelRef> refs;
  for (OptLevel opt : options.opt_levels) {
    toolchain::BuildConfig base;
    base.opt_level = opt;
    base.target_arch = codegen.target_arch;
    base.toolchain_version = options.toolchain_version;
    base.tool_paths = options.tool_paths;
    base.work_dir = options.work_dir / codegen.target_arch / std::string(to_string(opt));

    std::filesystem::path overhead_exe;
    try {
      overhead_exe = build_one(ptx::emit_clock_overhead_kernel(codegen), base, options);
    } catch (const Error& e) {
      for (const auto& entry : suite) out.failures.push_back({entry.kernel_id, std::string("calibration build: ") + e.what()});
      continue;
    }

    for (const auto& entry : suite) {
      try {
        const auto module = module_for(entry.kernel_id, codegen);
        toolchain::BuildConfig cfg = base;
        cfg.l1_mode = entry.l1_mode;
        runner::KernelRef ref;
        ref.executable = build_one(module, cfg, options);
        ref.clock_overhead_executable = overhead_exe;
        ref.kernel_id = module.kernel_id;
        ref.gpu_name = options.gpu_name;
        ref.toolchain_version = options.toolchain_version;
        ref.opt_level = opt;
        ref.l1_mode = entry.l1_mode;
        ref.output_names = module.cycle_output_names();
        refs.push_back(std::move(ref));
      } catch (const Error& e) {
        out.failures.push_back({entry.kernel_id, std::string("build: ") + e.what()});
      }
    }
  }

  runner::HardwareBackend backend;
  auto m = runner::run_measurement(refs, backend, options.launch);
  out.samples = std::move(m.samples);
  out.failures.insert(out.failures.end(), m.failures.begin(), m.failures.end());
  out.records = reduce_all(out.samples, analysis::Provenance::Measured);
  return out;
}

bool gpu_device_present() {
  std::error_code ec;
  return std::filesystem::exists("/dev/nvidia0", ec) || std::filesystem::exists("/dev/nvidiactl", ec);
}

}  // namespace gpulat::pipeline
