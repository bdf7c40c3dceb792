#include "commands.hpp"

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gpulat/analysis.hpp"
#include "gpulat/errors.hpp"
#include "gpulat/fixtures.hpp"
#include "gpulat/isa_catalog.hpp"
#include "gpulat/pipeline.hpp"
#include "gpulat/ptx_codegen.hpp"
#include "gpulat/ptx_validator.hpp"
#include "gpulat/reference_data.hpp"
#include "gpulat/report.hpp"
#include "gpulat/subprocess.hpp"
#include "gpulat/toolchain.hpp"

namespace gpulat::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void print_error(const std::string& code, const std::string& message, const std::string& hint) {
  ordered_json j;
  j["error"] = code;
  j["message"] = message;
  if (!hint.empty()) j["hint"] = hint;
  std::cerr << j.dump() << "\n";
}

namespace {

void write_output(const std::optional<std::string>& path, const std::string& text) {
  if (!path) {
    std::cout << text;
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw IoError("cannot write " + *path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<OptLevel> parse_levels(const std::vector<std::string>& names) {
  std::vector<OptLevel> out;
  for (const auto& n : names) out.push_back(parse_opt_level(n));
  return out;
}

std::optional<InstructionCategory> parse_optional_category(const std::optional<std::string>& c) {
  if (!c) return std::nullopt;
  return parse_category(*c);
}

const toolchain::CommandTemplates& templates_from(const std::optional<std::string>& path,
                                                  std::optional<toolchain::CommandTemplates>& storage) {
  if (!path) return toolchain::CommandTemplates::builtin();
  storage = toolchain::CommandTemplates::load(*path);
  return *storage;
}

ptx::PtxModule module_for(const std::string& kernel_id, const ptx::CodegenOptions& options, bool literals) {
  const auto& catalog = isa::InstructionCatalog::instance();
  if (const auto* d = catalog.find_by_kernel_id(kernel_id)) {
    return ptx::emit_alu_kernel(*d, literals ? ptx::OperandPolicy::literals() : ptx::OperandPolicy{}, options);
  }
  if (const auto* p = catalog.find_probe_kernel(kernel_id)) return ptx::emit_probe_kernel(*p, options);
  throw UnknownInstruction("unknown kernel '" + kernel_id + "'");
}

std::vector<std::string> select_kernels(const std::vector<std::string>& explicit_ids,
                                        const std::optional<std::string>& category, ComputeCapability cc,
                                        bool probes) {
  if (!explicit_ids.empty()) return explicit_ids;
  std::vector<std::string> ids;
  for (const auto& d : isa::list_instructions(parse_optional_category(category), cc)) ids.push_back(d.kernel_id());
  if (probes && !category) {
    for (const auto& p : isa::InstructionCatalog::instance().probe_kernels()) ids.push_back(p.kernel_id);
  }
  return ids;
}

}  // namespace

int cmd_list(const ListArgs& args) {
  std::optional<ComputeCapability> cc;
  if (args.gpu) cc = ref::ReferenceData::embedded().gpu(*args.gpu).compute_capability;
  const auto list = isa::list_instructions(parse_optional_category(args.category), cc);
  if (args.format == "json") {
    ordered_json arr = ordered_json::array();
    for (const auto& d : list) {
      arr.push_back({{"kernelId", d.kernel_id()},
                     {"mnemonic", d.mnemonic},
                     {"category", std::string(to_string(d.category))},
                     {"dtype", std::string(to_string(d.data_type))},
                     {"signedness", std::string(to_string(d.signedness))},
                     {"variant", d.div_variant ? std::string(to_string(*d.div_variant)) : ""},
                     {"arity", d.operand_arity},
                     {"intrinsic", d.is_intrinsic},
                     {"minComputeCapability", d.min_compute_capability.to_string()},
                     {"reportGroup", d.report_group},
                     {"ptx", d.ptx_sequence}});
    }
    if (args.probes) {
      for (const auto& p : isa::InstructionCatalog::instance().probe_kernels()) {
        ordered_json outs = ordered_json::array();
        for (const auto& o : p.outputs) outs.push_back({{"output", o.output_name}, {"kind", std::string(to_string(o.kind))}});
        arr.push_back({{"kernelId", p.kernel_id}, {"category", "Memory"}, {"outputs", outs}, {"l1Modes", p.uses_l1_mode}});
      }
    }
    std::cout << arr.dump(2) << "\n";
    return kOk;
  }
  for (const auto& d : list) {
    std::string ptx;
    for (const auto& op : d.ptx_sequence) ptx += (ptx.empty() ? "" : "; ") + op;
    std::cout << d.kernel_id() << "\t" << to_string(d.category) << "\t" << ptx << "\t" << d.report_group << "\n";
  }
  if (args.probes) {
    for (const auto& p : isa::InstructionCatalog::instance().probe_kernels()) {
      std::cout << p.kernel_id << "\tMemory\t";
      for (std::size_t i = 0; i < p.outputs.size(); ++i) {
        std::cout << (i ? ", " : "") << p.outputs[i].output_name << "=" << to_string(p.outputs[i].kind);
      }
      std::cout << (p.uses_l1_mode ? "\tL1 on: L1Hit, L1 off: L2Hit" : "") << "\n";
    }
  }
  return kOk;
}

int cmd_generate(const GenerateArgs& args) {
  ptx::CodegenOptions options;
  options.target_arch = ComputeCapability::parse(args.arch).sm_name();
  const auto cc = ComputeCapability::parse(args.arch);
  fs::create_directories(args.out_dir);

  ordered_json manifest;
  manifest["targetArch"] = options.target_arch;
  manifest["ptxVersion"] = options.ptx_version;
  ordered_json kernels = ordered_json::array();
  int invalid = 0;
  for (const auto& id : select_kernels(args.kernels, args.category, cc, args.probes)) {
    const auto module = module_for(id, options, args.literals);
    const auto diags = ptx::validate_ptx(module);
    for (const auto& d : diags) std::cerr << module.kernel_id << ": " << d.code << ": " << d.message << "\n";
    if (!diags.empty()) ++invalid;
    const std::string file = module.file_stem + ".ptx";
    std::ofstream(fs::path(args.out_dir) / file, std::ios::binary) << module.text;

    ordered_json k;
    k["kernelId"] = module.kernel_id;
    k["file"] = file;
    k["entry"] = module.entry_name;
    k["kind"] = std::string(ptx::to_string(module.kind));
    if (module.descriptor) {
      const auto& d = *module.descriptor;
      k["descriptor"] = {{"mnemonic", d.mnemonic},
                         {"category", std::string(to_string(d.category))},
                         {"dtype", std::string(to_string(d.data_type))},
                         {"variant", d.div_variant ? std::string(to_string(*d.div_variant)) : ""},
                         {"reportGroup", d.report_group}};
    }
    if (module.divisor_class) {
      k["divisorClass"] = std::string(to_string(*module.divisor_class));
      k["divisor"] = *module.divisor_literal;
    }
    if (const auto* p = isa::InstructionCatalog::instance().find_probe_kernel(module.kernel_id)) {
      ordered_json outs = ordered_json::array();
      for (const auto& o : p->outputs) outs.push_back({{"output", o.output_name}, {"kind", std::string(to_string(o.kind))}});
      k["probe"] = {{"outputs", outs}, {"l1Modes", p->uses_l1_mode}};
    }
    k["outputs"] = module.cycle_output_names();
    k["timingBlocks"] = module.timing_blocks.size();
    kernels.push_back(std::move(k));
  }
  manifest["kernels"] = std::move(kernels);
  std::ofstream(fs::path(args.out_dir) / "manifest.json") << manifest.dump(2) << "\n";
  std::cout << "wrote " << manifest["kernels"].size() << " kernels to " << args.out_dir << "\n";
  return invalid ? kFailure : kOk;
}

int cmd_build(const BuildArgs& args) {
  std::optional<toolchain::CommandTemplates> storage;
  const auto& templates = templates_from(args.templates, storage);
  const auto cc = ComputeCapability::parse(args.arch);
  ptx::CodegenOptions options;
  options.target_arch = cc.sm_name();

  std::vector<L1Mode> global_modes;
  if (args.l1 == "on" || args.l1 == "both") global_modes.push_back(L1Mode::Enabled);
  if (args.l1 == "off" || args.l1 == "both") global_modes.push_back(L1Mode::Disabled);
  if (global_modes.empty()) throw ConfigError("--l1 must be on, off or both");

  toolchain::BuildConfig base;
  base.target_arch = options.target_arch;
  base.toolchain_version = args.toolchain;
  base.tool_paths = toolchain::default_tool_paths();

  std::vector<std::string> failures;
  for (const auto& level : parse_levels(args.opt_levels)) {
    for (const auto& id : select_kernels(args.kernels, args.category, cc, args.probes)) {
      ptx::PtxModule module;
      try {
        module = module_for(id, options, false);
      } catch (const Error& e) {
        print_error(e.code(), id + ": " + e.what());
        failures.push_back(id);
        continue;
      }
      std::vector<L1Mode> modes = {L1Mode::NotApplicable};
      if (module.kind == ptx::KernelKind::GlobalMemory) modes = global_modes;
      for (const L1Mode l1 : modes) {
        toolchain::BuildConfig cfg = base;
        cfg.opt_level = level;
        cfg.l1_mode = l1;
        cfg.work_dir = fs::path(args.out_dir) / options.target_arch / std::string(to_string(level));
        try {
          const auto plan = toolchain::plan_compilation(module, cfg, {}, templates);
          const auto result =
              toolchain::execute_plan(plan, args.dry_run ? toolchain::ExecMode::DryRun : toolchain::ExecMode::Real);
          if (args.dry_run) {
            std::cout << result.transcript << "\n";
          } else {
            std::cout << "built " << result.artifact.string() << "\n";
          }
        } catch (const ToolNotFound& e) {
          print_error(e.code(), e.what(), "install the CUDA toolchain, set GPULAT_CUDA_ROOT, or pass --dry-run");
          return kConfigError;
        } catch (const Error& e) {
          print_error(e.code(), module.kernel_id + ": " + e.what());
          failures.push_back(module.kernel_id);
        }
      }
    }
  }
  return failures.empty() ? kOk : kPartialFailure;
}

namespace {

struct HardwareContext {
  toolchain::ToolchainInfo info;
  std::string gpu_name;
  std::string arch;
};

// Returns nullopt after printing a structured error.
std::optional<HardwareContext> hardware_context(const std::optional<std::string>& gpu, const std::string& arch) {
  HardwareContext ctx;
  ctx.info = toolchain::detect_toolchain(toolchain::default_tool_paths());
  if (!ctx.info.available) {
    print_error("ToolNotFound", "no CUDA toolchain found (" + ctx.info.detail + ")",
                "use `gpulat build --dry-run` to inspect the build, or `gpulat measure --backend replay --fixtures DIR`");
    return std::nullopt;
  }
  if (!pipeline::gpu_device_present()) {
    print_error("NoDevice", "no NVIDIA GPU device node found",
                "use `gpulat build --dry-run` or `gpulat measure --backend replay --fixtures DIR`");
    return std::nullopt;
  }
  ctx.gpu_name = gpu.value_or("local");
  ctx.arch = arch;
  if (ctx.arch.empty()) {
    const auto* g = gpu ? ref::ReferenceData::embedded().find_gpu(*gpu) : nullptr;
    if (!g) {
      print_error("ConfigError", "--arch is required for a board outside the reference tables");
      return std::nullopt;
    }
    ctx.gpu_name = g->name;
    ctx.arch = g->compute_capability.sm_name();
  }
  return ctx;
}

std::vector<analysis::LatencyRecord> filter_records(std::vector<analysis::LatencyRecord> records,
                                                    const std::optional<std::string>& gpu,
                                                    const std::optional<std::string>& category) {
  std::vector<analysis::LatencyRecord> out;
  std::string gpu_name;
  if (gpu) {
    const auto* g = ref::ReferenceData::embedded().find_gpu(*gpu);
    gpu_name = g ? g->name : *gpu;
  }
  for (auto& r : records) {
    if (gpu && r.gpu_name != gpu_name) continue;
    if (category && r.category != std::string(to_string(parse_category(*category)))) continue;
    out.push_back(std::move(r));
  }
  return out;
}

void report_failures(const std::vector<runner::KernelFailure>& failures) {
  for (const auto& f : failures) print_error("BackendFailure", f.kernel_id + ": " + f.detail);
}

}  // namespace

int cmd_calibrate(const CalibrateArgs& args) {
  if (args.backend == "replay") {
    if (!args.fixtures) throw ConfigError("replay requires --fixtures DIR");
    runner::ReplayBackend backend;
    const auto m = runner::run_measurement(runner::discover_fixtures(*args.fixtures), backend);
    std::map<std::string, std::vector<Cycles>> per_gpu;
    for (const auto& s : m.samples) {
      const auto c = analysis::apply_warmup(s.clock_overhead_samples, false);
      per_gpu[s.gpu_name].push_back(analysis::clock_overhead(c));
    }
    for (const auto& [gpu, values] : per_gpu) {
      std::cout << gpu << "\tclock overhead " << analysis::median(values) << " cycles (" << values.size()
                << " sessions)\n";
    }
    report_failures(m.failures);
    return m.failures.empty() ? kOk : kPartialFailure;
  }
  if (args.backend != "hw") throw ConfigError("--backend must be hw or replay");
  const auto ctx = hardware_context(args.gpu, args.arch);
  if (!ctx) return kConfigError;

  ptx::CodegenOptions options;
  options.target_arch = ComputeCapability::parse(ctx->arch).sm_name();
  toolchain::BuildConfig cfg;
  cfg.opt_level = parse_opt_level(args.opt);
  cfg.target_arch = options.target_arch;
  cfg.toolchain_version = ctx->info.version;
  cfg.tool_paths = ctx->info.tool_paths;
  cfg.work_dir = fs::path(args.work_dir) / options.target_arch / args.opt;
  runner::LaunchConfig launch;
  launch.repetitions = args.reps;
  launch.validate();
  const auto plan = toolchain::plan_compilation(ptx::emit_clock_overhead_kernel(options), cfg, launch);
  const auto built = toolchain::execute_plan(plan, toolchain::ExecMode::Real);

  std::vector<Cycles> samples;
  for (unsigned i = 0; i < args.reps; ++i) {
    const auto pr = proc::run({fs::absolute(built.artifact).string()});
    if (pr.exit_code != 0) throw BackendFailure("clock_overhead", pr.stderr_text);
    for (const auto& l : runner::parse_result_lines(pr.stdout_text)) samples.push_back(l.value);
  }
  std::cout << ctx->gpu_name << "\tclock overhead "
            << analysis::clock_overhead(analysis::apply_warmup(samples, false)) << " cycles\n";
  return kOk;
}

int cmd_measure(const MeasureArgs& args) {
  pipeline::Outcome outcome;
  if (args.backend == "replay") {
    if (!args.fixtures) {
      print_error("ConfigError", "replay requires --fixtures DIR");
      return kConfigError;
    }
    outcome = pipeline::replay_directory(*args.fixtures);
    outcome.records = filter_records(std::move(outcome.records), args.gpu, args.category);
  } else if (args.backend == "hw") {
    const auto ctx = hardware_context(args.gpu, args.arch);
    if (!ctx) return kConfigError;
    std::optional<toolchain::CommandTemplates> storage;
    pipeline::HardwareOptions hw;
    hw.gpu_name = ctx->gpu_name;
    hw.target_arch = ctx->arch;
    hw.toolchain_version = ctx->info.version;
    hw.opt_levels = parse_levels(args.opt_levels);
    hw.tool_paths = ctx->info.tool_paths;
    hw.work_dir = args.work_dir;
    hw.launch.repetitions = args.reps;
    hw.launch.validate();
    hw.templates = &templates_from(args.templates, storage);
    const auto suite = pipeline::default_suite(ComputeCapability::parse(ctx->arch),
                                               parse_optional_category(args.category), args.probes);
    outcome = pipeline::measure_hardware(suite, hw);
  } else {
    print_error("ConfigError", "--backend must be hw or replay");
    return kConfigError;
  }

  if (args.record_dir) {
    fs::create_directories(*args.record_dir);
    for (const auto& s : outcome.samples) {
      const auto* g = ref::ReferenceData::embedded().find_gpu(s.gpu_name);
      const std::string slug = g ? g->slug : s.gpu_name;
      const std::string def = g ? g->toolchain_version : s.toolchain_version;
      runner::record_fixture(s, fs::path(*args.record_dir) /
                                    runner::fixture_filename(slug, s.kernel_id, s.opt_level, s.toolchain_version,
                                                             def, s.l1_mode));
    }
  }
  report::ViewOptions view;
  view.toolchain = args.toolchain;
  if (args.backend == "hw" && !view.toolchain && !outcome.samples.empty()) {
    view.toolchain = outcome.samples.front().toolchain_version;
  }
  write_output(args.out, report::render(outcome.records, report::parse_format(args.report),
                                        ref::ReferenceData::embedded(), view));
  report_failures(outcome.failures);
  return outcome.failures.empty() ? kOk : kPartialFailure;
}

int cmd_report(const ReportArgs& args) {
  std::vector<analysis::LatencyRecord> records;
  std::vector<runner::KernelFailure> failures;
  if (args.records) {
    records = report::parse_records_json(read_file(*args.records));
  } else if (args.fixtures) {
    auto outcome = pipeline::replay_directory(*args.fixtures);
    records = std::move(outcome.records);
    failures = std::move(outcome.failures);
  } else {
    print_error("ConfigError", "report needs --records FILE or --fixtures DIR");
    return kConfigError;
  }
  report::ViewOptions view;
  view.toolchain = args.toolchain;
  write_output(args.out, report::render(records, report::parse_format(args.format), ref::ReferenceData::embedded(), view));
  report_failures(failures);
  return failures.empty() ? kOk : kPartialFailure;
}

int cmd_diff(const DiffArgs& args) {
  if (args.against != "paper") {
    print_error("ConfigError", "only --against paper is supported");
    return kConfigError;
  }
  std::vector<analysis::LatencyRecord> records;
  std::vector<runner::KernelFailure> failures;
  if (args.records) {
    records = report::parse_records_json(read_file(*args.records));
  } else if (args.fixtures) {
    auto outcome = pipeline::replay_directory(*args.fixtures);
    records = std::move(outcome.records);
    failures = std::move(outcome.failures);
  } else {
    print_error("ConfigError", "diff needs --fixtures DIR or --records FILE");
    return kConfigError;
  }
  analysis::Tolerance tol;
  if (args.tolerance) {
    tol.alu_cycles = *args.tolerance;
    tol.memory_fraction = *args.tolerance == 0 ? 0.0 : tol.memory_fraction;
  }
  if (args.memory_tolerance) tol.memory_fraction = *args.memory_tolerance;
  const auto conformance = analysis::diff_vs_reference(records, ref::ReferenceData::embedded(), tol);
  const auto format = args.format == "text" ? report::Format::Markdown : report::parse_format(args.format);
  write_output(args.out, report::render_conformance(conformance, format));
  report_failures(failures);
  if (conformance.conforming_fraction() < args.threshold) return kConformanceFailure;
  return failures.empty() ? kOk : kPartialFailure;
}

int cmd_reference(const ReferenceArgs& args) {
  std::optional<ref::ReferenceData> loaded;
  if (args.data) loaded = ref::ReferenceData::load(*args.data);
  const ref::ReferenceData& data = loaded ? *loaded : ref::ReferenceData::embedded();

  if (args.checksum) {
    std::cout << data.checksum() << "\n";
    return kOk;
  }
  if (args.lookup) {
    const OptClass opt = args.opt == "optimized" || args.opt == "O3" ? OptClass::Optimized : OptClass::NonOptimized;
    if (args.table == "cuda") {
      const auto [a, b] = data.lookup_cuda_delta(*args.lookup);
      std::cout << data.cuda_versions().baseline << "\t" << a << "\n"
                << data.cuda_versions().candidate << "\t" << b << "\n";
      return kOk;
    }
    if (!args.gpu) throw ConfigError("--lookup needs --gpu");
    if (args.table == "memory") {
      std::cout << data.lookup_memory(*args.gpu, parse_probe_kind(*args.lookup), opt) << "\n";
    } else {
      std::cout << data.lookup(*args.gpu, *args.lookup, opt) << "\n";
    }
    return kOk;
  }
  std::cout << report::render_reference(data, report::parse_format(args.format), args.table);
  return kOk;
}

int cmd_fixtures(const FixturesArgs& args) {
  if (!args.check) {
    const auto n = fixtures::write_reference_fixtures(args.out_dir);
    std::cout << "wrote " << n << " fixtures to " << args.out_dir << "\n";
    return kOk;
  }
  std::set<std::string> expected;
  int drift = 0;
  for (const auto& f : fixtures::reference_fixtures()) {
    expected.insert(f.filename);
    const fs::path p = fs::path(args.out_dir) / f.filename;
    if (!fs::exists(p)) {
      std::cerr << "missing " << f.filename << "\n";
      ++drift;
    } else if (read_file(p.string()) != runner::fixture_to_json(f.samples)) {
      std::cerr << "differs " << f.filename << "\n";
      ++drift;
    }
  }
  for (const auto& e : fs::directory_iterator(args.out_dir)) {
    if (e.path().extension() == ".json" && !expected.contains(e.path().filename().string())) {
      std::cerr << "unexpected " << e.path().filename().string() << "\n";
      ++drift;
    }
  }
  std::cout << (drift ? "fixtures drifted: " + std::to_string(drift) + " files" : "fixtures up to date") << "\n";
  return drift ? kFailure : kOk;
}

}  // namespace gpulat::cli
