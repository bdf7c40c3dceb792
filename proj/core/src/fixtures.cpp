#include "gpulat/fixtures.hpp"

#include "gpulat/errors.hpp"
#include "gpulat/isa_catalog.hpp"

namespace gpulat::fixtures {

runner::RawSamples synthesize(const std::string& kernel_id, const std::string& output, Cycles latency,
                              const GpuTarget& gpu, const std::string& toolchain, OptLevel opt, bool cold) {
  runner::RawSamples s;
  s.kernel_id = kernel_id;
  s.gpu_name = gpu.name;
  s.toolchain_version = toolchain;
  s.opt_level = opt;
  s.clock_overhead_samples.assign(kSyntheticRepetitions, kSyntheticOverhead);
  s.clock_overhead_samples.front() += kWarmupPenalty;
  auto& values = s.samples[output];
  values.assign(kSyntheticRepetitions, latency + kSyntheticOverhead);
  if (!cold) values.front() += kWarmupPenalty;
  s.provenance = kSyntheticProvenance;
  return s;
}

namespace {

// Table row a descriptor's fixture value comes from. The FP64 division
// split is not published, so both variants take the average.
std::string value_key(const isa::InstructionDescriptor& d) {
  if (d.category == InstructionCategory::FP64 && d.mnemonic == "div") return "div (average) [f64]";
  return d.report_group;
}

void add(std::vector<FixtureFile>& out, runner::RawSamples s, const GpuTarget& gpu) {
  std::string name = runner::fixture_filename(gpu.slug, s.kernel_id, s.opt_level, s.toolchain_version,
                                              gpu.toolchain_version, s.l1_mode);
  out.push_back({std::move(name), std::move(s)});
}

}  // namespace

std::vector<FixtureFile> reference_fixtures(const ref::ReferenceData& data) {
  std::vector<FixtureFile> out;
  const auto& catalog = isa::InstructionCatalog::instance();
  constexpr OptLevel kLevels[] = {OptLevel::O0, OptLevel::O3};

  for (const auto& gpu : data.gpus()) {
    for (const auto& d : catalog.list_instructions(std::nullopt, gpu.compute_capability)) {
      for (OptLevel opt : kLevels) {
        const Cycles v = data.lookup(gpu.name, value_key(d), *opt_class_of(opt));
        add(out, synthesize(d.kernel_id(), "cycles", v, gpu, gpu.toolchain_version, opt), gpu);
      }
    }
  }

  const auto& cuda = data.cuda_versions();
  for (const auto& gpu_name : cuda.gpus) {
    const GpuTarget& gpu = data.gpu(gpu_name);
    for (const auto& d : catalog.list_instructions(std::nullopt, gpu.compute_capability)) {
      const auto* row = data.find_cuda_row(value_key(d));
      if (!row) continue;
      add(out, synthesize(d.kernel_id(), "cycles", row->candidate, gpu, cuda.candidate, OptLevel::O3), gpu);
    }
  }

  for (const auto& gpu_name : data.memory_gpus()) {
    const GpuTarget& gpu = data.gpu(gpu_name);
    for (const auto kind : {MemoryProbeKind::SharedMemory, MemoryProbeKind::ConstantMemory}) {
      const auto& probe = catalog.probe_kernel_for(kind);
      for (OptLevel opt : kLevels) {
        const Cycles v = data.lookup_memory(gpu.name, kind, *opt_class_of(opt));
        add(out, synthesize(probe.kernel_id, probe.outputs.front().output_name, v, gpu, gpu.toolchain_version, opt),
            gpu);
      }
    }
  }
  return out;
}

std::size_t write_reference_fixtures(const std::filesystem::path& dir, const ref::ReferenceData& data) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto files = reference_fixtures(data);
  for (const auto& f : files) runner::record_fixture(f.samples, dir / f.filename);
  return files.size();
}

}  // namespace gpulat::fixtures
