#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "gpulat/analysis.hpp"
#include "gpulat/errors.hpp"
#include "gpulat/fixtures.hpp"
#include "gpulat/isa_catalog.hpp"
#include "gpulat/pipeline.hpp"
#include "gpulat/ptx_codegen.hpp"
#include "gpulat/runner.hpp"
#include "gpulat/subprocess.hpp"
#include "gpulat/toolchain.hpp"

using namespace gpulat;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = GPULAT_SOURCE_DIR;

struct TempDir {
  fs::path path;
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "gpulat-test-XXXXXX").string();
    path = ::mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_script(const fs::path& p, const std::string& body) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << "#!/bin/sh\n" << body;
  fs::permissions(p, fs::perms::owner_all | fs::perms::group_read | fs::perms::group_exec, fs::perm_options::replace);
}

// A stand-in CUDA installation. The assembler copies its input through and
// fails on PTX containing BROKEN; the linker turns the launcher's printf
// formats into a script printing a fixed value per output.
void write_fake_toolchain(const fs::path& root, const std::string& release = "10.0") {
  const std::string version = "if [ \"$1\" = \"--version\" ]; then echo \"Cuda compilation tools, release " + release +
                              ", V" + release + ".130\"; exit 0; fi\n";
  write_script(root / "bin/ptxas", version + R"(out=""; prev=""; last=""
for a in "$@"; do [ "$prev" = "-o" ] && out="$a"; prev="$a"; last="$a"; done
if grep -q BROKEN "$last"; then echo "ptxas fatal : syntax error in $last" >&2; exit 1; fi
cp "$last" "$out"
)");
  write_script(root / "bin/fatbinary", R"(for a in "$@"; do case "$a" in --create=*) out="${a#--create=}";; --image=*) f="${a##*file=}";; esac; done
cp "$f" "$out"
)");
  write_script(root / "bin/bin2c", R"(echo "static const unsigned char image[] = {0};"
)");
  write_script(root / "bin/nvcc", version + R"(out=""; prev=""; src=""; obj=""; compile=0
for a in "$@"; do
  [ "$prev" = "-o" ] && out="$a"
  [ "$prev" = "-c" ] && src="$a"
  [ "$a" = "-c" ] && compile=1
  case "$a" in *.o) [ "$prev" != "-o" ] && obj="$a";; esac
  prev="$a"
done
if [ $compile = 1 ]; then cp "$src" "$out"; exit 0; fi
{ echo '#!/bin/sh'
  grep -o 'RESULT [A-Za-z0-9_]* [a-z_]* %u' "$obj" | while read tag k o fmt; do
    case "$k" in clock_overhead) v=14;; *div*) v=214;; *) v=20;; esac
    echo "echo RESULT $k $o $v"
  done; } > "$out"
chmod +x "$out"
)");
}

toolchain::BuildConfig config(OptLevel opt, L1Mode l1, const std::string& arch) {
  toolchain::BuildConfig c;
  c.opt_level = opt;
  c.l1_mode = l1;
  c.target_arch = arch;
  c.work_dir = fs::path("gpulat-build") / arch / std::string(to_string(opt));
  return c;
}

const isa::InstructionDescriptor& add_u32() { return isa::descriptor_for("add", DataType::u32); }

bool contains(const std::vector<std::string>& v, std::string_view s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

ptx::CodegenOptions for_arch(const std::string& arch) {
  ptx::CodegenOptions o;
  o.target_arch = arch;
  return o;
}

TEST(Plan, OptAndArchFlags) {
  const auto plan = toolchain::plan_compilation(ptx::emit_alu_kernel(add_u32(), {}, for_arch("sm_35")),
                                                config(OptLevel::O3, L1Mode::NotApplicable, "sm_35"));
  ASSERT_FALSE(plan.steps.empty());
  EXPECT_EQ(plan.steps[0].tool, "ptxas");
  EXPECT_TRUE(contains(plan.steps[0].args, "-O3"));
  EXPECT_TRUE(contains(plan.steps[0].args, "-arch=sm_35"));
}

TEST(Plan, L1Flags) {
  const auto global = ptx::emit_global_memory_kernel(for_arch("sm_60"));
  const auto off = toolchain::plan_compilation(global, config(OptLevel::O3, L1Mode::Disabled, "sm_60"));
  EXPECT_TRUE(contains(off.steps[0].args, "-dlcm=cg"));
  const auto on = toolchain::plan_compilation(global, config(OptLevel::O3, L1Mode::Enabled, "sm_60"));
  EXPECT_TRUE(contains(on.steps[0].args, "-dlcm=ca"));
  EXPECT_THROW(toolchain::plan_compilation(ptx::emit_alu_kernel(add_u32(), {}, for_arch("sm_60")),
                                           config(OptLevel::O3, L1Mode::Enabled, "sm_60")),
               UnsupportedConfig);
}

TEST(Plan, Fp16BelowPascalRejected) {
  ptx::CodegenOptions pascal;
  pascal.target_arch = "sm_60";
  const auto m = ptx::emit_alu_kernel(isa::descriptor_for("fma", DataType::f16), {}, pascal);
  EXPECT_NO_THROW(toolchain::plan_compilation(m, config(OptLevel::O3, L1Mode::NotApplicable, "sm_60")));
  EXPECT_THROW(toolchain::plan_compilation(m, config(OptLevel::O3, L1Mode::NotApplicable, "sm_35")), UnsupportedConfig);
  EXPECT_THROW(toolchain::plan_compilation(ptx::emit_alu_kernel(add_u32()), config(OptLevel::O3, L1Mode::NotApplicable, "sm_35")),
               UnsupportedConfig);
}

TEST(Plan, Deterministic) {
  const auto m = ptx::emit_global_memory_kernel();
  const auto cfg = config(OptLevel::O0, L1Mode::Disabled, "sm_70");
  EXPECT_EQ(toolchain::format_transcript(toolchain::plan_compilation(m, cfg)),
            toolchain::format_transcript(toolchain::plan_compilation(m, cfg)));
  EXPECT_EQ(toolchain::plan_compilation(m, cfg), toolchain::plan_compilation(m, cfg));
}

TEST(Plan, DagSoundAndFlagFidelity) {
  const std::vector<OptLevel> levels = {OptLevel::O0, OptLevel::O1, OptLevel::O2, OptLevel::O3};
  ptx::CodegenOptions volta;
  for (const auto& d : isa::InstructionCatalog::instance().all()) {
    for (const OptLevel opt : levels) {
      const auto plan = toolchain::plan_compilation(ptx::emit_alu_kernel(d, {}, volta),
                                                    config(opt, L1Mode::NotApplicable, "sm_70"));
      auto available = plan.initial_inputs();
      const std::string flag = "-" + std::string(to_string(opt));
      std::vector<std::string> flagged;
      for (const auto& s : plan.steps) {
        for (const auto& in : s.inputs) EXPECT_TRUE(contains(available, in)) << s.name << " needs " << in;
        available.insert(available.end(), s.outputs.begin(), s.outputs.end());
        if (contains(s.args, flag)) flagged.push_back(s.name);
      }
      EXPECT_EQ(flagged, (std::vector<std::string>{"assemble", "host-compile"})) << d.kernel_id();
      EXPECT_TRUE(contains(available, plan.artifact));
    }
  }
}

TEST(Plan, WorkflowOrder) {
  const auto plan = toolchain::plan_compilation(ptx::emit_alu_kernel(add_u32()), config(OptLevel::O3, L1Mode::NotApplicable, "sm_70"));
  std::vector<std::string> names;
  for (const auto& s : plan.steps) names.push_back(s.name);
  EXPECT_EQ(names, (std::vector<std::string>{"assemble", "fatbinary", "embed", "host-compile", "link"}));
}

TEST(Plan, Templates) {
  const auto& t = toolchain::CommandTemplates::builtin();
  EXPECT_TRUE(contains(t.versions(), "default"));
  EXPECT_EQ(&t.for_version("8.0"), &t.for_version("default"));
  EXPECT_THROW(toolchain::CommandTemplates::parse(R"({"schemaVersion": 7, "toolchains": {}})"), Error);
  EXPECT_NO_THROW(toolchain::CommandTemplates::load(kSource / "config/command_templates.json"));
}

// Byte-for-byte comparison with the checked-in dry-run transcripts.
TEST(Golden, GlobalKernelTranscripts) {
  for (const std::string arch : {"sm_35", "sm_70"}) {
    ptx::CodegenOptions options;
    options.target_arch = arch;
    const auto m = ptx::emit_global_memory_kernel(options);
    for (const OptLevel opt : {OptLevel::O0, OptLevel::O3}) {
      for (const L1Mode l1 : {L1Mode::Enabled, L1Mode::Disabled}) {
        const auto result = toolchain::execute_plan(toolchain::plan_compilation(m, config(opt, l1, arch)),
                                                    toolchain::ExecMode::DryRun);
        const std::string name = "global_ld_" + arch + "_" + std::string(to_string(opt)) + "_" +
                                 (l1 == L1Mode::Enabled ? "ca" : "cg") + ".txt";
        const auto golden = kSource / "tests/golden" / name;
        ASSERT_TRUE(fs::exists(golden)) << golden;
        EXPECT_EQ(result.transcript, slurp(golden)) << name;
      }
    }
  }
}

TEST(Execute, DryRunIsPure) {
  TempDir tmp;
  auto cfg = config(OptLevel::O3, L1Mode::NotApplicable, "sm_70");
  cfg.work_dir = tmp.path / "never";
  const auto plan = toolchain::plan_compilation(ptx::emit_alu_kernel(add_u32()), cfg);
  const auto spawned = proc::ProcessRegistry::spawned();
  const auto r = toolchain::execute_plan(plan, toolchain::ExecMode::DryRun);
  EXPECT_EQ(proc::ProcessRegistry::spawned(), spawned);
  EXPECT_FALSE(fs::exists(cfg.work_dir));
  EXPECT_EQ(r.status, toolchain::StepStatus::Planned);
  ASSERT_EQ(r.steps.size(), plan.steps.size());
  for (const auto& s : plan.steps) EXPECT_NE(r.transcript.find(s.command_line()), std::string::npos);
}

TEST(Execute, MissingTool) {
  TempDir tmp;
  auto cfg = config(OptLevel::O3, L1Mode::NotApplicable, "sm_70");
  cfg.work_dir = tmp.path / "w";
  cfg.tool_paths = toolchain::tool_paths_for_root(tmp.path / "nowhere");
  const auto plan = toolchain::plan_compilation(ptx::emit_alu_kernel(add_u32()), cfg);
  EXPECT_THROW(toolchain::execute_plan(plan, toolchain::ExecMode::Real), ToolNotFound);
  EXPECT_FALSE(fs::exists(cfg.work_dir));
}

TEST(Execute, FakeToolchainBuilds) {
  TempDir tmp;
  write_fake_toolchain(tmp.path / "cuda");
  auto cfg = config(OptLevel::O3, L1Mode::NotApplicable, "sm_70");
  cfg.work_dir = tmp.path / "w";
  cfg.tool_paths = toolchain::tool_paths_for_root(tmp.path / "cuda");
  const auto module = ptx::emit_alu_kernel(add_u32());
  const auto r = toolchain::execute_plan(toolchain::plan_compilation(module, cfg), toolchain::ExecMode::Real);
  EXPECT_EQ(r.status, toolchain::StepStatus::Succeeded);
  ASSERT_TRUE(fs::exists(r.artifact));
  const auto out = proc::run({fs::absolute(r.artifact).string()});
  EXPECT_EQ(runner::parse_result_lines(out.stdout_text),
            (std::vector<runner::ResultLine>{{"add_u32", "cycles", 20}}));
}

TEST(Execute, CorruptPtxFailsAtStepZero) {
  TempDir tmp;
  write_fake_toolchain(tmp.path / "cuda");
  auto cfg = config(OptLevel::O3, L1Mode::NotApplicable, "sm_70");
  cfg.work_dir = tmp.path / "w";
  cfg.tool_paths = toolchain::tool_paths_for_root(tmp.path / "cuda");
  auto plan = toolchain::plan_compilation(ptx::emit_alu_kernel(add_u32()), cfg);
  for (auto& src : plan.sources) {
    if (src.path.ends_with(".ptx")) src.content += "\nBROKEN\n";
  }
  try {
    toolchain::execute_plan(plan, toolchain::ExecMode::Real);
    FAIL() << "expected StepFailed";
  } catch (const StepFailed& e) {
    EXPECT_EQ(e.step_index(), 0u);
    EXPECT_FALSE(e.captured_stderr().empty());
  }
}

TEST(Toolchain, Detect) {
  EXPECT_FALSE(toolchain::detect_toolchain({}).available);
  TempDir tmp;
  write_fake_toolchain(tmp.path / "cuda10", "10.0");
  write_fake_toolchain(tmp.path / "cuda9", "9.0");
  const auto v10 = toolchain::detect_toolchain(toolchain::tool_paths_for_root(tmp.path / "cuda10"));
  EXPECT_TRUE(v10.available);
  EXPECT_EQ(v10.version, "10.0");
  EXPECT_TRUE(contains(v10.architectures, "sm_75"));
  const auto v9 = toolchain::detect_toolchain(toolchain::tool_paths_for_root(tmp.path / "cuda9"));
  EXPECT_EQ(v9.version, "9.0");
  EXPECT_FALSE(contains(v9.architectures, "sm_75"));
  EXPECT_FALSE(toolchain::detect_toolchain(toolchain::tool_paths_for_root(tmp.path / "none")).available);
  EXPECT_EQ(toolchain::parse_release_version("nvcc: NVIDIA (R)\nCuda compilation tools, release 9.2, V9.2.148"), "9.2");
  EXPECT_EQ(toolchain::parse_release_version("garbage"), std::nullopt);
}

TEST(Launcher, Geometry) {
  const auto src = toolchain::emit_host_launcher(ptx::emit_alu_kernel(add_u32()));
  EXPECT_NE(src.find("kGrid[3] = {1, 1, 1}"), std::string::npos);
  EXPECT_NE(src.find("kBlock[3] = {1, 1, 1}"), std::string::npos);
}

TEST(Launcher, ResultLinesPerOutput) {
  auto count = [](const std::string& s) {
    std::size_t n = 0;
    for (auto p = s.find("printf(\"RESULT "); p != std::string::npos; p = s.find("printf(\"RESULT ", p + 1)) ++n;
    return n;
  };
  EXPECT_EQ(count(toolchain::emit_host_launcher(ptx::emit_global_memory_kernel())), 2u);
  EXPECT_EQ(count(toolchain::emit_host_launcher(ptx::emit_clock_overhead_kernel())), 1u);
  const auto tex = toolchain::emit_host_launcher(ptx::emit_texture_kernel());
  EXPECT_NE(tex.find("cuTexObjectCreate"), std::string::npos);
}

TEST(Runner, LaunchConfigValidation) {
  runner::LaunchConfig ok;
  EXPECT_NO_THROW(ok.validate());
  runner::LaunchConfig wide;
  wide.block.x = 32;
  EXPECT_THROW(wide.validate(), ConfigError);
  runner::LaunchConfig few;
  few.repetitions = 2;
  EXPECT_THROW(few.validate(), ConfigError);
}

TEST(Runner, ParseResultLines) {
  EXPECT_EQ(runner::parse_result_lines("# sink 3\n\nRESULT add_u32 cycles 23\n"),
            (std::vector<runner::ResultLine>{{"add_u32", "cycles", 23}}));
  EXPECT_THROW(runner::parse_result_lines("RESULT add_u32 cycles\n"), ParseError);
  EXPECT_THROW(runner::parse_result_lines("hello\n"), ParseError);
  EXPECT_THROW(runner::parse_result_lines("RESULT a b -3\n"), ParseError);
}

TEST(Fixture, RoundTripArbitrary) {
  TempDir tmp;
  std::uint32_t state = 12345;
  auto next = [&] { return state = state * 1103515245u + 12345u; };
  for (int trial = 0; trial < 50; ++trial) {
    runner::RawSamples s;
    s.kernel_id = "k" + std::to_string(next() % 1000);
    s.gpu_name = "G" + std::to_string(trial);
    s.toolchain_version = trial % 2 ? "9.0" : "10.0";
    s.opt_level = static_cast<OptLevel>(next() % 4);
    s.l1_mode = static_cast<L1Mode>(next() % 3);
    const auto outs = 1 + next() % 3;
    for (unsigned o = 0; o < outs; ++o) {
      auto& v = s.samples["out" + std::to_string(o)];
      for (unsigned i = 0, n = 1 + next() % 20; i < n; ++i) v.push_back(next() % runner::kMaxPlausibleDelta);
    }
    for (unsigned i = 0, n = 1 + next() % 20; i < n; ++i) s.clock_overhead_samples.push_back(next() % 100);
    if (trial % 3 == 0) s.provenance = "trial " + std::to_string(trial);
    const auto path = tmp.path / ("f" + std::to_string(trial) + ".json");
    runner::record_fixture(s, path);
    EXPECT_EQ(runner::load_fixture(path), s);
  }
}

TEST(Fixture, SchemaErrors) {
  auto load = [](const std::string& text) { return runner::fixture_from_json(text); };
  EXPECT_THROW(load(R"({"schemaVersion": 99, "kernelId": "a", "gpuName": "b", "toolchainVersion": "9.0",
                        "optLevel": "O3", "clockOverheadSamples": [1], "outputs": {"cycles": [1]}})"),
               SchemaError);
  EXPECT_THROW(load(R"({"schemaVersion": 1, "kernelId": "a", "gpuName": "b", "toolchainVersion": "9.0",
                        "optLevel": "O3", "clockOverheadSamples": [1], "outputs": {"cycles": [4294967295]}})"),
               SchemaError);
  EXPECT_THROW(load(R"({"schemaVersion": 1, "kernelId": "a", "gpuName": "b", "toolchainVersion": "9.0",
                        "optLevel": "O3", "clockOverheadSamples": [1], "outputs": {}})"),
               SchemaError);
  EXPECT_THROW(runner::load_fixture("/nonexistent/fixture.json"), IoError);
}

TEST(Fixture, ShippedAddU32) {
  const auto s = runner::load_fixture(kSource / "fixtures/reference/k40m_add_u32_O3.json");
  const auto records = analysis::reduce(s, analysis::Provenance::Replayed);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].latency_cycles, 9u);
}

TEST(Fixture, ShippedSetMatchesGenerator) {
  const auto expected = fixtures::reference_fixtures();
  std::size_t shipped = 0;
  for (const auto& e : fs::directory_iterator(kSource / "fixtures/reference")) shipped += e.path().extension() == ".json";
  EXPECT_EQ(shipped, expected.size());
  for (std::size_t i = 0; i < expected.size(); i += 37) {
    EXPECT_EQ(runner::load_fixture(kSource / "fixtures/reference" / expected[i].filename), expected[i].samples);
  }
}

TEST(Fixture, Filename) {
  EXPECT_EQ(runner::fixture_filename("k40m", "add_u32", OptLevel::O3, "9.0", "9.0"), "k40m_add_u32_O3.json");
  EXPECT_EQ(runner::fixture_filename("v100", "popc_u32", OptLevel::O3, "10.0", "9.0"), "v100_popc_u32_O3_cuda10.0.json");
  EXPECT_EQ(runner::fixture_filename("p100", "global_ld", OptLevel::O0, "9.0", "9.0", L1Mode::Disabled),
            "p100_global_ld_O0_cg.json");
}

TEST(Replay, EmptyAndPairSuites) {
  runner::ReplayBackend backend;
  EXPECT_TRUE(runner::run_measurement({}, backend).samples.empty());
  const auto dir = kSource / "fixtures/reference";
  std::vector<runner::KernelRef> suite(2);
  suite[0].fixture = dir / "k40m_add_u32_O3.json";
  suite[1].fixture = dir / "rtx_div_s32_irregular_O0.json";
  const auto m = runner::run_measurement(suite, backend);
  ASSERT_EQ(m.samples.size(), 2u);
  EXPECT_EQ(m.samples[0], runner::load_fixture(suite[0].fixture));
  EXPECT_EQ(m.samples[1], runner::load_fixture(suite[1].fixture));
  EXPECT_EQ(analysis::reduce(m.samples[1], analysis::Provenance::Replayed).at(0).latency_cycles, 785u);
}

TEST(Replay, WrongKernelIsFailureAndSuiteContinues) {
  runner::ReplayBackend backend;
  const auto dir = kSource / "fixtures/reference";
  std::vector<runner::KernelRef> suite(3);
  suite[0].fixture = dir / "k40m_add_u32_O3.json";
  suite[0].kernel_id = "sub_u32";
  suite[1].fixture = dir / "missing.json";
  suite[2].fixture = dir / "k40m_add_u32_O0.json";
  const auto m = runner::run_measurement(suite, backend);
  EXPECT_EQ(m.failures.size(), 2u);
  ASSERT_EQ(m.samples.size(), 1u);
  EXPECT_EQ(m.samples[0].opt_level, OptLevel::O0);
}

namespace {

runner::KernelRef stub_ref(const fs::path& dir, const std::string& kernel_output) {
  write_script(dir / "overhead", "echo 'RESULT clock_overhead cycles 14'\n");
  write_script(dir / "kernel", kernel_output);
  runner::KernelRef ref;
  ref.kernel_id = "add_u32";
  ref.gpu_name = "Stub";
  ref.toolchain_version = "10.0";
  ref.output_names = {"cycles"};
  ref.executable = dir / "kernel";
  ref.clock_overhead_executable = dir / "overhead";
  return ref;
}

}  // namespace

TEST(Hardware, MalformedOutput) {
  TempDir tmp;
  runner::HardwareBackend hw;
  const auto ref = stub_ref(tmp.path, "echo 'cycles: lots'\n");
  const auto m = runner::run_measurement({ref}, hw);
  ASSERT_EQ(m.failures.size(), 1u);
  EXPECT_EQ(m.failures[0].kernel_id, "add_u32");
  EXPECT_NE(m.failures[0].detail.find("line 1"), std::string::npos);
  EXPECT_TRUE(m.samples.empty());

  const auto missing = stub_ref(tmp.path, "echo 'RESULT add_u32 other 3'\n");
  EXPECT_THROW(hw.run(missing, {}), BackendFailure);
  const auto crashed = stub_ref(tmp.path, "exit 3\n");
  EXPECT_THROW(hw.run(crashed, {}), BackendFailure);
}

TEST(Hardware, SerializedAndCalibratedFirst) {
  TempDir tmp;
  runner::HardwareBackend hw;
  const auto log = tmp.path / "log";
  const auto ref = stub_ref(tmp.path, "");
  write_script(tmp.path / "kernel", "echo kernel >> " + log.string() + "\nsleep 0.01\necho 'RESULT add_u32 cycles 23'\n");
  write_script(tmp.path / "overhead", "echo overhead >> " + log.string() + "\necho 'RESULT clock_overhead cycles 14'\n");

  proc::ProcessRegistry::reset_peak();
  runner::LaunchConfig launch;
  launch.repetitions = 5;
  const auto m = runner::run_measurement({ref, ref, ref}, hw, launch);
  EXPECT_TRUE(m.failures.empty());
  EXPECT_EQ(proc::ProcessRegistry::peak(), 1u);
  ASSERT_EQ(m.samples.size(), 3u);
  EXPECT_EQ(m.samples[0].clock_overhead_samples, std::vector<Cycles>(5, 14));
  EXPECT_EQ(m.samples[0].samples.at("cycles"), std::vector<Cycles>(5, 23));

  std::vector<std::string> order;
  std::istringstream in(slurp(log));
  for (std::string line; std::getline(in, line);) order.push_back(line);
  ASSERT_EQ(order.size(), 30u);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(order[k * 10 + i], "overhead");
    for (std::size_t i = 5; i < 10; ++i) EXPECT_EQ(order[k * 10 + i], "kernel");
  }
}

TEST(Hardware, EquivalentToRecordedFixture) {
  TempDir tmp;
  runner::HardwareBackend hw;
  const auto ref = stub_ref(tmp.path, "echo 'RESULT add_u32 cycles 23'\n");
  const auto live = hw.run(ref, {});
  runner::record_fixture(live, tmp.path / "rec.json");
  runner::ReplayBackend replay;
  runner::KernelRef r;
  r.fixture = tmp.path / "rec.json";
  const auto replayed = replay.run(r, {});
  EXPECT_EQ(live, replayed);
  auto a = analysis::reduce(live, analysis::Provenance::Measured);
  auto b = analysis::reduce(replayed, analysis::Provenance::Measured);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.at(0).latency_cycles, 9u);
}

TEST(Pipeline, HardwareMeasureWithFakeToolchain) {
  TempDir tmp;
  write_fake_toolchain(tmp.path / "cuda");
  const auto info = toolchain::detect_toolchain(toolchain::tool_paths_for_root(tmp.path / "cuda"));
  ASSERT_TRUE(info.available);
  pipeline::HardwareOptions opts;
  opts.gpu_name = "Fake";
  opts.target_arch = "sm_70";
  opts.toolchain_version = info.version;
  opts.tool_paths = info.tool_paths;
  opts.work_dir = tmp.path / "build";
  opts.launch.repetitions = 3;
  const auto suite = pipeline::default_suite({7, 0}, InstructionCategory::IntArith, false);
  const auto out = pipeline::measure_hardware(suite, opts);
  EXPECT_TRUE(out.failures.empty()) << out.failures.at(0).detail;
  EXPECT_EQ(out.samples.size(), suite.size() * 2);
  for (const auto& r : out.records) {
    const bool div = r.instruction == "div";
    EXPECT_EQ(r.latency_cycles, div ? 200u : 6u) << r.key;
    EXPECT_EQ(r.derived_from, analysis::Provenance::Measured);
  }
}

TEST(Pipeline, DefaultSuite) {
  const auto all = pipeline::default_suite({7, 0}, std::nullopt, true);
  std::size_t global = 0;
  for (const auto& e : all) global += e.kernel_id == "global_ld";
  EXPECT_EQ(global, 2u);
  EXPECT_EQ(pipeline::default_suite({3, 5}, InstructionCategory::FP16, false).size(), 0u);
}
