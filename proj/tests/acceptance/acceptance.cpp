// Acceptance checks, one per criterion. Prints one PASS/FAIL line each;
// exit 0 when every selected criterion passes, 1 on failure, 77 when the
// hardware criterion cannot run here.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gpulat/analysis.hpp"
#include "gpulat/errors.hpp"
#include "gpulat/isa_catalog.hpp"
#include "gpulat/pipeline.hpp"
#include "gpulat/ptx_codegen.hpp"
#include "gpulat/ptx_validator.hpp"
#include "gpulat/reference_data.hpp"
#include "gpulat/report.hpp"
#include "gpulat/subprocess.hpp"
#include "gpulat/toolchain.hpp"

using namespace gpulat;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kSource = GPULAT_SOURCE_DIR;
constexpr int kSkip = 77;

struct Result {
  enum State { Pass, Fail, Skip } state = Pass;
  std::string detail;
  std::vector<std::string> problems;

  void fail(std::string what) {
    state = Fail;
    problems.push_back(std::move(what));
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2fs", s);
  return buf;
}

// 1: replayed shipped fixtures reproduce every ALU-table cell verbatim.
Result reference_conformance() {
  Result r;
  const auto t0 = Clock::now();
  const auto& data = ref::ReferenceData::embedded();
  const auto outcome = pipeline::replay_directory(kSource / "fixtures/reference");
  for (const auto& f : outcome.failures) r.fail("replay " + f.kernel_id + ": " + f.detail);

  const auto view = report::build_appendix_view(outcome.records, data);
  std::size_t cells = 0, dual = 0, na = 0;
  for (const auto& row : data.rows()) {
    const auto it = std::find_if(view.rows.begin(), view.rows.end(), [&](const auto& v) { return v.key == row.key; });
    if (it == view.rows.end()) {
      r.fail("row missing from report: " + row.key);
      continue;
    }
    for (std::size_t c = 0; c < row.optimized.size(); ++c) {
      for (const auto& [printed, got] : {std::pair{row.optimized[c], it->optimized[c]},
                                         std::pair{row.non_optimized[c], it->non_optimized[c]}}) {
        ++cells;
        dual += printed.find('/') != std::string::npos;
        na += printed == "NA";
        if (printed != got) r.fail(row.key + " [" + data.columns()[c].label + "]: expected '" + printed + "', got '" + got + "'");
      }
    }
  }
  const auto diff = analysis::diff_vs_reference(outcome.records, data, analysis::Tolerance::exact());
  if (diff.exact != diff.compared() || diff.compared() == 0) {
    r.fail(std::to_string(diff.compared() - diff.exact) + " records differ from the reference at 0 cycles");
  }
  const double elapsed = seconds_since(t0);
  if (elapsed >= 10.0) r.fail("runtime " + fmt_seconds(elapsed) + " >= 10s");
  r.detail = std::to_string(cells) + " cells (" + std::to_string(dual) + " dual, " + std::to_string(na) + " NA), " +
             std::to_string(diff.compared()) + " records exact, runtime " + fmt_seconds(elapsed) + " < 10s";
  return r;
}

// 2: average = floor((regular + irregular) / 2) for every div family.
Result average_law() {
  Result r;
  const auto& data = ref::ReferenceData::embedded();
  std::size_t checked = 0, families = 0;
  for (const auto& avg : data.rows()) {
    const auto p = avg.key.find("(average)");
    if (p == std::string::npos) continue;
    auto key_for = [&](const char* v) { return std::string(avg.key).replace(p, 9, v); };
    const auto* reg = data.find_row(key_for("(regular)"));
    const auto* irr = data.find_row(key_for("(irregular)"));
    if (!reg || !irr) continue;  // FP64 prints the average only
    ++families;
    for (std::size_t c = 0; c < avg.optimized.size(); ++c) {
      for (const auto& pick : {&ref::AppendixRow::optimized, &ref::AppendixRow::non_optimized}) {
        const auto a = ref::parse_cell((avg.*pick)[c]);
        const auto g = ref::parse_cell((reg->*pick)[c]);
        const auto i = ref::parse_cell((irr->*pick)[c]);
        const auto boards = data.columns()[c].gpus.size();
        for (std::size_t b = 0; b < boards; ++b) {
          auto at = [&](const std::vector<std::optional<Cycles>>& v) { return v.size() == 1 ? v[0] : v.at(b); };
          if (!at(a) || !at(g) || !at(i)) continue;
          ++checked;
          const Cycles expect = analysis::div_average(*at(g), *at(i));
          if (expect != *at(a)) {
            r.fail(avg.key + " " + data.columns()[c].gpus[b] + ": (" + std::to_string(*at(g)) + "," +
                   std::to_string(*at(i)) + ") -> " + std::to_string(expect) + ", table " + std::to_string(*at(a)));
          }
        }
      }
    }
  }
  if (families != 3) r.fail("expected 3 div families, found " + std::to_string(families));
  r.detail = std::to_string(families) + " families, " + std::to_string(checked) + " board cells compared";
  return r;
}

// 3: optimized <= non-optimized across the ALU and memory tables.
Result optimization_monotonicity() {
  Result r;
  const auto& data = ref::ReferenceData::embedded();
  std::size_t pairs = 0;
  for (const auto& cell : data.cells()) {
    if (!cell.optimized || !cell.non_optimized) continue;
    ++pairs;
    if (*cell.optimized > *cell.non_optimized) {
      r.fail(cell.key + " " + cell.gpu + ": " + std::to_string(*cell.optimized) + " > " + std::to_string(*cell.non_optimized));
    }
  }
  for (const auto& row : data.memory_rows()) {
    for (std::size_t g = 0; g < row.optimized.size(); ++g) {
      ++pairs;
      if (row.optimized[g] > row.non_optimized[g]) r.fail(row.label + " " + data.memory_gpus()[g]);
    }
  }
  r.detail = std::to_string(pairs) + " cell pairs";
  return r;
}

// 4: compiler-table baseline values equal the Volta optimized cells.
Result table_cross_consistency() {
  Result r;
  const auto& data = ref::ReferenceData::embedded();
  std::size_t checked = 0;
  for (const auto& row : data.cuda_versions().rows) {
    for (const auto& gpu : data.cuda_versions().gpus) {
      ++checked;
      Cycles appendix = 0;
      try {
        appendix = data.lookup(gpu, row.appendix_key, OptClass::Optimized);
      } catch (const Error& e) {
        r.fail(row.label + " " + gpu + ": " + e.what());
        continue;
      }
      if (appendix != row.baseline) {
        r.fail(row.section + " " + row.label + " on " + gpu + ": CUDA " + data.cuda_versions().baseline + " value " +
               std::to_string(row.baseline) + " != ALU table " + std::to_string(appendix));
      }
    }
  }
  r.detail = std::to_string(checked) + " row/board pairs compared";
  return r;
}

std::vector<ptx::PtxModule> every_module(const std::string& arch) {
  ptx::CodegenOptions options;
  options.target_arch = arch;
  std::vector<ptx::PtxModule> out;
  for (const auto& d : isa::InstructionCatalog::instance().all()) {
    if (d.supported_on(ComputeCapability::parse(arch))) out.push_back(ptx::emit_alu_kernel(d, {}, options));
  }
  for (const auto& p : isa::InstructionCatalog::instance().probe_kernels()) out.push_back(ptx::emit_probe_kernel(p, options));
  return out;
}

// 5: structural suite over every descriptor and probe.
Result codegen_structure() {
  Result r;
  const auto t0 = Clock::now();
  std::size_t modules = 0, blocks = 0;
  for (const std::string arch : {"sm_70", "sm_35"}) {
    for (const auto& m : every_module(arch)) {
      ++modules;
      const std::string id = m.kernel_id + "@" + arch;
      const auto diags = ptx::validate_ptx(m);
      for (const auto& d : diags) r.fail(id + ": " + d.code + ": " + d.message);
      const auto ast = ptx::parse(m.text);
      const auto& entry = ast.entries.at(0);
      const auto scan = ptx::find_timing_blocks(entry);
      if (scan.blocks.size() != m.timing_blocks.size()) r.fail(id + ": timing block count differs from metadata");
      for (const auto& b : scan.blocks) {
        ++blocks;
        const auto& body = entry.body;
        const bool before = b.start_index >= 2 && body[b.start_index - 2].base() == "membar" &&
                            body[b.start_index - 1].base() == "bar";
        const bool after = b.end_index + 2 < body.size() && body[b.end_index + 1].base() == "membar" &&
                           body[b.end_index + 2].base() == "bar";
        if (!before || !after) r.fail(id + ": block not bracketed by membar + bar.sync");
      }
      if (m.descriptor) {
        std::vector<std::string> timed;
        if (!scan.blocks.empty()) {
          for (const auto& i : scan.blocks[0].block.timed_instructions) timed.push_back(i.opcode);
        }
        if (scan.blocks.size() != 1 || timed != m.descriptor->ptx_sequence) r.fail(id + ": sandwich is not the defining sequence");
      }
      if (m.kind == ptx::KernelKind::GlobalMemory) {
        if (scan.blocks.size() != 2) {
          r.fail(id + ": global kernel needs exactly two timing blocks");
          continue;
        }
        std::vector<ptx::Address> addrs;
        for (const auto& b : scan.blocks) {
          const auto& t = b.block.timed_instructions;
          if (t.size() != 1 || t[0].opcode.rfind("ld.global", 0) != 0) {
            r.fail(id + ": global block must time one ld.global");
            continue;
          }
          addrs.push_back(std::get<ptx::Address>(t[0].operands.at(1)));
        }
        if (addrs.size() == 2) {
          const auto off = addrs[1].offset - addrs[0].offset;
          if (addrs[0].base != addrs[1].base || off <= 0 || off >= ptx::kMinCacheLineBytes) {
            r.fail(id + ": loads are not distinct words of one line");
          }
        }
      }
    }
  }
  const double elapsed = seconds_since(t0);
  if (elapsed >= 30.0) r.fail("runtime " + fmt_seconds(elapsed) + " >= 30s");
  r.detail = std::to_string(modules) + " modules, " + std::to_string(blocks) + " timing blocks, 0 diagnostics, runtime " +
             fmt_seconds(elapsed) + " < 30s";
  return r;
}

// 6: each AST mutant draws at least one diagnostic.
Result mutation_detection() {
  Result r;
  std::size_t mutants = 0, detected = 0;
  auto check = [&](const ptx::PtxModule& original, ptx::Module ast, const std::string& what) {
    ++mutants;
    auto m = original;
    m.ast = ast;
    m.text = ptx::print(ast);
    if (ptx::validate_ptx(m).empty()) {
      r.fail(original.kernel_id + ": " + what + " not detected");
    } else {
      ++detected;
    }
  };
  for (const auto& m : every_module("sm_70")) {
    const auto scan = ptx::find_timing_blocks(m.ast.entries.at(0));
    for (const auto& b : scan.blocks) {
      auto swapped = m.ast;
      auto& body = swapped.entries[0].body;
      std::swap(body[b.start_index], body[b.end_index]);
      check(m, swapped, "swapped clock reads");

      auto unbarriered = m.ast;
      unbarriered.entries[0].body.erase(unbarriered.entries[0].body.begin() + b.start_index - 1);
      check(m, unbarriered, "removed barrier");
    }
    if (scan.blocks.empty() || scan.blocks[0].block.timed_instructions.empty()) continue;

    // Drop every non-store instruction that consumes a timed result.
    std::vector<std::string> results;
    for (const auto& b : scan.blocks) {
      for (const auto& i : b.block.timed_instructions) {
        for (const auto& w : ptx::registers_written(i)) results.push_back(w);
      }
    }
    auto independent = m.ast;
    auto& body = independent.entries[0].body;
    const auto first = scan.blocks.back().subtract_index + 1;
    const auto before = body.size();
    body.erase(std::remove_if(body.begin() + static_cast<std::ptrdiff_t>(first), body.end(),
                              [&](const ptx::Instruction& i) {
                                if (i.base() == "st") return false;
                                const auto reads = ptx::registers_read(i);
                                return std::any_of(reads.begin(), reads.end(), [&](const std::string& reg) {
                                  return std::find(results.begin(), results.end(), reg) != results.end();
                                });
                              }),
               body.end());
    if (body.size() == before) {
      r.fail(m.kernel_id + ": no dependent dummy operation to remove");
      continue;
    }
    check(m, independent, "removed dummy dependence");
  }
  r.detail = std::to_string(detected) + "/" + std::to_string(mutants) + " mutants detected (>= 1 diagnostic each)";
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 7: dry-run plans match the checked-in transcripts byte for byte.
Result golden_transcripts() {
  Result r;
  std::size_t matched = 0;
  for (const std::string arch : {"sm_35", "sm_70"}) {
    ptx::CodegenOptions options;
    options.target_arch = arch;
    const auto module = ptx::emit_global_memory_kernel(options);
    for (const OptLevel opt : {OptLevel::O0, OptLevel::O3}) {
      for (const L1Mode l1 : {L1Mode::Enabled, L1Mode::Disabled}) {
        toolchain::BuildConfig cfg;
        cfg.opt_level = opt;
        cfg.l1_mode = l1;
        cfg.target_arch = arch;
        cfg.work_dir = fs::path("gpulat-build") / arch / std::string(to_string(opt));
        const auto result =
            toolchain::execute_plan(toolchain::plan_compilation(module, cfg), toolchain::ExecMode::DryRun);
        const std::string name = "global_ld_" + arch + "_" + std::string(to_string(opt)) + "_" +
                                 (l1 == L1Mode::Enabled ? "ca" : "cg") + ".txt";
        const auto path = kSource / "tests/golden" / name;
        if (!fs::exists(path)) {
          r.fail(name + " missing");
        } else if (slurp(path) != result.transcript) {
          r.fail(name + " differs");
        } else {
          ++matched;
        }
      }
    }
  }
  r.detail = std::to_string(matched) + "/8 transcripts identical";
  return r;
}

// 8: analysis properties with hand-rolled generators.
Result analysis_properties() {
  Result r;
  std::mt19937_64 rng(20190701);
  auto uniform = [&](Cycles lo, Cycles hi) { return std::uniform_int_distribution<Cycles>(lo, hi)(rng); };

  std::size_t failures = 0;
  for (int i = 0; i < 100000; ++i) {
    const Cycles a = uniform(0, 1u << 30), o = uniform(0, 1u << 30);
    if (analysis::net_latency(a + o, o) != analysis::NetLatency{a, false}) ++failures;
  }
  if (failures) r.fail("subtraction identity: " + std::to_string(failures) + " counterexamples");

  failures = 0;
  for (int i = 0; i < 100000; ++i) {
    const Cycles o = uniform(1, 1u << 30);
    const Cycles raw = uniform(0, o - 1);
    if (analysis::net_latency(raw, o) != analysis::NetLatency{0, true}) ++failures;
  }
  if (failures) r.fail("clamping: " + std::to_string(failures) + " counterexamples");

  failures = 0;
  for (int i = 0; i < 2000; ++i) {
    runner::RawSamples s;
    s.kernel_id = "add_u32";
    s.gpu_name = "K40m";
    s.toolchain_version = "9.0";
    const int n = std::uniform_int_distribution<int>(1, 31)(rng);
    for (int k = 0; k < n; ++k) s.samples["cycles"].push_back(uniform(0, 5000));
    for (int k = 0; k < n; ++k) s.clock_overhead_samples.push_back(uniform(0, 40));
    const Cycles c = uniform(0, 1u << 20);
    auto shifted = s;
    for (auto& v : shifted.samples["cycles"]) v += c;
    for (auto& v : shifted.clock_overhead_samples) v += c;
    const auto a = analysis::reduce(s, analysis::Provenance::Measured).at(0);
    const auto b = analysis::reduce(shifted, analysis::Provenance::Measured).at(0);
    if (a.latency_cycles != b.latency_cycles) ++failures;
  }
  if (failures) r.fail("scale-freeness: " + std::to_string(failures) + " counterexamples");

  failures = 0;
  const std::int64_t limit = std::int64_t{1} << 20;
  for (std::int64_t d = 1; d <= limit; ++d) {
    bool power = false;
    for (int k = 0; k <= 20 && !power; ++k) power = (std::int64_t{1} << k) == d;
    if ((analysis::classify_divisor(d) == DivVariant::Regular) != power) ++failures;
  }
  if (failures) r.fail("classify_divisor: " + std::to_string(failures) + " disagreements on 1..2^20");
  r.detail = "100000 + 100000 + 2000 cases, classify_divisor exhaustive on 1..2^20";
  return r;
}

std::optional<std::string> local_arch() {
  if (const char* a = std::getenv("GPULAT_TARGET_ARCH"); a && *a) return ComputeCapability::parse(a).sm_name();
  if (!proc::find_executable("nvidia-smi")) return std::nullopt;
  try {
    const auto pr = proc::run({"nvidia-smi", "--query-gpu=compute_cap", "--format=csv,noheader"});
    if (pr.exit_code != 0) return std::nullopt;
    const auto line = pr.stdout_text.substr(0, pr.stdout_text.find('\n'));
    return ComputeCapability::parse(line).sm_name();
  } catch (const Error&) {
    return std::nullopt;
  }
}

// 9: hardware run of the integer suite; add/sub below div at every level.
Result hardware_ordinal() {
  Result r;
  const auto info = toolchain::detect_toolchain(toolchain::default_tool_paths());
  const auto arch = local_arch();
  if (!info.available || !pipeline::gpu_device_present() || !arch) {
    r.state = Result::Skip;
    r.detail = !info.available ? "no CUDA toolchain (" + info.detail + ")" : "no NVIDIA GPU detected";
    return r;
  }
  pipeline::HardwareOptions opts;
  opts.gpu_name = "local";
  opts.target_arch = *arch;
  opts.toolchain_version = info.version;
  opts.tool_paths = info.tool_paths;
  opts.opt_levels = {OptLevel::O0, OptLevel::O1, OptLevel::O2, OptLevel::O3};
  opts.work_dir = fs::temp_directory_path() / "gpulat-acceptance-hw";
  const auto out = pipeline::measure_hardware(pipeline::default_suite(ComputeCapability::parse(*arch),
                                                                        InstructionCategory::IntArith, false),
                                              opts);
  for (const auto& f : out.failures) r.fail(f.kernel_id + ": " + f.detail);
  for (const OptLevel opt : opts.opt_levels) {
    std::optional<Cycles> add_max;
    std::optional<Cycles> div_min;
    for (const auto& rec : out.records) {
      if (rec.opt_level != opt) continue;
      if (rec.instruction == "add" || rec.instruction == "sub") add_max = std::max(add_max.value_or(0), rec.latency_cycles);
      if (rec.instruction == "div") div_min = std::min(div_min.value_or(rec.latency_cycles), rec.latency_cycles);
    }
    if (!add_max || !div_min) {
      r.fail(std::string(to_string(opt)) + ": missing add/sub or div records");
    } else if (*add_max >= *div_min) {
      r.fail(std::string(to_string(opt)) + ": add/sub " + std::to_string(*add_max) + " >= div " + std::to_string(*div_min));
    }
  }
  r.detail = std::to_string(out.records.size()) + " records on " + *arch + " with CUDA " + info.version;
  return r;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Result()> run;
};

const std::vector<Criterion> kCriteria = {
    {1, "reference conformance: replayed fixtures reproduce every ALU table cell, tolerance 0 cycles", reference_conformance},
    {2, "average law: average == floor((regular + irregular) / 2), tolerance 0", average_law},
    {3, "optimization monotonicity: optimized <= non-optimized for every table cell", optimization_monotonicity},
    {4, "table cross-consistency: compiler-table CUDA 9.0 values == Volta optimized cells, tolerance 0", table_cross_consistency},
    {5, "codegen structure: zero diagnostics, exact sandwiches, two global blocks, bracketing barriers", codegen_structure},
    {6, "mutation detection: swapped clocks, removed dependence, removed barrier", mutation_detection},
    {7, "golden transcripts: (O0,O3) x (L1 on/off) x (sm_35,sm_70), byte-identical", golden_transcripts},
    {8, "analysis properties: subtraction, clamping, scale-freeness, divisor oracle", analysis_properties},
    {9, "hardware: IntArith suite on a GPU, add/sub < div at O0..O3", hardware_ordinal},
};

}  // namespace

int main(int argc, char** argv) {
  std::optional<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: " << argv[0] << " [--criterion N]\n";
      return 2;
    }
  }
  bool failed = false;
  bool skipped = false;
  for (const auto& c : kCriteria) {
    if (only && *only != c.id) continue;
    Result res;
    try {
      res = c.run();
    } catch (const std::exception& e) {
      res.fail(std::string("exception: ") + e.what());
    }
    const char* tag = res.state == Result::Pass ? "PASS" : res.state == Result::Fail ? "FAIL" : "SKIP";
    std::cout << "criterion " << c.id << ": " << tag << "  " << c.name;
    if (!res.detail.empty()) std::cout << "  [" << res.detail << "]";
    std::cout << "\n";
    for (std::size_t i = 0; i < res.problems.size() && i < 20; ++i) std::cout << "    " << res.problems[i] << "\n";
    if (res.problems.size() > 20) std::cout << "    ... " << res.problems.size() - 20 << " more\n";
    failed |= res.state == Result::Fail;
    skipped |= res.state == Result::Skip;
  }
  if (failed) return 1;
  if (skipped && only) return kSkip;
  return 0;
}
