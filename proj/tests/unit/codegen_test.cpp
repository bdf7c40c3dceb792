#include <algorithm>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "gpulat/errors.hpp"
#include "gpulat/isa_catalog.hpp"
#include "gpulat/ptx_codegen.hpp"
#include "gpulat/ptx_validator.hpp"
#include "gpulat/reference_data.hpp"

using namespace gpulat;
using namespace gpulat::ptx;

namespace {

const isa::InstructionDescriptor& desc(std::string_view m, DataType t,
                                       std::optional<DivVariant> v = std::nullopt) {
  return isa::descriptor_for(m, t, v);
}

std::vector<std::string> opcodes(const std::vector<Instruction>& insts) {
  std::vector<std::string> out;
  for (const auto& i : insts) out.push_back(i.opcode);
  return out;
}

bool has_code(const std::vector<Diagnostic>& diags, std::string_view code) {
  return std::any_of(diags.begin(), diags.end(), [&](const Diagnostic& d) { return d.code == code; });
}

// Re-prints an edited AST into a module so the validator sees the mutant.
PtxModule with_ast(PtxModule m, const Module& ast) {
  m.ast = ast;
  m.text = print(ast);
  return m;
}

std::vector<PtxModule> every_module() {
  std::vector<PtxModule> out;
  CodegenOptions options;
  for (const auto& d : isa::InstructionCatalog::instance().all()) out.push_back(emit_alu_kernel(d, {}, options));
  for (const auto& p : isa::InstructionCatalog::instance().probe_kernels()) out.push_back(emit_probe_kernel(p, options));
  return out;
}

}  // namespace

// Hand census of the ALU table: names listed per printed row. Averages are
// derived, except FP64 where only the average is printed and both divisor
// classes are cataloged under their own keys.
TEST(Catalog, SizeMatchesRowCensus) {
  const std::map<std::string, int> census = {
      {"add/sub/min/max [int]", 4}, {"mul/mad [int]", 2}, {"{s} div (regular) [int]", 1},
      {"{s} div (irregular) [int]", 1}, {"{s} rem [int]", 1}, {"abs [int]", 1},
      {"{u} div (regular) [int]", 1}, {"{u} div (irregular) [int]", 1}, {"{u} rem [int]", 1},
      {"and/or/not/xor [logic]", 4}, {"cnot [logic]", 1}, {"shl/shr [logic]", 2},
      {"add/sub/min/max [f32]", 4}, {"mul/mad/fma [f32]", 3}, {"div (regular) [f32]", 1},
      {"div (irregular) [f32]", 1}, {"add/sub/min/max [f64]", 4}, {"mul/mad/fma [f64]", 3},
      {"div (regular) [f64]", 1}, {"div (irregular) [f64]", 1}, {"add/sub [f16]", 2},
      {"mul [f16]", 1}, {"fma [f16]", 1}, {"add.cc/addc/sub.cc [mp]", 3},
      {"subc [mp]", 1}, {"mad.cc/madc [mp]", 2}, {"rcp [math]", 1},
      {"sqrt [math]", 1}, {"fast approximate sqrt [math]", 1}, {"fast approximate rsqrt [math]", 1},
      {"fast approximate sin/cos [math]", 2}, {"fast approximate lg2 [math]", 1},
      {"fast approximate ex2 [math]", 1}, {"copysign [math]", 1}, {"mul24()/mad24() [intrinsic]", 2},
      {"mulhi() [intrinsic]", 1}, {"mul64hi() [intrinsic]", 1}, {"sad() [intrinsic]", 1},
      {"popc() [intrinsic]", 1}, {"clz() [intrinsic]", 1}, {"bfe()/bfi() [intrinsic]", 2},
      {"bfind()/bbrev() [intrinsic]", 2},
  };
  int total = 0;
  for (const auto& [k, n] : census) total += n;
  EXPECT_EQ(total, static_cast<int>(isa::kCatalogSize));

  std::map<std::string, int> actual;
  for (const auto& d : isa::list_instructions()) ++actual[d.report_group];
  EXPECT_EQ(actual, census);
  EXPECT_EQ(isa::list_instructions().size(), isa::kCatalogSize);
}

TEST(Catalog, EightCategories) {
  std::set<InstructionCategory> seen;
  for (const auto& d : isa::list_instructions()) seen.insert(d.category);
  EXPECT_EQ(seen.size(), 8u);
  EXPECT_EQ(category_heading(InstructionCategory::IntArith), "(1) Integer Arithmetic Instructions");
  EXPECT_EQ(category_heading(InstructionCategory::IntIntrinsic), "(8) Integer Intrinsic Instructions");
}

TEST(Catalog, Fp16EmptyOnKepler) {
  const auto& k40 = ref::ReferenceData::embedded().gpu("K40m");
  EXPECT_TRUE(isa::InstructionCatalog::instance().list_instructions(InstructionCategory::FP16, k40).empty());
  EXPECT_EQ(isa::list_instructions(InstructionCategory::FP16, ComputeCapability{6, 0}).size(), 4u);
}

TEST(Catalog, LogicShiftMnemonics) {
  std::set<std::string> m;
  for (const auto& d : isa::list_instructions(InstructionCategory::LogicShift)) m.insert(d.mnemonic);
  EXPECT_EQ(m, (std::set<std::string>{"and", "or", "not", "xor", "cnot", "shl", "shr"}));
}

TEST(Catalog, DescriptorLookup) {
  const auto& add = desc("add", DataType::u32);
  EXPECT_EQ(add.category, InstructionCategory::IntArith);
  EXPECT_EQ(add.signedness, Signedness::Unsigned);
  EXPECT_THROW(desc("add", DataType::pred), UnknownInstruction);
  const auto& m64 = desc("mul64hi", DataType::s64);
  EXPECT_EQ(m64.category, InstructionCategory::IntIntrinsic);
  EXPECT_TRUE(m64.is_intrinsic);
  EXPECT_THROW(desc("div", DataType::s32), UnknownInstruction);
  EXPECT_EQ(desc("div", DataType::s32, DivVariant::Irregular).kernel_id(), "div_s32_irregular");
}

TEST(Catalog, DivVariantOnlyOnDiv) {
  for (const auto& d : isa::list_instructions()) {
    EXPECT_EQ(d.div_variant.has_value(), d.mnemonic == "div") << d.kernel_id();
    if (d.div_variant) EXPECT_NE(*d.div_variant, DivVariant::Average);
    if (d.data_type == DataType::f16) EXPECT_EQ(d.min_compute_capability, (ComputeCapability{6, 0}));
  }
}

TEST(Catalog, FilteringIsMonotoneAndDeterministic) {
  const std::vector<std::optional<InstructionCategory>> cats = {std::nullopt, InstructionCategory::FP16,
                                                                InstructionCategory::IntArith};
  for (const auto& g : ref::ReferenceData::embedded().gpus()) {
    for (const auto& c : cats) {
      const auto all = isa::list_instructions(c);
      const auto filtered = isa::list_instructions(c, g.compute_capability);
      for (const auto& d : filtered) EXPECT_NE(std::find(all.begin(), all.end(), d), all.end());
      EXPECT_EQ(filtered, isa::list_instructions(c, g.compute_capability));
    }
  }
}

TEST(Catalog, EveryTableRowHasDescriptor) {
  std::set<std::string> groups;
  for (const auto& d : isa::list_instructions()) groups.insert(d.report_group);
  for (const auto& row : ref::ReferenceData::embedded().rows()) {
    std::string key = row.key;
    // Average rows are derived from the regular/irregular pair.
    if (const auto p = key.find("(average)"); p != std::string::npos) key.replace(p, 9, "(regular)");
    EXPECT_TRUE(groups.contains(key)) << row.key;
  }
}

TEST(Codegen, ClockOverheadKernel) {
  const auto m = emit_clock_overhead_kernel();
  ASSERT_EQ(m.timing_blocks.size(), 1u);
  EXPECT_TRUE(m.timing_blocks[0].timed_instructions.empty());
  std::size_t clocks = 0;
  for (std::size_t p = m.text.find("%clock"); p != std::string::npos; p = m.text.find("%clock", p + 1)) ++clocks;
  EXPECT_EQ(clocks, 2u);
  EXPECT_TRUE(validate_ptx(m).empty());
}

TEST(Codegen, AddU32Sandwich) {
  const auto m = emit_alu_kernel(desc("add", DataType::u32), OperandPolicy::literals());
  ASSERT_EQ(m.timing_blocks.size(), 1u);
  const auto& timed = m.timing_blocks[0].timed_instructions;
  ASSERT_EQ(timed.size(), 1u);
  EXPECT_EQ(timed[0].opcode, "add.u32");
  EXPECT_EQ(timed[0].operands.size(), 3u);
  EXPECT_NE(m.text.find(".version 6.4"), std::string::npos);
  EXPECT_NE(m.text.find(".target sm_70"), std::string::npos);
}

TEST(Codegen, Fp16RejectedOnKepler) {
  CodegenOptions kepler;
  kepler.target_arch = "sm_35";
  EXPECT_THROW(emit_alu_kernel(desc("add", DataType::f16), {}, kepler), UnsupportedOnTarget);
  kepler.target_arch = "sm_60";
  EXPECT_NO_THROW(emit_alu_kernel(desc("add", DataType::f16), {}, kepler));
}

TEST(Codegen, PopcDummyConsumesResult) {
  const auto m = emit_alu_kernel(desc("popc", DataType::u32), OperandPolicy::literals());
  const auto& entry = m.ast.entries.at(0);
  const auto scan = find_timing_blocks(entry);
  ASSERT_EQ(scan.blocks.size(), 1u);
  const auto& b = scan.blocks[0];
  ASSERT_EQ(b.block.timed_instructions.size(), 1u);
  EXPECT_EQ(b.block.timed_instructions[0].opcode, "popc.b32");
  const auto dest = registers_written(b.block.timed_instructions[0]).at(0);
  bool consumed = false;
  for (std::size_t i = b.subtract_index + 1; i < entry.body.size(); ++i) {
    const auto reads = registers_read(entry.body[i]);
    if (entry.body[i].base() != "st" && std::find(reads.begin(), reads.end(), dest) != reads.end()) consumed = true;
  }
  EXPECT_TRUE(consumed);
}

TEST(Codegen, DivDivisorClass) {
  const auto& d = desc("div", DataType::s32, DivVariant::Regular);
  EXPECT_EQ(emit_div_kernel(d, std::int64_t{8}).divisor_class, DivVariant::Regular);
  EXPECT_EQ(emit_div_kernel(desc("div", DataType::s32, DivVariant::Irregular), std::int64_t{7}).divisor_class,
            DivVariant::Irregular);
  EXPECT_THROW(emit_div_kernel(d, std::int64_t{0}), ZeroDivisor);
  EXPECT_THROW(emit_div_kernel(desc("add", DataType::u32), std::int64_t{8}), UnknownInstruction);

  const auto m = emit_div_kernel(d, std::int64_t{8});
  const auto& op = m.timing_blocks.at(0).timed_instructions.at(0);
  EXPECT_EQ(op.opcode, "div.s32");
  EXPECT_TRUE(std::holds_alternative<Immediate>(op.operands.back()));
  EXPECT_EQ(std::get<Immediate>(op.operands.back()).text, "8");
}

TEST(Codegen, GlobalMemoryKernel) {
  const auto m = emit_global_memory_kernel();
  ASSERT_EQ(m.timing_blocks.size(), 2u);
  std::vector<Address> addrs;
  for (const auto& b : m.timing_blocks) {
    ASSERT_EQ(b.timed_instructions.size(), 1u);
    EXPECT_EQ(b.timed_instructions[0].opcode, "ld.global.u32");
    addrs.push_back(std::get<Address>(b.timed_instructions[0].operands.at(1)));
  }
  EXPECT_EQ(addrs[0].base, addrs[1].base);
  EXPECT_NE(addrs[0], addrs[1]);
  const auto offset = addrs[1].offset - addrs[0].offset;
  EXPECT_EQ(offset, 4);
  EXPECT_GT(offset, 0);
  EXPECT_LT(offset, kMinCacheLineBytes);
  EXPECT_NE(m.timing_blocks[0].output_name, m.timing_blocks[1].output_name);
}

TEST(Codegen, SharedConstantTexture) {
  const auto sh = emit_shared_kernel();
  ASSERT_EQ(sh.timing_blocks.size(), 1u);
  EXPECT_EQ(opcodes(sh.timing_blocks[0].timed_instructions), std::vector<std::string>{"ld.shared.u32"});
  const auto& body = sh.ast.entries.at(0).body;
  const auto st = std::find_if(body.begin(), body.end(), [](const Instruction& i) { return i.opcode == "st.shared.u32"; });
  const auto clk = std::find_if(body.begin(), body.end(), is_clock_read);
  ASSERT_NE(st, body.end());
  EXPECT_LT(st, clk);

  const auto cst = emit_constant_kernel();
  EXPECT_EQ(opcodes(cst.timing_blocks.at(0).timed_instructions), std::vector<std::string>{"ld.const.u32"});
  ASSERT_EQ(cst.ast.globals.size(), 1u);
  EXPECT_EQ(cst.ast.globals[0].space, "const");

  const auto tex = emit_texture_kernel();
  for (const auto& b : tex.timing_blocks) {
    ASSERT_EQ(b.timed_instructions.size(), 1u);
    EXPECT_EQ(b.timed_instructions[0].base(), "tex");
  }
  EXPECT_TRUE(std::any_of(tex.params.begin(), tex.params.end(),
                          [](const KernelParam& p) { return p.role == ParamRole::TextureObject; }));
}

TEST(Codegen, ProbeDispatchCoversEveryKind) {
  std::set<MemoryProbeKind> kinds;
  for (const auto& p : isa::InstructionCatalog::instance().probe_kernels()) {
    for (const auto& o : p.outputs) {
      kinds.insert(o.kind);
      if (const auto k = p.kind_for(o.output_name, L1Mode::Disabled)) kinds.insert(*k);
    }
    EXPECT_TRUE(validate_ptx(emit_probe_kernel(p)).empty()) << p.kernel_id;
  }
  EXPECT_EQ(kinds.size(), kAllProbeKinds.size());
}

TEST(Codegen, LiteralEncoding) {
  EXPECT_EQ(encode_literal(DataType::f32, "1.0"), 0x3f800000u);
  EXPECT_EQ(encode_literal(DataType::f64, "2.5"), 0x4004000000000000ull);
  EXPECT_EQ(encode_literal(DataType::f16, "1.0"), 0x3c00u);
  EXPECT_EQ(encode_literal(DataType::f16, "0.1"), 0x2e66u);
  EXPECT_EQ(encode_literal(DataType::s32, "-1"), 0xffffffffu);
}

TEST(Codegen, DeterministicOutput) {
  const auto& d = desc("mad", DataType::f64);
  EXPECT_EQ(emit_alu_kernel(d).text, emit_alu_kernel(d).text);
}

TEST(Validator, EveryModuleValidates) {
  for (const auto& m : every_module()) {
    const auto diags = validate_ptx(m);
    EXPECT_TRUE(diags.empty()) << m.kernel_id << ": " << (diags.empty() ? "" : diags[0].message);
  }
}

TEST(Validator, RoundTrip) {
  for (const auto& m : every_module()) {
    EXPECT_EQ(parse(m.text), m.ast) << m.kernel_id;
    EXPECT_EQ(print(parse(m.text)), m.text) << m.kernel_id;
  }
}

TEST(Validator, SandwichMinimalityAndBarriers) {
  for (const auto& m : every_module()) {
    const auto& entry = m.ast.entries.at(0);
    const auto scan = find_timing_blocks(entry);
    ASSERT_TRUE(scan.diagnostics.empty()) << m.kernel_id;
    ASSERT_EQ(scan.blocks.size(), m.timing_blocks.size()) << m.kernel_id;
    for (std::size_t i = 0; i < scan.blocks.size(); ++i) {
      const auto& b = scan.blocks[i];
      EXPECT_EQ(b.block.timed_instructions, m.timing_blocks[i].timed_instructions);
      ASSERT_GE(b.start_index, 2u);
      EXPECT_TRUE(entry.body[b.start_index - 2].base() == "membar") << m.kernel_id;
      EXPECT_TRUE(entry.body[b.start_index - 1].base() == "bar") << m.kernel_id;
      ASSERT_LT(b.end_index + 2, entry.body.size());
      EXPECT_TRUE(entry.body[b.end_index + 1].base() == "membar") << m.kernel_id;
      EXPECT_TRUE(entry.body[b.end_index + 2].base() == "bar") << m.kernel_id;
    }
    if (m.descriptor) {
      EXPECT_EQ(opcodes(m.timing_blocks.at(0).timed_instructions), m.descriptor->ptx_sequence) << m.kernel_id;
    }
  }
}

TEST(Validator, UndeclaredRegister) {
  auto m = emit_alu_kernel(desc("add", DataType::u32));
  auto ast = m.ast;
  auto& body = ast.entries[0].body;
  const auto timed = std::find_if(body.begin(), body.end(), [](const Instruction& i) { return i.opcode == "add.u32"; });
  ASSERT_NE(timed, body.end());
  std::get<Register>(timed->operands[1]).name = "%r99";
  const auto diags = validate_ptx(with_ast(m, ast));
  ASSERT_TRUE(has_code(diags, "undeclared-register"));
  const auto d = std::find_if(diags.begin(), diags.end(), [](const Diagnostic& x) { return x.code == "undeclared-register"; });
  EXPECT_NE(d->message.find("%r99"), std::string::npos);
}

TEST(Validator, ReversedClockReads) {
  const auto m = emit_alu_kernel(desc("add", DataType::u32));
  auto ast = m.ast;
  auto& body = ast.entries[0].body;
  const auto scan = find_timing_blocks(ast.entries[0]);
  ASSERT_EQ(scan.blocks.size(), 1u);
  // Move the end read in front of the start read.
  const auto end = body[scan.blocks[0].end_index];
  body.erase(body.begin() + scan.blocks[0].end_index);
  body.insert(body.begin() + scan.blocks[0].start_index, end);
  EXPECT_TRUE(has_code(validate_ptx(with_ast(m, ast)), "ill-nested-timing-block"));
}

TEST(Validator, ParseFailureIsDiagnostic) {
  auto m = emit_alu_kernel(desc("add", DataType::u32));
  m.text += "\nbogus %r1 %r2\n";
  EXPECT_FALSE(validate_ptx(m).empty());
  EXPECT_THROW(parse("this is not ptx"), ParseError);
}
