#include "gpulat/ptx_codegen.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <sstream>

#include "gpulat/analysis.hpp"
#include "gpulat/errors.hpp"

namespace gpulat::ptx {

std::string_view to_string(ParamRole r) {
  switch (r) {
    case ParamRole::InputPointer: return "input";
    case ParamRole::CycleOutput: return "cycles";
    case ParamRole::SinkOutput: return "sink";
    case ParamRole::TextureObject: return "texture";
  }
  return "?";
}

std::string_view to_string(KernelKind k) {
  switch (k) {
    case KernelKind::Alu: return "alu";
    case KernelKind::Div: return "div";
    case KernelKind::ClockOverhead: return "clock_overhead";
    case KernelKind::GlobalMemory: return "global_memory";
    case KernelKind::SharedMemory: return "shared_memory";
    case KernelKind::ConstantMemory: return "constant_memory";
    case KernelKind::Texture: return "texture";
  }
  return "?";
}

std::vector<std::string> PtxModule::cycle_output_names() const {
  std::vector<std::string> names;
  for (const auto& p : params) {
    if (p.role == ParamRole::CycleOutput) names.push_back(p.output_name);
  }
  return names;
}

// ---------------------------------------------------------------------------
// Register allocation

namespace {

struct ClassInfo {
  const char* decl_type;
  const char* prefix;
};

constexpr ClassInfo kClassInfo[] = {
    {"b32", "%r"}, {"b64", "%rd"}, {"pred", "%p"}, {"f32", "%f"}, {"f64", "%fd"}, {"f16", "%h"},
};

}  // namespace

std::string RegisterAllocator::allocate(Class c) {
  auto idx = static_cast<std::size_t>(c);
  return kClassInfo[idx].prefix + std::to_string(++counters_[idx]);
}

std::vector<RegisterDecl> RegisterAllocator::declarations() const {
  std::vector<RegisterDecl> decls;
  for (std::size_t i = 0; i < counters_.size(); ++i) {
    if (counters_[i] == 0) continue;
    decls.push_back({kClassInfo[i].decl_type, kClassInfo[i].prefix, counters_[i] + 1});
  }
  return decls;
}

RegisterAllocator::Class RegisterAllocator::class_for(DataType t) {
  switch (t) {
    case DataType::u32:
    case DataType::s32: return Class::b32;
    case DataType::u64:
    case DataType::s64: return Class::b64;
    case DataType::f32: return Class::f32;
    case DataType::f64: return Class::f64;
    case DataType::f16: return Class::f16;
    case DataType::pred: return Class::pred;
  }
  return Class::b32;
}

// ---------------------------------------------------------------------------
// Literal encoding

namespace {

std::uint16_t float_to_half(float value) {
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
  const std::uint32_t sign = (bits >> 16) & 0x8000u;
  const std::int32_t exponent = static_cast<std::int32_t>((bits >> 23) & 0xffu) - 127 + 15;
  std::uint32_t mantissa = bits & 0x7fffffu;

  if (((bits >> 23) & 0xffu) == 0xffu) {  // inf / nan
    return static_cast<std::uint16_t>(sign | 0x7c00u | (mantissa ? 0x200u : 0u));
  }
  if (exponent >= 0x1f) return static_cast<std::uint16_t>(sign | 0x7c00u);
  if (exponent <= 0) {
    if (exponent < -10) return static_cast<std::uint16_t>(sign);
    mantissa |= 0x800000u;
    const int shift = 14 - exponent;
    std::uint32_t half = mantissa >> shift;
    const std::uint32_t rem = mantissa & ((1u << shift) - 1);
    const std::uint32_t halfway = 1u << (shift - 1);
    if (rem > halfway || (rem == halfway && (half & 1u))) ++half;
    return static_cast<std::uint16_t>(sign | half);
  }
  std::uint32_t half = sign | (static_cast<std::uint32_t>(exponent) << 10) | (mantissa >> 13);
  const std::uint32_t rem = mantissa & 0x1fffu;
  if (rem > 0x1000u || (rem == 0x1000u && (half & 1u))) ++half;
  return static_cast<std::uint16_t>(half);
}

double parse_double(const std::string& text) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) throw ConfigError("bad numeric literal '" + text + "'");
  return v;
}

std::int64_t parse_int64(const std::string& text) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) throw ConfigError("bad integer literal '" + text + "'");
  return v;
}

std::string hex_bits(std::uint64_t bits, int digits) {
  std::ostringstream os;
  os << std::hex << std::setw(digits) << std::setfill('0') << bits;
  return os.str();
}

int type_bits(DataType t) {
  switch (t) {
    case DataType::u64:
    case DataType::s64:
    case DataType::f64: return 64;
    case DataType::f16: return 16;
    default: return 32;
  }
}

// PTX immediate for a value of the given type.
std::string immediate_text(DataType t, const std::string& value) {
  switch (t) {
    case DataType::f32: return "0f" + hex_bits(encode_literal(t, value), 8);
    case DataType::f64: return "0d" + hex_bits(encode_literal(t, value), 16);
    case DataType::f16: return "0x" + hex_bits(encode_literal(t, value), 4);
    default: return std::to_string(parse_int64(value));
  }
}

std::vector<std::string> default_values(DataType t) {
  switch (t) {
    case DataType::f16:
    case DataType::f32:
    case DataType::f64: return {"2.5", "1.5", "0.5", "3"};
    case DataType::u64:
    case DataType::s64: return {"123456789012", "987654321", "42", "7"};
    default: return {"7", "3", "5", "2"};
  }
}

std::string load_opcode(const char* space, DataType t) {
  const char* suffix = t == DataType::f16 ? "b16" : nullptr;
  return std::string("ld.") + space + "." + (suffix ? suffix : std::string(to_string(t)));
}

std::string store_opcode(DataType t) {
  return "st.global." + (t == DataType::f16 ? std::string("b16") : std::string(to_string(t)));
}

std::string mov_opcode(DataType t) {
  return "mov." + (t == DataType::f16 ? std::string("b16") : std::string(to_string(t)));
}

std::string dummy_opcode(DataType t) {
  switch (t) {
    case DataType::u64:
    case DataType::s64: return "add.s64";
    case DataType::f16: return "add.f16";
    case DataType::f32: return "add.f32";
    case DataType::f64: return "add.f64";
    case DataType::s32: return "add.s32";
    default: return "add.u32";
  }
}

struct Op {
  static Operand reg(const std::string& r) { return Register{r}; }
  static Operand imm(std::string v) { return Immediate{std::move(v)}; }
  static Operand addr(const std::string& base, std::int64_t off = 0) { return Address{base, off}; }
  static Operand clock() { return SpecialRegister{"%clock"}; }
};

// Incrementally builds one entry, then prints the module.
class KernelBuilder {
 public:
  KernelBuilder(std::string entry, const CodegenOptions& options, std::string comment)
      : entry_name_(std::move(entry)), options_(options) {
    module_.comments = {" Generated by gpulat: " + comment};
    module_.version = options.ptx_version;
    module_.target = options.target_arch;
    module_.address_size = 64;
  }

  std::string reg(RegisterAllocator::Class c) { return regs_.allocate(c); }
  std::string reg(DataType t) { return regs_.allocate(RegisterAllocator::class_for(t)); }

  // Declares a .u64 parameter and returns its name.
  std::string param(ParamRole role, std::string output_name = {}, int element_bits = 32,
                    std::vector<std::uint64_t> init = {}) {
    std::string name = entry_name_ + "_param_" + std::to_string(params_.size());
    params_.push_back({name, role, std::move(output_name), element_bits, std::move(init)});
    return name;
  }

  std::string load_param(const std::string& param_name) {
    std::string r = reg(RegisterAllocator::Class::b64);
    emit("ld.param.u64", {Op::reg(r), Op::addr(param_name)});
    return r;
  }

  void emit(std::string opcode, std::vector<Operand> operands) {
    Instruction inst{std::move(opcode), std::move(operands), pending_blank_};
    pending_blank_ = false;
    body_.push_back(std::move(inst));
  }

  void blank() { pending_blank_ = true; }

  void barrier() {
    emit("membar.gl", {});
    emit("bar.sync", {Op::imm("0")});
  }

  // membar+bar, clock, body, clock, membar+bar, sub. Returns the block
  // with its delta register.
  template <typename Body>
  TimingBlock timed(const std::string& output_name, Body&& body) {
    blank();
    barrier();
    TimingBlock block;
    block.output_name = output_name;
    block.start_clock_reg = reg(RegisterAllocator::Class::b32);
    emit("mov.u32", {Op::reg(block.start_clock_reg), Op::clock()});
    const std::size_t first = body_.size();
    body();
    for (std::size_t i = first; i < body_.size(); ++i) block.timed_instructions.push_back(body_[i]);
    block.end_clock_reg = reg(RegisterAllocator::Class::b32);
    emit("mov.u32", {Op::reg(block.end_clock_reg), Op::clock()});
    barrier();
    block.result_reg = reg(RegisterAllocator::Class::b32);
    emit("sub.s32", {Op::reg(block.result_reg), Op::reg(block.end_clock_reg), Op::reg(block.start_clock_reg)});
    blocks_.push_back(block);
    return block;
  }

  void add_global(VariableDecl v) { module_.globals.push_back(std::move(v)); }
  void add_local(VariableDecl v) { locals_.push_back(std::move(v)); }

  PtxModule finish(KernelKind kind, std::string kernel_id, std::string file_stem) {
    emit("ret", {});
    Entry entry;
    entry.visible = true;
    entry.name = entry_name_;
    for (const auto& p : params_) entry.params.push_back({"u64", p.name});
    entry.registers = regs_.declarations();
    entry.locals = std::move(locals_);
    entry.body = std::move(body_);
    module_.entries.push_back(std::move(entry));

    PtxModule out;
    out.ast = std::move(module_);
    out.text = print(out.ast);
    out.entry_name = entry_name_;
    out.params = std::move(params_);
    out.timing_blocks = std::move(blocks_);
    for (auto& b : out.timing_blocks) {
      for (auto& inst : b.timed_instructions) inst.blank_line_before = false;
    }
    out.target_version = options_.ptx_version;
    out.target_arch = options_.target_arch;
    out.kind = kind;
    out.kernel_id = std::move(kernel_id);
    out.file_stem = std::move(file_stem);
    return out;
  }

 private:
  std::string entry_name_;
  CodegenOptions options_;
  Module module_;
  RegisterAllocator regs_;
  std::vector<KernelParam> params_;
  std::vector<VariableDecl> locals_;
  std::vector<Instruction> body_;
  std::vector<TimingBlock> blocks_;
  bool pending_blank_ = false;
};

void check_target(const isa::InstructionDescriptor& desc, const CodegenOptions& options) {
  const ComputeCapability cc = ComputeCapability::parse(options.target_arch);
  if (!desc.supported_on(cc)) {
    throw UnsupportedOnTarget(desc.kernel_id() + " requires compute capability " +
                              desc.min_compute_capability.to_string() + ", target is " + options.target_arch);
  }
}

// Materializes `count` operands of type `t` as registers, either loaded
// through input pointers or moved from immediates.
std::vector<std::string> materialize_operands(KernelBuilder& kb, DataType t, const OperandPolicy& policy,
                                              std::size_t count) {
  auto values = policy.values.empty() ? default_values(t) : policy.values;
  if (values.size() < count) {
    throw ConfigError("operand policy supplies " + std::to_string(values.size()) + " values, " +
                      std::to_string(count) + " needed");
  }
  std::vector<std::string> regs;
  if (policy.source == OperandPolicy::Source::Parameters) {
    std::vector<std::string> pointers;
    for (std::size_t i = 0; i < count; ++i) {
      std::string p = kb.param(ParamRole::InputPointer, {}, type_bits(t), {encode_literal(t, values[i])});
      pointers.push_back(kb.load_param(p));
    }
    kb.blank();
    for (std::size_t i = 0; i < count; ++i) {
      std::string r = kb.reg(t);
      kb.emit(load_opcode("global", t), {Op::reg(r), Op::addr(pointers[i])});
      regs.push_back(r);
    }
  } else {
    kb.blank();
    for (std::size_t i = 0; i < count; ++i) {
      std::string r = kb.reg(t);
      kb.emit(mov_opcode(t), {Op::reg(r), Op::imm(immediate_text(t, values[i]))});
      regs.push_back(r);
    }
  }
  return regs;
}

std::string divisor_literal(DataType t, const Divisor& divisor) {
  if (const auto* i = std::get_if<std::int64_t>(&divisor)) {
    if (t == DataType::f32 || t == DataType::f64) return immediate_text(t, std::to_string(*i));
    return std::to_string(*i);
  }
  const double d = std::get<double>(divisor);
  if (t == DataType::f32 || t == DataType::f64) {
    std::ostringstream os;
    os << std::setprecision(17) << d;
    return immediate_text(t, os.str());
  }
  if (d != std::floor(d)) throw ConfigError("integer division needs an integral divisor");
  return std::to_string(static_cast<std::int64_t>(d));
}

DivVariant classify(const Divisor& divisor) {
  if (const auto* i = std::get_if<std::int64_t>(&divisor)) return analysis::classify_divisor(*i);
  return analysis::classify_divisor(std::get<double>(divisor));
}

bool is_zero(const Divisor& divisor) {
  if (const auto* i = std::get_if<std::int64_t>(&divisor)) return *i == 0;
  return std::get<double>(divisor) == 0.0;
}

// Stores the block deltas and the dependent dummy result. Cycle outputs
// precede the sink in parameter order.
struct OutputParams {
  std::vector<std::string> cycle_pointers;
  std::string sink_pointer;
};

OutputParams declare_outputs(KernelBuilder& kb, const std::vector<std::string>& cycle_names, DataType sink_type,
                             bool with_sink = true) {
  OutputParams out;
  std::vector<std::string> names;
  for (const auto& n : cycle_names) names.push_back(kb.param(ParamRole::CycleOutput, n, 32));
  std::string sink;
  if (with_sink) sink = kb.param(ParamRole::SinkOutput, "sink", type_bits(sink_type));
  for (const auto& n : names) out.cycle_pointers.push_back(kb.load_param(n));
  if (with_sink) out.sink_pointer = kb.load_param(sink);
  return out;
}

void store_results(KernelBuilder& kb, const OutputParams& out, const std::vector<TimingBlock>& blocks,
                   DataType sink_type, const std::string& sink_reg) {
  kb.blank();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    kb.emit("st.global.u32", {Op::addr(out.cycle_pointers[i]), Op::reg(blocks[i].result_reg)});
  }
  if (!sink_reg.empty()) kb.emit(store_opcode(sink_type), {Op::addr(out.sink_pointer), Op::reg(sink_reg)});
}

PtxModule build_arith(const isa::InstructionDescriptor& desc, const OperandPolicy& policy,
                      const CodegenOptions& options, const std::optional<Divisor>& divisor) {
  check_target(desc, options);
  const DataType t = desc.data_type;
  const bool is_div = divisor.has_value();
  std::optional<DivVariant> div_class;
  std::string div_text;
  if (is_div) {
    div_class = classify(*divisor);
    div_text = divisor_literal(t, *divisor);
  }
  const isa::InstructionDescriptor& meta_desc =
      is_div ? isa::descriptor_for(desc.mnemonic, t, div_class) : desc;
  const std::string kernel_id = meta_desc.kernel_id();

  std::string comment = "clock sandwich around " + desc.ptx_sequence.front();
  if (is_div) comment += " by immediate " + div_text + " (" + std::string(to_string(*div_class)) + " divisor)";
  KernelBuilder kb(kernel_id, options, comment);

  const std::size_t sources = is_div ? 1 : static_cast<std::size_t>(desc.operand_arity);
  OperandPolicy effective = policy;
  if (is_div && effective.values.empty()) {
    effective.values = {t == DataType::f32 || t == DataType::f64 ? "1000.5" : "1000"};
  }

  // Parameter order follows the reference listing: inputs, then outputs.
  std::vector<std::string> input_regs;
  OutputParams outs;
  if (effective.source == OperandPolicy::Source::Parameters) {
    auto vals = effective.values.empty() ? default_values(t) : effective.values;
    if (vals.size() < sources) throw ConfigError("not enough operand values for " + kernel_id);
    std::vector<std::string> in_params;
    for (std::size_t i = 0; i < sources; ++i) {
      in_params.push_back(kb.param(ParamRole::InputPointer, {}, type_bits(t), {encode_literal(t, vals[i])}));
    }
    std::vector<std::string> in_ptrs;
    for (const auto& p : in_params) in_ptrs.push_back(kb.load_param(p));
    outs = declare_outputs(kb, {"cycles"}, t);
    kb.blank();
    for (const auto& ptr : in_ptrs) {
      std::string r = kb.reg(t);
      kb.emit(load_opcode("global", t), {Op::reg(r), Op::addr(ptr)});
      input_regs.push_back(r);
    }
  } else {
    outs = declare_outputs(kb, {"cycles"}, t);
    input_regs = materialize_operands(kb, t, effective, sources);
  }

  if (!desc.setup_opcode.empty()) {
    // Sets the carry flag consumed by the timed instruction.
    std::string scratch = kb.reg(t);
    std::vector<Operand> ops{Op::reg(scratch)};
    const int setup_sources = desc.setup_opcode.starts_with("mad") ? 3 : 2;
    for (int i = 0; i < setup_sources; ++i) ops.push_back(Op::reg(input_regs[i % input_regs.size()]));
    kb.blank();
    kb.emit(desc.setup_opcode, std::move(ops));
  }

  std::string result;
  TimingBlock block = kb.timed("cycles", [&] {
    std::vector<std::string> srcs = input_regs;
    for (const auto& opcode : desc.ptx_sequence) {
      result = kb.reg(t);
      std::vector<Operand> ops{Op::reg(result)};
      for (const auto& s : srcs) ops.push_back(Op::reg(s));
      if (is_div) ops.push_back(Op::imm(div_text));
      kb.emit(opcode, std::move(ops));
      srcs.assign(1, result);
      if (static_cast<std::size_t>(desc.operand_arity) > 1 && !is_div) {
        srcs.insert(srcs.end(), input_regs.begin() + 1, input_regs.end());
      }
    }
  });

  kb.blank();
  std::string sink = kb.reg(t);
  kb.emit(dummy_opcode(t), {Op::reg(sink), Op::reg(result), Op::reg(input_regs.front())});
  store_results(kb, outs, {block}, t, sink);

  PtxModule m = kb.finish(is_div ? KernelKind::Div : KernelKind::Alu, kernel_id, meta_desc.file_stem());
  m.descriptor = meta_desc;
  if (is_div) {
    m.divisor_class = div_class;
    m.divisor_literal = div_text;
  }
  return m;
}

}  // namespace

std::uint64_t encode_literal(DataType type, const std::string& value) {
  switch (type) {
    case DataType::f32: return std::bit_cast<std::uint32_t>(static_cast<float>(parse_double(value)));
    case DataType::f64: return std::bit_cast<std::uint64_t>(parse_double(value));
    case DataType::f16: return float_to_half(static_cast<float>(parse_double(value)));
    case DataType::u32:
    case DataType::s32: return static_cast<std::uint32_t>(parse_int64(value));
    case DataType::pred: return parse_int64(value) != 0;
    default: return static_cast<std::uint64_t>(parse_int64(value));
  }
}

Divisor default_divisor(DataType type, DivVariant variant) {
  const bool fp = type == DataType::f32 || type == DataType::f64;
  if (variant == DivVariant::Regular) return fp ? Divisor{8.0} : Divisor{std::int64_t{8}};
  return fp ? Divisor{7.0} : Divisor{std::int64_t{7}};
}

PtxModule emit_clock_overhead_kernel(const CodegenOptions& options) {
  KernelBuilder kb("clock_overhead", options, "back-to-back clock reads (calibration)");
  auto outs = declare_outputs(kb, {"cycles"}, DataType::u32, /*with_sink=*/false);
  TimingBlock block = kb.timed("cycles", [] {});
  store_results(kb, outs, {block}, DataType::u32, {});
  return kb.finish(KernelKind::ClockOverhead, "clock_overhead", "Clock__overhead__u32");
}

PtxModule emit_alu_kernel(const isa::InstructionDescriptor& desc, const OperandPolicy& operands,
                          const CodegenOptions& options) {
  if (desc.div_variant) {
    check_target(desc, options);
    return emit_div_kernel(desc, default_divisor(desc.data_type, *desc.div_variant), options);
  }
  return build_arith(desc, operands, options, std::nullopt);
}

PtxModule emit_div_kernel(const isa::InstructionDescriptor& desc, Divisor divisor, const CodegenOptions& options) {
  if (desc.mnemonic != "div") throw UnknownInstruction(desc.kernel_id() + " is not a division descriptor");
  if (is_zero(divisor)) throw ZeroDivisor("division kernel needs a nonzero divisor");
  return build_arith(desc, OperandPolicy{}, options, divisor);
}

PtxModule emit_global_memory_kernel(const CodegenOptions& options) {
  KernelBuilder kb("global_ld", options, "cold ld.global then a second word of the same line");
  std::vector<std::uint64_t> init;
  for (std::uint64_t i = 0; i < 64; ++i) init.push_back(i + 1);
  std::string data = kb.param(ParamRole::InputPointer, {}, 32, std::move(init));
  std::string data_ptr = kb.load_param(data);
  auto outs = declare_outputs(kb, {"device_cycles", "hit_cycles"}, DataType::u32);

  std::string first, second;
  TimingBlock cold = kb.timed("device_cycles", [&] {
    first = kb.reg(DataType::u32);
    kb.emit("ld.global.u32", {Op::reg(first), Op::addr(data_ptr)});
  });
  TimingBlock hit = kb.timed("hit_cycles", [&] {
    second = kb.reg(DataType::u32);
    kb.emit("ld.global.u32", {Op::reg(second), Op::addr(data_ptr, kGlobalHitOffsetBytes)});
  });
  kb.blank();
  std::string sink = kb.reg(DataType::u32);
  kb.emit("add.u32", {Op::reg(sink), Op::reg(first), Op::reg(second)});
  store_results(kb, outs, {cold, hit}, DataType::u32, sink);
  return kb.finish(KernelKind::GlobalMemory, "global_ld", "Memory__global__u32");
}

PtxModule emit_shared_kernel(const CodegenOptions& options) {
  KernelBuilder kb("shared_ld", options, "ld.shared after an untimed st.shared");
  std::string value = kb.param(ParamRole::InputPointer, {}, 32, {42});
  std::string value_ptr = kb.load_param(value);
  auto outs = declare_outputs(kb, {"cycles"}, DataType::u32);
  kb.add_local({"shared", 4, "b32", "shared_ld_buf", 32, {}});

  kb.blank();
  std::string v = kb.reg(DataType::u32);
  kb.emit("ld.global.u32", {Op::reg(v), Op::addr(value_ptr)});
  kb.emit("st.shared.u32", {Op::addr("shared_ld_buf"), Op::reg(v)});

  std::string loaded;
  TimingBlock block = kb.timed("cycles", [&] {
    loaded = kb.reg(DataType::u32);
    kb.emit("ld.shared.u32", {Op::reg(loaded), Op::addr("shared_ld_buf")});
  });
  kb.blank();
  std::string sink = kb.reg(DataType::u32);
  kb.emit("add.u32", {Op::reg(sink), Op::reg(loaded), Op::reg(v)});
  store_results(kb, outs, {block}, DataType::u32, sink);
  return kb.finish(KernelKind::SharedMemory, "shared_ld", "Memory__shared__u32");
}

PtxModule emit_constant_kernel(const CodegenOptions& options) {
  KernelBuilder kb("const_ld", options, "ld.const from a module-scope constant bank symbol");
  kb.add_global({"const", 4, "b32", "const_ld_data", 8, {"1", "2", "3", "4", "5", "6", "7", "8"}});
  auto outs = declare_outputs(kb, {"cycles"}, DataType::u32);

  std::string loaded;
  TimingBlock block = kb.timed("cycles", [&] {
    loaded = kb.reg(DataType::u32);
    kb.emit("ld.const.u32", {Op::reg(loaded), Op::addr("const_ld_data")});
  });
  kb.blank();
  std::string sink = kb.reg(DataType::u32);
  kb.emit("add.u32", {Op::reg(sink), Op::reg(loaded), Op::imm("1")});
  store_results(kb, outs, {block}, DataType::u32, sink);
  return kb.finish(KernelKind::ConstantMemory, "const_ld", "Memory__const__u32");
}

PtxModule emit_texture_kernel(const CodegenOptions& options) {
  KernelBuilder kb("texture_fetch", options, "1-D texture fetches: cold texel, then its neighbour");
  std::vector<std::uint64_t> texels;
  for (std::uint64_t i = 0; i < 64; ++i) texels.push_back(i + 1);
  std::string tex = kb.param(ParamRole::TextureObject, {}, 32, std::move(texels));
  std::string handle = kb.load_param(tex);
  auto outs = declare_outputs(kb, {"device_cycles", "hit_cycles"}, DataType::u32);

  kb.blank();
  std::string x0 = kb.reg(DataType::u32);
  std::string x1 = kb.reg(DataType::u32);
  kb.emit("mov.u32", {Op::reg(x0), Op::imm("0")});
  kb.emit("mov.u32", {Op::reg(x1), Op::imm("1")});

  auto fetch = [&](const std::string& coord) {
    VectorOperand dst;
    for (int i = 0; i < 4; ++i) dst.registers.push_back(kb.reg(DataType::u32));
    kb.emit("tex.1d.v4.u32.s32", {dst, TextureAddress{handle, {coord}}});
    return dst.registers.front();
  };
  std::string first, second;
  TimingBlock cold = kb.timed("device_cycles", [&] { first = fetch(x0); });
  TimingBlock hit = kb.timed("hit_cycles", [&] { second = fetch(x1); });
  kb.blank();
  std::string sink = kb.reg(DataType::u32);
  kb.emit("add.u32", {Op::reg(sink), Op::reg(first), Op::reg(second)});
  store_results(kb, outs, {cold, hit}, DataType::u32, sink);
  return kb.finish(KernelKind::Texture, "texture_fetch", "Memory__texture__u32");
}

PtxModule emit_probe_kernel(const isa::ProbeKernel& probe, const CodegenOptions& options) {
  if (probe.kernel_id == "clock_overhead") return emit_clock_overhead_kernel(options);
  if (probe.kernel_id == "global_ld") return emit_global_memory_kernel(options);
  if (probe.kernel_id == "shared_ld") return emit_shared_kernel(options);
  if (probe.kernel_id == "const_ld") return emit_constant_kernel(options);
  if (probe.kernel_id == "texture_fetch") return emit_texture_kernel(options);
  throw UnknownInstruction("no generator for probe kernel " + probe.kernel_id);
}

}  // namespace gpulat::ptx
