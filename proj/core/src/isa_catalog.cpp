#include "gpulat/isa_catalog.hpp"

#include <algorithm>
#include <tuple>

#include "gpulat/errors.hpp"

namespace gpulat::isa {

namespace {

using C = InstructionCategory;
using T = DataType;

Signedness signedness_of(DataType t) {
  switch (t) {
    case T::u32:
    case T::u64: return Signedness::Unsigned;
    case T::s32:
    case T::s64: return Signedness::Signed;
    default: return Signedness::NotApplicable;
  }
}

struct Row {
  const char* mnemonic;
  C category;
  T type;
  int arity;
  const char* opcode;
  const char* group;  // row label without the category tag
  bool intrinsic = false;
  const char* setup = "";
};

// Rows of the published ALU table expanded into one entry per opcode. The
// div rows appear once here and are split into regular/irregular below.
const Row kRows[] = {
    // (1) Integer arithmetic
    {"add", C::IntArith, T::u32, 2, "add.u32", "add/sub/min/max"},
    {"sub", C::IntArith, T::u32, 2, "sub.u32", "add/sub/min/max"},
    {"min", C::IntArith, T::u32, 2, "min.u32", "add/sub/min/max"},
    {"max", C::IntArith, T::u32, 2, "max.u32", "add/sub/min/max"},
    {"mul", C::IntArith, T::u32, 2, "mul.lo.u32", "mul/mad"},
    {"mad", C::IntArith, T::u32, 3, "mad.lo.u32", "mul/mad"},
    {"div", C::IntArith, T::s32, 2, "div.s32", "{s} div"},
    {"rem", C::IntArith, T::s32, 2, "rem.s32", "{s} rem"},
    {"abs", C::IntArith, T::s32, 1, "abs.s32", "abs"},
    {"div", C::IntArith, T::u32, 2, "div.u32", "{u} div"},
    {"rem", C::IntArith, T::u32, 2, "rem.u32", "{u} rem"},
    // (2) Logic and shift
    {"and", C::LogicShift, T::u32, 2, "and.b32", "and/or/not/xor"},
    {"or", C::LogicShift, T::u32, 2, "or.b32", "and/or/not/xor"},
    {"not", C::LogicShift, T::u32, 1, "not.b32", "and/or/not/xor"},
    {"xor", C::LogicShift, T::u32, 2, "xor.b32", "and/or/not/xor"},
    {"cnot", C::LogicShift, T::u32, 1, "cnot.b32", "cnot"},
    {"shl", C::LogicShift, T::u32, 2, "shl.b32", "shl/shr"},
    {"shr", C::LogicShift, T::u32, 2, "shr.u32", "shl/shr"},
    // (3) FP32
    {"add", C::FP32, T::f32, 2, "add.f32", "add/sub/min/max"},
    {"sub", C::FP32, T::f32, 2, "sub.f32", "add/sub/min/max"},
    {"min", C::FP32, T::f32, 2, "min.f32", "add/sub/min/max"},
    {"max", C::FP32, T::f32, 2, "max.f32", "add/sub/min/max"},
    {"mul", C::FP32, T::f32, 2, "mul.f32", "mul/mad/fma"},
    {"mad", C::FP32, T::f32, 3, "mad.rn.f32", "mul/mad/fma"},
    {"fma", C::FP32, T::f32, 3, "fma.rn.f32", "mul/mad/fma"},
    {"div", C::FP32, T::f32, 2, "div.rn.f32", "div"},
    // (4) FP64
    {"add", C::FP64, T::f64, 2, "add.f64", "add/sub/min/max"},
    {"sub", C::FP64, T::f64, 2, "sub.f64", "add/sub/min/max"},
    {"min", C::FP64, T::f64, 2, "min.f64", "add/sub/min/max"},
    {"max", C::FP64, T::f64, 2, "max.f64", "add/sub/min/max"},
    {"mul", C::FP64, T::f64, 2, "mul.f64", "mul/mad/fma"},
    {"mad", C::FP64, T::f64, 3, "mad.rn.f64", "mul/mad/fma"},
    {"fma", C::FP64, T::f64, 3, "fma.rn.f64", "mul/mad/fma"},
    {"div", C::FP64, T::f64, 2, "div.rn.f64", "div"},
    // (5) FP16
    {"add", C::FP16, T::f16, 2, "add.f16", "add/sub"},
    {"sub", C::FP16, T::f16, 2, "sub.f16", "add/sub"},
    {"mul", C::FP16, T::f16, 2, "mul.f16", "mul"},
    {"fma", C::FP16, T::f16, 3, "fma.rn.f16", "fma"},
    // (6) Multi precision
    {"add.cc", C::MultiPrecision, T::u32, 2, "add.cc.u32", "add.cc/addc/sub.cc"},
    {"addc", C::MultiPrecision, T::u32, 2, "addc.u32", "add.cc/addc/sub.cc", false, "add.cc.u32"},
    {"sub.cc", C::MultiPrecision, T::u32, 2, "sub.cc.u32", "add.cc/addc/sub.cc"},
    {"subc", C::MultiPrecision, T::u32, 2, "subc.u32", "subc", false, "sub.cc.u32"},
    {"mad.cc", C::MultiPrecision, T::u32, 3, "mad.lo.cc.u32", "mad.cc/madc"},
    {"madc", C::MultiPrecision, T::u32, 3, "madc.lo.u32", "mad.cc/madc", false, "mad.lo.cc.u32"},
    // (7) Special math
    {"rcp", C::SpecialMath, T::f32, 1, "rcp.rn.f32", "rcp"},
    {"sqrt", C::SpecialMath, T::f32, 1, "sqrt.rn.f32", "sqrt"},
    {"sqrt.approx", C::SpecialMath, T::f32, 1, "sqrt.approx.f32", "fast approximate sqrt", true},
    {"rsqrt.approx", C::SpecialMath, T::f32, 1, "rsqrt.approx.f32", "fast approximate rsqrt", true},
    {"sin.approx", C::SpecialMath, T::f32, 1, "sin.approx.f32", "fast approximate sin/cos", true},
    {"cos.approx", C::SpecialMath, T::f32, 1, "cos.approx.f32", "fast approximate sin/cos", true},
    {"lg2.approx", C::SpecialMath, T::f32, 1, "lg2.approx.f32", "fast approximate lg2", true},
    {"ex2.approx", C::SpecialMath, T::f32, 1, "ex2.approx.f32", "fast approximate ex2", true},
    {"copysign", C::SpecialMath, T::f32, 2, "copysign.f32", "copysign"},
    // (8) Integer intrinsics, cataloged by their PTX opcodes
    {"mul24", C::IntIntrinsic, T::s32, 2, "mul24.lo.s32", "mul24()/mad24()", true},
    {"mad24", C::IntIntrinsic, T::s32, 3, "mad24.lo.s32", "mul24()/mad24()", true},
    {"mulhi", C::IntIntrinsic, T::s32, 2, "mul.hi.s32", "mulhi()", true},
    {"mul64hi", C::IntIntrinsic, T::s64, 2, "mul.hi.s64", "mul64hi()", true},
    {"sad", C::IntIntrinsic, T::u32, 3, "sad.u32", "sad()", true},
    {"popc", C::IntIntrinsic, T::u32, 1, "popc.b32", "popc()", true},
    {"clz", C::IntIntrinsic, T::u32, 1, "clz.b32", "clz()", true},
    {"bfe", C::IntIntrinsic, T::u32, 3, "bfe.u32", "bfe()/bfi()", true},
    {"bfi", C::IntIntrinsic, T::u32, 4, "bfi.b32", "bfe()/bfi()", true},
    {"bfind", C::IntIntrinsic, T::u32, 1, "bfind.u32", "bfind()/bbrev()", true},
    {"brev", C::IntIntrinsic, T::u32, 1, "brev.b32", "bfind()/bbrev()", true},
};

std::string tagged(const std::string& label, InstructionCategory c) {
  return label + " [" + std::string(category_tag(c)) + "]";
}

auto sort_key(const InstructionDescriptor& d) {
  return std::make_tuple(static_cast<int>(d.category), std::string_view(d.mnemonic),
                         static_cast<int>(d.data_type),
                         d.div_variant ? static_cast<int>(*d.div_variant) : -1);
}

constexpr std::string_view kUncataloged[] = {
    "neg",  "testp", "set",  "setp",  "selp", "slct", "fns",  "prmt", "dp4a", "dp2a",
    "shf",  "cvt",   "cvta", "activemask", "vote", "shfl", "match", "atom", "red",
    "prefetch", "isspacep", "vadd", "vsub",
    "vabsdiff", "vmin", "vmax", "vshl", "vshr", "vmad", "vset",
};

}  // namespace

std::string InstructionDescriptor::kernel_id() const {
  std::string id = mnemonic;
  std::replace(id.begin(), id.end(), '.', '_');
  id += "_";
  id += to_string(data_type);
  if (div_variant) {
    id += "_";
    id += to_string(*div_variant);
  }
  return id;
}

std::string InstructionDescriptor::file_stem() const {
  std::string stem = std::string(to_string(category)) + "__" + mnemonic + "__" + std::string(to_string(data_type));
  if (div_variant) stem += "__" + std::string(to_string(*div_variant));
  return stem;
}

std::optional<MemoryProbeKind> ProbeKernel::kind_for(std::string_view output_name, L1Mode l1) const {
  for (const auto& out : outputs) {
    if (out.output_name != output_name) continue;
    if (uses_l1_mode && !out.cold) {
      return l1 == L1Mode::Disabled ? MemoryProbeKind::L2Hit : MemoryProbeKind::L1Hit;
    }
    return out.kind;
  }
  return std::nullopt;
}

InstructionCatalog::InstructionCatalog() {
  for (const Row& row : kRows) {
    InstructionDescriptor d;
    d.mnemonic = row.mnemonic;
    d.category = row.category;
    d.data_type = row.type;
    d.signedness = signedness_of(row.type);
    d.operand_arity = row.arity;
    d.is_intrinsic = row.intrinsic;
    d.ptx_sequence = {row.opcode};
    d.setup_opcode = row.setup;
    if (row.category == C::FP16) d.min_compute_capability = {6, 0};

    if (d.mnemonic == "div") {
      for (DivVariant v : {DivVariant::Regular, DivVariant::Irregular}) {
        InstructionDescriptor split = d;
        split.div_variant = v;
        split.report_group = tagged(std::string(row.group) + " (" + std::string(to_string(v)) + ")", row.category);
        descriptors_.push_back(std::move(split));
      }
      continue;
    }
    d.report_group = tagged(row.group, row.category);
    descriptors_.push_back(std::move(d));
  }
  std::sort(descriptors_.begin(), descriptors_.end(),
            [](const auto& a, const auto& b) { return sort_key(a) < sort_key(b); });

  probes_ = {
      {"clock_overhead", "Clock__overhead__u32", {{"cycles", MemoryProbeKind::ClockOverhead, false}}, false},
      {"global_ld",
       "Memory__global__u32",
       {{"device_cycles", MemoryProbeKind::GlobalMemory, true}, {"hit_cycles", MemoryProbeKind::L1Hit, false}},
       true},
      {"texture_fetch",
       "Memory__texture__u32",
       {{"device_cycles", MemoryProbeKind::TextureMemory, true},
        {"hit_cycles", MemoryProbeKind::TextureCacheHit, false}},
       false},
      {"shared_ld", "Memory__shared__u32", {{"cycles", MemoryProbeKind::SharedMemory, false}}, false},
      {"const_ld", "Memory__const__u32", {{"cycles", MemoryProbeKind::ConstantMemory, false}}, false},
  };
}

const InstructionCatalog& InstructionCatalog::instance() {
  static const InstructionCatalog catalog;
  return catalog;
}

std::vector<InstructionDescriptor> InstructionCatalog::list_instructions(
    std::optional<InstructionCategory> category, std::optional<ComputeCapability> cc) const {
  std::vector<InstructionDescriptor> out;
  for (const auto& d : descriptors_) {
    if (category && d.category != *category) continue;
    if (cc && !d.supported_on(*cc)) continue;
    out.push_back(d);
  }
  return out;
}

const InstructionDescriptor& InstructionCatalog::descriptor_for(std::string_view mnemonic, DataType type,
                                                                std::optional<DivVariant> variant) const {
  const InstructionDescriptor* match = nullptr;
  int candidates = 0;
  for (const auto& d : descriptors_) {
    if (d.mnemonic != mnemonic || d.data_type != type) continue;
    ++candidates;
    if (d.div_variant == variant) match = &d;
  }
  if (match) return *match;
  std::string key = std::string(mnemonic) + "." + std::string(to_string(type));
  if (candidates > 0 && !variant) {
    throw UnknownInstruction(key + " requires a divisor variant (regular|irregular)");
  }
  throw UnknownInstruction("no catalog entry for " + key +
                           (variant ? " (" + std::string(to_string(*variant)) + ")" : ""));
}

const InstructionDescriptor* InstructionCatalog::find_by_kernel_id(std::string_view kernel_id) const {
  for (const auto& d : descriptors_) {
    if (d.kernel_id() == kernel_id) return &d;
  }
  return nullptr;
}

const ProbeKernel* InstructionCatalog::find_probe_kernel(std::string_view kernel_id) const {
  for (const auto& p : probes_) {
    if (p.kernel_id == kernel_id) return &p;
  }
  return nullptr;
}

const ProbeKernel& InstructionCatalog::probe_kernel_for(MemoryProbeKind kind) const {
  for (const auto& p : probes_) {
    for (const auto& out : p.outputs) {
      if (out.kind == kind) return p;
    }
    if (p.uses_l1_mode && kind == MemoryProbeKind::L2Hit) return p;
  }
  throw UnknownInstruction("no probe kernel for " + std::string(to_string(kind)));
}

std::span<const std::string_view> InstructionCatalog::uncataloged_ptx_opcodes() { return kUncataloged; }

std::vector<InstructionDescriptor> list_instructions(std::optional<InstructionCategory> category,
                                                     std::optional<ComputeCapability> cc) {
  return InstructionCatalog::instance().list_instructions(category, cc);
}

const InstructionDescriptor& descriptor_for(std::string_view mnemonic, DataType type,
                                            std::optional<DivVariant> variant) {
  return InstructionCatalog::instance().descriptor_for(mnemonic, type, variant);
}

}  // namespace gpulat::isa
