#include "gpulat/ptx_validator.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <set>

namespace gpulat::ptx {

namespace {

const std::set<std::string_view> kSupportedOpcodes = {
    "ld",   "st",    "mov",  "add",    "sub",   "mul",   "mad",  "div",  "rem",   "abs",  "min",
    "max",  "and",   "or",   "not",    "xor",   "cnot",  "shl",  "shr",  "fma",   "rcp",  "sqrt",
    "rsqrt", "sin",  "cos",  "lg2",    "ex2",   "copysign", "popc", "clz", "bfe",  "bfi",  "bfind",
    "brev", "sad",   "mul24", "mad24", "addc",  "subc",  "madc", "tex",  "bar",   "membar", "ret",
};

class Reporter {
 public:
  void add(std::string code, std::string message) {
    diags_.push_back({std::move(code), std::move(message)});
  }
  std::vector<Diagnostic> take() { return std::move(diags_); }

 private:
  std::vector<Diagnostic> diags_;
};

std::string at(std::size_t index) { return "instruction " + std::to_string(index + 1); }

// Splits "%rd12" into ("%rd", 12).
std::optional<std::pair<std::string, int>> split_register(std::string_view name) {
  std::size_t digits = name.size();
  while (digits > 0 && std::isdigit(static_cast<unsigned char>(name[digits - 1]))) --digits;
  if (digits == name.size() || digits == 0) return std::nullopt;
  int index = 0;
  std::from_chars(name.data() + digits, name.data() + name.size(), index);
  return std::make_pair(std::string(name.substr(0, digits)), index);
}

const std::string* address_base(const Instruction& inst) {
  for (const auto& op : inst.operands) {
    if (const auto* a = std::get_if<Address>(&op)) return &a->base;
  }
  return nullptr;
}

bool is_barrier_pair(const std::vector<Instruction>& body, std::size_t first) {
  return first + 1 < body.size() && body[first].base() == "membar" && body[first + 1].base() == "bar";
}

}  // namespace

BlockScan find_timing_blocks(const Entry& entry) {
  BlockScan scan;
  const auto& body = entry.body;

  std::map<std::string, std::size_t> clock_def;  // register -> defining clock read
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (is_clock_read(body[i])) {
      auto written = registers_written(body[i]);
      if (!written.empty()) clock_def[written.front()] = i;
    }
  }

  std::set<std::size_t> paired;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const Instruction& inst = body[i];
    if (inst.base() != "sub" || inst.operands.size() != 3) continue;
    const auto* dst = std::get_if<Register>(&inst.operands[0]);
    const auto* end = std::get_if<Register>(&inst.operands[1]);
    const auto* start = std::get_if<Register>(&inst.operands[2]);
    if (!dst || !end || !start) continue;
    auto e = clock_def.find(end->name);
    auto s = clock_def.find(start->name);
    if (e == clock_def.end() || s == clock_def.end()) continue;

    paired.insert(e->second);
    paired.insert(s->second);
    if (e->second <= s->second) {
      scan.diagnostics.push_back({"ill-nested-timing-block",
                                  "ill-nested timing block: end-clock read " + end->name + " at " + at(e->second) +
                                      " does not follow start-clock read " + start->name + " at " + at(s->second)});
      continue;
    }
    DiscoveredBlock found;
    found.start_index = s->second;
    found.end_index = e->second;
    found.subtract_index = i;
    found.block.start_clock_reg = start->name;
    found.block.end_clock_reg = end->name;
    found.block.result_reg = dst->name;
    for (std::size_t k = s->second + 1; k < e->second; ++k) {
      Instruction timed = body[k];
      timed.blank_line_before = false;
      found.block.timed_instructions.push_back(std::move(timed));
    }
    scan.blocks.push_back(std::move(found));
  }

  for (const auto& [reg, index] : clock_def) {
    if (!paired.count(index)) {
      scan.diagnostics.push_back({"unpaired-clock-read", "clock read into " + reg + " at " + at(index) +
                                                             " is not consumed by a timing subtraction"});
    }
  }

  std::sort(scan.blocks.begin(), scan.blocks.end(),
            [](const auto& a, const auto& b) { return a.start_index < b.start_index; });
  for (std::size_t b = 1; b < scan.blocks.size(); ++b) {
    if (scan.blocks[b].start_index < scan.blocks[b - 1].end_index) {
      scan.diagnostics.push_back({"ill-nested-timing-block", "ill-nested timing block: block starting at " +
                                                                 at(scan.blocks[b].start_index) +
                                                                 " overlaps the previous block"});
    }
  }
  return scan;
}

std::vector<Diagnostic> validate_ptx(const PtxModule& module) {
  Reporter report;

  ParseDiagnostic parse_error;
  auto parsed = try_parse(module.text, &parse_error);
  if (!parsed) {
    report.add("parse-error", "line " + std::to_string(parse_error.line) + ": " + parse_error.message);
    return report.take();
  }
  const Module& m = *parsed;

  if (m.version.empty()) report.add("missing-header", "missing .version");
  if (!m.target.starts_with("sm_")) report.add("missing-header", "target '" + m.target + "' is not an sm_XX name");
  if (m.entries.size() != 1) {
    report.add("entry-count", "expected exactly one entry, found " + std::to_string(m.entries.size()));
    if (m.entries.empty()) return report.take();
  }
  const Entry& entry = m.entries.front();
  if (!module.entry_name.empty() && entry.name != module.entry_name) {
    report.add("entry-mismatch", "entry '" + entry.name + "' does not match module entry '" + module.entry_name + "'");
  }

  // Parameters declared in the text must line up with the module metadata.
  std::map<std::string, const KernelParam*> param_meta;
  if (entry.params.size() != module.params.size()) {
    report.add("param-mismatch", "entry declares " + std::to_string(entry.params.size()) + " parameters, metadata lists " +
                                     std::to_string(module.params.size()));
  }
  for (std::size_t i = 0; i < std::min(entry.params.size(), module.params.size()); ++i) {
    if (entry.params[i].name != module.params[i].name) {
      report.add("param-mismatch", "parameter " + std::to_string(i) + " is '" + entry.params[i].name +
                                       "', metadata expects '" + module.params[i].name + "'");
    }
    param_meta[entry.params[i].name] = &module.params[i];
  }

  // Register declarations.
  std::map<std::string, int> declared;
  for (const auto& decl : entry.registers) {
    if (!declared.emplace(decl.prefix, decl.count).second) {
      report.add("redeclared-register", "register prefix " + decl.prefix + " declared twice");
    }
  }
  auto is_declared = [&](const std::string& name) {
    auto split = split_register(name);
    if (!split) return false;
    auto it = declared.find(split->first);
    return it != declared.end() && split->second < it->second;
  };

  std::set<std::string> symbols;
  for (const auto& p : entry.params) symbols.insert(p.name);
  for (const auto& g : m.globals) symbols.insert(g.name);
  for (const auto& l : entry.locals) symbols.insert(l.name);

  // Dataflow over the straight-line body.
  std::set<std::string> written;
  std::set<std::string> reported_undeclared;
  std::map<std::string, std::string> pointer_param;  // register -> parameter it was loaded from
  std::map<std::string, int> stores_per_param;
  std::map<std::string, std::vector<std::size_t>> stored_values;  // value register -> store indices
  const auto& body = entry.body;

  for (std::size_t i = 0; i < body.size(); ++i) {
    const Instruction& inst = body[i];
    if (!kSupportedOpcodes.count(inst.base())) {
      report.add("unsupported-instruction", "unsupported instruction '" + inst.opcode + "' at " + at(i));
    }
    for (const auto& op : inst.operands) {
      std::string sym;
      if (const auto* a = std::get_if<Address>(&op)) sym = a->base;
      if (const auto* t = std::get_if<TextureAddress>(&op)) sym = t->handle;
      if (!sym.empty() && !sym.starts_with("%") && !symbols.count(sym)) {
        report.add("undeclared-symbol", "undeclared symbol '" + sym + "' at " + at(i));
      }
    }
    for (const auto& r : registers_read(inst)) {
      if (!is_declared(r)) {
        if (reported_undeclared.insert(r).second) {
          report.add("undeclared-register", "undeclared register " + r + " used at " + at(i));
        }
      } else if (!written.count(r)) {
        report.add("read-before-write", "register " + r + " read before written at " + at(i));
      }
    }
    for (const auto& r : registers_written(inst)) {
      if (!is_declared(r) && reported_undeclared.insert(r).second) {
        report.add("undeclared-register", "undeclared register " + r + " written at " + at(i));
      }
      written.insert(r);
    }

    if (inst.base() == "ld" && inst.has_modifier("param") && inst.operands.size() == 2) {
      const auto* dst = std::get_if<Register>(&inst.operands[0]);
      const auto* src = std::get_if<Address>(&inst.operands[1]);
      if (dst && src) pointer_param[dst->name] = src->base;
    }
    if (inst.base() == "st" && inst.has_modifier("global")) {
      const std::string* base = address_base(inst);
      if (base && pointer_param.count(*base)) {
        const std::string& pname = pointer_param[*base];
        ++stores_per_param[pname];
        auto meta = param_meta.find(pname);
        if (meta != param_meta.end() && meta->second->role != ParamRole::CycleOutput &&
            meta->second->role != ParamRole::SinkOutput) {
          report.add("input-written", "input parameter " + pname + " is stored to at " + at(i));
        }
      }
      if (inst.operands.size() == 2) {
        if (const auto* v = std::get_if<Register>(&inst.operands[1])) stored_values[v->name].push_back(i);
      }
    }
  }
  if (body.empty() || body.back().base() != "ret") report.add("missing-ret", "entry body does not end with ret");

  for (const auto& p : module.params) {
    if (p.role != ParamRole::CycleOutput && p.role != ParamRole::SinkOutput) continue;
    int n = stores_per_param.count(p.name) ? stores_per_param[p.name] : 0;
    if (n == 0) report.add("output-not-stored", "output parameter " + p.name + " is never stored");
    if (n > 1) report.add("output-stored-multiple", "output parameter " + p.name + " stored " + std::to_string(n) + " times");
  }

  // Timing blocks.
  BlockScan scan = find_timing_blocks(entry);
  for (auto& d : scan.diagnostics) report.add(d.code, d.message);

  for (const auto& found : scan.blocks) {
    const std::string name = "timing block at " + at(found.start_index);
    if (found.start_index < 2 || !is_barrier_pair(body, found.start_index - 2)) {
      report.add("missing-barrier", name + " is not preceded by membar + bar.sync");
    }
    if (!is_barrier_pair(body, found.end_index + 1)) {
      report.add("missing-barrier", name + " is not followed by membar + bar.sync");
    }
    if (!stored_values.count(found.block.result_reg)) {
      report.add("timing-result-not-stored", name + ": delta " + found.block.result_reg + " is never stored");
    }

    if (found.block.timed_instructions.empty()) continue;
    std::set<std::string> timed_dest;
    for (const auto& r : registers_written(found.block.timed_instructions.back())) timed_dest.insert(r);
    bool dependent = false;
    bool dependent_stored = false;
    for (std::size_t k = found.end_index + 1; k < body.size(); ++k) {
      if (body[k].base() == "st") continue;
      auto reads = registers_read(body[k]);
      if (std::none_of(reads.begin(), reads.end(), [&](const auto& r) { return timed_dest.count(r) > 0; })) continue;
      dependent = true;
      for (const auto& w : registers_written(body[k])) {
        if (stored_values.count(w)) dependent_stored = true;
      }
    }
    if (!dependent) {
      report.add("missing-dependent-operation", name + ": timed result is not consumed by a dependent operation");
    } else if (!dependent_stored) {
      report.add("dependent-result-not-stored", name + ": dependent operation result is never stored");
    }
  }

  if (!module.timing_blocks.empty() || !scan.blocks.empty()) {
    if (module.timing_blocks.size() != scan.blocks.size()) {
      report.add("metadata-mismatch", "metadata lists " + std::to_string(module.timing_blocks.size()) +
                                          " timing blocks, text contains " + std::to_string(scan.blocks.size()));
    } else {
      for (std::size_t b = 0; b < scan.blocks.size(); ++b) {
        const auto& expect = module.timing_blocks[b];
        const auto& got = scan.blocks[b].block;
        if (expect.timed_instructions != got.timed_instructions || expect.start_clock_reg != got.start_clock_reg ||
            expect.end_clock_reg != got.end_clock_reg || expect.result_reg != got.result_reg) {
          report.add("metadata-mismatch", "timing block " + std::to_string(b + 1) + " differs from module metadata");
        }
      }
    }
  }
  return report.take();
}

}  // namespace gpulat::ptx
