#include "gpulat/ptx_ast.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace gpulat::ptx {

namespace {

constexpr std::array<std::string_view, 14> kSpecialRegisters = {
    "%clock",  "%clock64", "%tid.x",   "%tid.y", "%tid.z",  "%ntid.x",        "%ntid.y",
    "%ntid.z", "%laneid",  "%warpid",  "%smid",  "%nsmid", "%globaltimer",   "%ctaid.x",
};

void append_register_names(const Operand& op, std::vector<std::string>& out) {
  std::visit(
      [&](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, Register>) {
          out.push_back(v.name);
        } else if constexpr (std::is_same_v<V, Address>) {
          if (v.base.starts_with("%")) out.push_back(v.base);
        } else if constexpr (std::is_same_v<V, VectorOperand>) {
          out.insert(out.end(), v.registers.begin(), v.registers.end());
        } else if constexpr (std::is_same_v<V, TextureAddress>) {
          if (v.handle.starts_with("%")) out.push_back(v.handle);
          out.insert(out.end(), v.coordinates.begin(), v.coordinates.end());
        }
      },
      op);
}

bool writes_nothing(std::string_view base) {
  return base == "st" || base == "bar" || base == "membar" || base == "ret";
}

std::string join_registers(const std::vector<std::string>& regs) {
  std::string out;
  for (std::size_t i = 0; i < regs.size(); ++i) {
    if (i) out += ", ";
    out += regs[i];
  }
  return out;
}

}  // namespace

std::string_view Instruction::base() const {
  std::string_view op = opcode;
  return op.substr(0, op.find('.'));
}

std::vector<std::string> Instruction::modifiers() const {
  std::vector<std::string> mods;
  std::string_view op = opcode;
  std::size_t pos = op.find('.');
  while (pos != std::string_view::npos) {
    std::size_t next = op.find('.', pos + 1);
    mods.emplace_back(op.substr(pos + 1, next == std::string_view::npos ? op.npos : next - pos - 1));
    pos = next;
  }
  return mods;
}

bool Instruction::has_modifier(std::string_view m) const {
  auto mods = modifiers();
  return std::find(mods.begin(), mods.end(), m) != mods.end();
}

bool is_special_register(std::string_view name) {
  return std::find(kSpecialRegisters.begin(), kSpecialRegisters.end(), name) != kSpecialRegisters.end();
}

std::vector<std::string> registers_read(const Instruction& inst) {
  std::vector<std::string> out;
  const std::string_view base = inst.base();
  for (std::size_t i = 0; i < inst.operands.size(); ++i) {
    if (i == 0 && !writes_nothing(base)) continue;  // destination
    append_register_names(inst.operands[i], out);
  }
  return out;
}

std::vector<std::string> registers_written(const Instruction& inst) {
  std::vector<std::string> out;
  if (writes_nothing(inst.base()) || inst.operands.empty()) return out;
  append_register_names(inst.operands.front(), out);
  return out;
}

bool is_clock_read(const Instruction& inst) {
  if (inst.base() != "mov" || inst.operands.size() != 2) return false;
  const auto* src = std::get_if<SpecialRegister>(&inst.operands[1]);
  return src && (src->name == "%clock" || src->name == "%clock64");
}

std::string print(const Operand& operand) {
  return std::visit(
      [](const auto& v) -> std::string {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, Register> || std::is_same_v<V, SpecialRegister>) {
          return v.name;
        } else if constexpr (std::is_same_v<V, Immediate>) {
          return v.text;
        } else if constexpr (std::is_same_v<V, Address>) {
          std::string s = "[" + v.base;
          if (v.offset > 0) s += "+" + std::to_string(v.offset);
          if (v.offset < 0) s += std::to_string(v.offset);
          return s + "]";
        } else if constexpr (std::is_same_v<V, VectorOperand>) {
          return "{" + join_registers(v.registers) + "}";
        } else {
          return "[" + v.handle + ", {" + join_registers(v.coordinates) + "}]";
        }
      },
      operand);
}

std::string print(const Instruction& inst) {
  std::string line = inst.opcode;
  if (!inst.operands.empty()) {
    if (line.size() < 15) line.resize(15, ' ');
    line += ' ';
    for (std::size_t i = 0; i < inst.operands.size(); ++i) {
      if (i) line += ", ";
      line += print(inst.operands[i]);
    }
  }
  return line + ";";
}

namespace {

std::string print_variable(const VariableDecl& v) {
  std::string s = "." + v.space;
  if (v.align > 0) s += " .align " + std::to_string(v.align);
  s += " ." + v.type + " " + v.name;
  if (v.array_size) s += "[" + std::to_string(*v.array_size) + "]";
  if (!v.initializer.empty()) {
    s += " = {";
    for (std::size_t i = 0; i < v.initializer.size(); ++i) {
      if (i) s += ", ";
      s += v.initializer[i];
    }
    s += "}";
  }
  return s + ";";
}

}  // namespace

std::string print(const Module& module) {
  std::ostringstream os;
  for (const auto& c : module.comments) os << "//" << c << "\n";
  if (!module.comments.empty()) os << "\n";
  os << ".version " << module.version << "\n";
  os << ".target " << module.target << "\n";
  os << ".address_size " << module.address_size << "\n";
  if (!module.globals.empty()) os << "\n";
  for (const auto& g : module.globals) os << print_variable(g) << "\n";

  for (const auto& e : module.entries) {
    os << "\n" << (e.visible ? ".visible " : "") << ".entry " << e.name << "(";
    for (std::size_t i = 0; i < e.params.size(); ++i) {
      os << (i ? ",\n" : "\n") << "    .param ." << e.params[i].type << " " << e.params[i].name;
    }
    os << (e.params.empty() ? ")\n" : "\n)\n");
    os << "{\n";
    for (const auto& r : e.registers) {
      os << "    .reg ." << r.type << " " << r.prefix << "<" << r.count << ">;\n";
    }
    for (const auto& l : e.locals) os << "    " << print_variable(l) << "\n";
    for (std::size_t i = 0; i < e.body.size(); ++i) {
      const auto& inst = e.body[i];
      if (inst.blank_line_before) os << "\n";
      os << "    " << print(inst) << "\n";
    }
    os << "}\n";
  }
  return os.str();
}

}  // namespace gpulat::ptx
