#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Structural model of the PTX subset the generator emits. The printer and
// parser are inverses: parse(print(m)) == m for every module built here.
namespace gpulat::ptx {

struct Register {
  std::string name;  // "%r3"
  bool operator==(const Register&) const = default;
};

struct SpecialRegister {
  std::string name;  // "%clock"
  bool operator==(const SpecialRegister&) const = default;
};

struct Immediate {
  std::string text;  // "8", "-1", "0f41000000"
  bool operator==(const Immediate&) const = default;
};

// [base], [base+offset]; base is a register or a symbol (parameter or
// module/shared variable).
struct Address {
  std::string base;
  std::int64_t offset = 0;
  bool operator==(const Address&) const = default;
};

// {%r1, %r2, %r3, %r4}
struct VectorOperand {
  std::vector<std::string> registers;
  bool operator==(const VectorOperand&) const = default;
};

// [handle, {coords}] as used by tex.
struct TextureAddress {
  std::string handle;
  std::vector<std::string> coordinates;
  bool operator==(const TextureAddress&) const = default;
};

using Operand = std::variant<Register, SpecialRegister, Immediate, Address, VectorOperand, TextureAddress>;

struct Instruction {
  std::string opcode;  // full dotted opcode, "ld.global.u32"
  std::vector<Operand> operands;
  bool blank_line_before = false;  // layout only

  std::string_view base() const;                 // "ld"
  bool has_modifier(std::string_view m) const;   // has_modifier("global")
  std::vector<std::string> modifiers() const;    // {"global", "u32"}

  bool operator==(const Instruction&) const = default;
};

struct RegisterDecl {
  std::string type;    // "b32"
  std::string prefix;  // "%r"
  int count = 0;       // declares prefix0 .. prefix(count-1)
  bool operator==(const RegisterDecl&) const = default;
};

struct VariableDecl {
  std::string space;  // "const", "shared", "global"
  int align = 0;      // 0: no .align
  std::string type;   // "b32"
  std::string name;
  std::optional<int> array_size;
  std::vector<std::string> initializer;
  bool operator==(const VariableDecl&) const = default;
};

struct Param {
  std::string type;  // "u64"
  std::string name;
  bool operator==(const Param&) const = default;
};

struct Entry {
  bool visible = true;
  std::string name;
  std::vector<Param> params;
  std::vector<RegisterDecl> registers;
  std::vector<VariableDecl> locals;
  std::vector<Instruction> body;
  bool operator==(const Entry&) const = default;
};

struct Module {
  std::vector<std::string> comments;  // leading "//" lines, without the slashes
  std::string version;                // "6.4"
  std::string target;                 // "sm_70"
  int address_size = 64;
  std::vector<VariableDecl> globals;
  std::vector<Entry> entries;
  bool operator==(const Module&) const = default;
};

bool is_special_register(std::string_view name);

// Registers read and written by an instruction. Addresses contribute their
// register base to the read set; st and tex source operands are reads.
std::vector<std::string> registers_read(const Instruction& inst);
std::vector<std::string> registers_written(const Instruction& inst);

// True for `mov.u32 %rX, %clock` (or %clock64).
bool is_clock_read(const Instruction& inst);

std::string print(const Module& module);
std::string print(const Instruction& inst);
std::string print(const Operand& operand);

struct ParseDiagnostic {
  std::size_t line = 0;
  std::string message;
};

// Throws ParseError with a "line N:" prefix on malformed input.
Module parse(std::string_view text);

// Non-throwing variant used by the validator.
std::optional<Module> try_parse(std::string_view text, ParseDiagnostic* error);

}  // namespace gpulat::ptx
