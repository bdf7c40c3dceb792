#include <cctype>
#include <charconv>

#include "gpulat/errors.hpp"
#include "gpulat/ptx_ast.hpp"

namespace gpulat::ptx {

namespace {

struct Token {
  enum Kind { Word, Punct, End } kind = End;
  std::string text;
  std::size_t line = 0;
  bool blank_line_before = false;
};

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$' || c == '%';
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run(std::vector<std::string>& leading_comments) {
    std::vector<Token> tokens;
    bool blank = false;
    bool line_has_content = false;
    bool at_top = true;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        if (!line_has_content && !tokens.empty()) blank = true;
        line_has_content = false;
        ++line_;
        ++pos_;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        std::size_t end = text_.find('\n', pos_);
        if (end == std::string_view::npos) end = text_.size();
        if (at_top) leading_comments.emplace_back(text_.substr(pos_ + 2, end - pos_ - 2));
        line_has_content = true;
        pos_ = end;
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        std::size_t end = text_.find("*/", pos_ + 2);
        if (end == std::string_view::npos) fail("unterminated block comment");
        for (std::size_t i = pos_; i < end; ++i) {
          if (text_[i] == '\n') ++line_;
        }
        pos_ = end + 2;
        continue;
      }
      at_top = false;
      Token t;
      t.line = line_;
      t.blank_line_before = blank;
      blank = false;
      line_has_content = true;
      if (is_word_char(c)) {
        std::size_t start = pos_;
        while (pos_ < text_.size() && is_word_char(text_[pos_])) ++pos_;
        t.kind = Token::Word;
        t.text = std::string(text_.substr(start, pos_ - start));
      } else if (std::string_view("(){}[],;<>=+-@:").find(c) != std::string_view::npos) {
        t.kind = Token::Punct;
        t.text = std::string(1, c);
        ++pos_;
      } else {
        fail(std::string("unexpected character '") + c + "'");
      }
      tokens.push_back(std::move(t));
    }
    Token end;
    end.line = line_;
    tokens.push_back(end);
    return tokens;
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("line " + std::to_string(line_) + ": " + msg);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<std::string> comments)
      : tokens_(std::move(tokens)) {
    module_.comments = std::move(comments);
  }

  Module run() {
    bool seen_version = false;
    bool seen_target = false;
    while (!at_end()) {
      const Token& t = peek();
      if (t.text == ".version") {
        next();
        module_.version = expect_word("version number");
        seen_version = true;
      } else if (t.text == ".target") {
        next();
        module_.target = expect_word("target architecture");
        seen_target = true;
      } else if (t.text == ".address_size") {
        next();
        module_.address_size = to_int(expect_word("address size"));
      } else if (t.text == ".visible" || t.text == ".entry") {
        module_.entries.push_back(parse_entry());
      } else if (t.text == ".const" || t.text == ".shared" || t.text == ".global") {
        module_.globals.push_back(parse_variable());
      } else {
        fail(t, "unexpected '" + t.text + "' at module scope");
      }
    }
    if (!seen_version) fail(peek(), "missing .version directive");
    if (!seen_target) fail(peek(), "missing .target directive");
    return std::move(module_);
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& next() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }
  bool at_end() const { return peek().kind == Token::End; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError("line " + std::to_string(t.line) + ": " + msg);
  }

  bool accept(std::string_view punct) {
    if (peek().kind == Token::Punct && peek().text == punct) {
      next();
      return true;
    }
    return false;
  }

  void expect(std::string_view punct) {
    if (!accept(punct)) fail(peek(), "expected '" + std::string(punct) + "', got '" + peek().text + "'");
  }

  std::string expect_word(std::string_view what) {
    if (peek().kind != Token::Word) fail(peek(), "expected " + std::string(what));
    return next().text;
  }

  std::string expect_directive(std::string_view what) {
    std::string w = expect_word(what);
    if (!w.starts_with(".")) fail(peek(), "expected " + std::string(what) + ", got '" + w + "'");
    return w.substr(1);
  }

  int to_int(const std::string& text) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) fail(peek(), "expected integer, got '" + text + "'");
    return value;
  }

  std::string parse_literal() {
    std::string sign = accept("-") ? "-" : "";
    return sign + expect_word("literal");
  }

  VariableDecl parse_variable() {
    VariableDecl v;
    v.space = expect_directive("state space");
    if (peek().text == ".align") {
      next();
      v.align = to_int(expect_word("alignment"));
    }
    v.type = expect_directive("type");
    v.name = expect_word("variable name");
    if (accept("[")) {
      v.array_size = to_int(expect_word("array size"));
      expect("]");
    }
    if (accept("=")) {
      if (accept("{")) {
        do {
          v.initializer.push_back(parse_literal());
        } while (accept(","));
        expect("}");
      } else {
        v.initializer.push_back(parse_literal());
      }
    }
    expect(";");
    return v;
  }

  Entry parse_entry() {
    Entry e;
    e.visible = false;
    if (peek().text == ".visible") {
      next();
      e.visible = true;
    }
    if (expect_word(".entry") != ".entry") fail(peek(), "expected .entry");
    e.name = expect_word("entry name");
    expect("(");
    if (!accept(")")) {
      do {
        if (expect_word(".param") != ".param") fail(peek(), "expected .param");
        Param p;
        p.type = expect_directive("parameter type");
        p.name = expect_word("parameter name");
        e.params.push_back(std::move(p));
      } while (accept(","));
      expect(")");
    }
    expect("{");
    while (!accept("}")) {
      if (at_end()) fail(peek(), "unterminated entry body");
      const Token& t = peek();
      if (t.text == ".reg") {
        next();
        RegisterDecl r;
        r.type = expect_directive("register type");
        r.prefix = expect_word("register prefix");
        expect("<");
        r.count = to_int(expect_word("register count"));
        expect(">");
        expect(";");
        e.registers.push_back(std::move(r));
      } else if (t.text == ".shared" || t.text == ".local") {
        e.locals.push_back(parse_variable());
      } else if (t.kind == Token::Punct && t.text == "@") {
        fail(t, "predicated instructions are not supported");
      } else if (t.kind == Token::Word && !t.text.starts_with(".")) {
        e.body.push_back(parse_instruction());
      } else {
        fail(t, "unexpected '" + t.text + "' in entry body");
      }
    }
    return e;
  }

  std::vector<std::string> parse_register_list() {
    std::vector<std::string> regs;
    do {
      regs.push_back(expect_word("register"));
    } while (accept(","));
    return regs;
  }

  Operand parse_operand() {
    if (accept("[")) {
      std::string base = expect_word("address base");
      if (accept(",")) {
        expect("{");
        TextureAddress ta{base, parse_register_list()};
        expect("}");
        expect("]");
        return ta;
      }
      Address addr{base, 0};
      if (accept("+")) {
        addr.offset = to_int(expect_word("offset"));
      } else if (accept("-")) {
        addr.offset = -to_int(expect_word("offset"));
      }
      expect("]");
      return addr;
    }
    if (accept("{")) {
      VectorOperand v{parse_register_list()};
      expect("}");
      return v;
    }
    if (accept("-")) return Immediate{"-" + expect_word("immediate")};
    std::string w = expect_word("operand");
    if (w.starts_with("%")) {
      if (is_special_register(w)) return SpecialRegister{w};
      return Register{w};
    }
    return Immediate{w};
  }

  Instruction parse_instruction() {
    Instruction inst;
    inst.blank_line_before = peek().blank_line_before;
    inst.opcode = next().text;
    if (!accept(";")) {
      do {
        inst.operands.push_back(parse_operand());
      } while (accept(","));
      expect(";");
    }
    return inst;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  Module module_;
};

}  // namespace

Module parse(std::string_view text) {
  std::vector<std::string> comments;
  auto tokens = Lexer(text).run(comments);
  return Parser(std::move(tokens), std::move(comments)).run();
}

std::optional<Module> try_parse(std::string_view text, ParseDiagnostic* error) {
  try {
    return parse(text);
  } catch (const ParseError& e) {
    if (error) {
      std::string msg = e.what();
      std::size_t line = 0;
      if (msg.starts_with("line ")) {
        line = std::strtoul(msg.c_str() + 5, nullptr, 10);
        msg = msg.substr(msg.find(':') + 2);
      }
      *error = {line, msg};
    }
    return std::nullopt;
  }
}

}  // namespace gpulat::ptx
