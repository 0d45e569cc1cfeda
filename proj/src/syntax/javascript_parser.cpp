// Copyright 2026 The Forge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "forge/syntax/tree.hpp"

namespace forge::syntax {

namespace {

enum class Tok { kIdent, kPrivate, kNumber, kString, kTemplate, kRegex, kPunct, kEnd };

struct Token {
  Tok kind;
  std::uint32_t begin;
  std::uint32_t end;
  bool newline_before;
};

bool ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80 || c == '\\';
}
bool ident_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80 || c == '\\';
}

constexpr std::array<std::string_view, 54> kPunctuators = {
    ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "?\?=",
    "=>",   "==",  "!=",  "<=",  ">=",  "&&",  "||",  "??",  "?.",  "++",  "--",
    "+=",   "-=",  "*=",  "/=",  "%=",  "&=",  "|=",  "^=",  "**",  "<<",  ">>",
    "{",    "}",   "(",   ")",   "[",   "]",   ";",   ",",   "<",   ">",   "+",
    "-",    "*",   "/",   "%",   "&",   "|",   "^",   "!",   "~",   "?"};

constexpr std::array<std::string_view, 37> kReserved = {
    "break",  "case",     "catch",  "class",  "const",   "continue", "debugger",
    "default", "delete",  "do",     "else",   "enum",    "export",   "extends",
    "false",  "finally",  "for",    "function", "if",    "import",   "in",
    "instanceof", "new",  "null",   "return", "super",   "switch",   "this",
    "throw",  "true",     "try",    "typeof", "var",     "void",     "while",
    "with",   "yield"};

bool is_reserved(std::string_view w) {
  return std::find(kReserved.begin(), kReserved.end(), w) != kReserved.end();
}

// Skips a string literal starting at `p` (on the quote). Returns the offset
// just past the closing quote, or `end` when unterminated.
std::uint32_t skip_quoted(const std::string& s, std::uint32_t p, std::uint32_t end) {
  const char q = s[p++];
  while (p < end && s[p] != q && s[p] != '\n') p += s[p] == '\\' ? 2 : 1;
  return std::min(p + 1, end);
}

std::uint32_t skip_template(const std::string& s, std::uint32_t p, std::uint32_t end,
                            bool* ok);

// From just after `${`, returns the offset of the matching `}` or `end`.
std::uint32_t skip_braced_code(const std::string& s, std::uint32_t p, std::uint32_t end,
                               bool* ok) {
  int depth = 0;
  char last = '(';
  while (p < end) {
    const char c = s[p];
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '/') last = c;
    if (c == '/' && p + 1 < end && s[p + 1] != '/' && s[p + 1] != '*' &&
        std::strchr("(,=:[!&|?{};+-*%<>~^", last) != nullptr) {
      bool in_class = false;
      for (++p; p < end && s[p] != '\n'; ++p) {
        if (s[p] == '\\') {
          ++p;
        } else if (s[p] == '[') {
          in_class = true;
        } else if (s[p] == ']') {
          in_class = false;
        } else if (s[p] == '/' && !in_class) {
          break;
        }
      }
      last = ')';
      ++p;
      continue;
    }
    if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (depth == 0) return p;
      --depth;
    } else if (c == '\'' || c == '"') {
      p = skip_quoted(s, p, end);
      continue;
    } else if (c == '`') {
      p = skip_template(s, p, end, ok);
      continue;
    } else if (c == '/' && p + 1 < end && s[p + 1] == '/') {
      while (p < end && s[p] != '\n') ++p;
      continue;
    } else if (c == '/' && p + 1 < end && s[p + 1] == '*') {
      const auto close = s.find("*/", p + 2);
      p = close == std::string::npos || close >= end ? end : static_cast<std::uint32_t>(close + 2);
      continue;
    }
    ++p;
  }
  *ok = false;
  return end;
}

// From the opening backtick, returns the offset just past the closing one.
std::uint32_t skip_template(const std::string& s, std::uint32_t p, std::uint32_t end,
                            bool* ok) {
  ++p;
  while (p < end) {
    const char c = s[p];
    if (c == '\\') {
      p += 2;
      continue;
    }
    if (c == '`') return p + 1;
    if (c == '$' && p + 1 < end && s[p + 1] == '{') {
      p = skip_braced_code(s, p + 2, end, ok) + 1;
      continue;
    }
    ++p;
  }
  *ok = false;
  return end;
}

class Lexer {
 public:
  Lexer(Tree& tree, std::uint32_t begin, std::uint32_t end)
      : tree_(tree), s_(tree.source()), pos_(begin), end_(end) {}

  std::vector<Token> run() {
    if (s_.compare(pos_, 2, "#!") == 0) {
      while (pos_ < end_ && s_[pos_] != '\n') ++pos_;
    }
    while (pos_ < end_) {
      const unsigned char c = static_cast<unsigned char>(s_[pos_]);
      if (c == '\n') {
        newline_ = true;
        ++pos_;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f') {
        ++pos_;
        continue;
      }
      if (c == 0xC2 && pos_ + 1 < end_ && static_cast<unsigned char>(s_[pos_ + 1]) == 0xA0) {
        pos_ += 2;
        continue;
      }
      if (c == 0xEF && s_.compare(pos_, 3, "\xEF\xBB\xBF") == 0) {
        pos_ += 3;
        continue;
      }
      if (c == 0xE2 && (s_.compare(pos_, 3, "\xE2\x80\xA8") == 0 ||
                        s_.compare(pos_, 3, "\xE2\x80\xA9") == 0)) {
        newline_ = true;
        pos_ += 3;
        continue;
      }
      if (c == '/' && pos_ + 1 < end_ && s_[pos_ + 1] == '/') {
        while (pos_ < end_ && s_[pos_] != '\n') ++pos_;
        continue;
      }
      if (c == '/' && pos_ + 1 < end_ && s_[pos_ + 1] == '*') {
        const auto close = s_.find("*/", pos_ + 2);
        if (close == std::string::npos || close + 2 > end_) {
          tree_.report(pos_, "unterminated comment");
          pos_ = end_;
          continue;
        }
        if (s_.find('\n', pos_) < close) newline_ = true;
        pos_ = static_cast<std::uint32_t>(close + 2);
        continue;
      }
      const std::uint32_t b = pos_;
      if (ident_start(c)) {
        scan_ident();
        emit(Tok::kIdent, b);
      } else if (c == '#' && pos_ + 1 < end_ &&
                 ident_start(static_cast<unsigned char>(s_[pos_ + 1]))) {
        ++pos_;
        scan_ident();
        emit(Tok::kPrivate, b);
      } else if (std::isdigit(c) ||
                 (c == '.' && pos_ + 1 < end_ &&
                  std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
        scan_number();
        emit(Tok::kNumber, b);
      } else if (c == '"' || c == '\'') {
        pos_ = skip_quoted(s_, pos_, end_);
        check_escapes(b, pos_);
        if (pos_ <= b + 1 || s_[pos_ - 1] != static_cast<char>(c)) {
          tree_.report(b, "unterminated string literal");
        }
        emit(Tok::kString, b);
      } else if (c == '`') {
        bool ok = true;
        pos_ = skip_template(s_, pos_, end_, &ok);
        if (!ok) tree_.report(b, "unterminated template literal");
        emit(Tok::kTemplate, b);
      } else if (c == '/' && regex_allowed()) {
        scan_regex();
        emit(Tok::kRegex, b);
      } else {
        scan_punct();
      }
    }
    tokens_.push_back({Tok::kEnd, end_, end_, true});
    return std::move(tokens_);
  }

 private:
  void emit(Tok kind, std::uint32_t b) {
    tokens_.push_back({kind, b, pos_, newline_});
    newline_ = false;
  }

  void check_escapes(std::uint32_t b, std::uint32_t e) {
    for (std::uint32_t p = b + 1; p + 1 < e; ++p) {
      if (s_[p] != '\\') continue;
      const char kind = s_[p + 1];
      bool ok = true;
      auto hex = [&](std::uint32_t at) {
        return at < e && std::isxdigit(static_cast<unsigned char>(s_[at])) != 0;
      };
      if (kind == 'x') {
        ok = hex(p + 2) && hex(p + 3);
      } else if (kind == 'u' && p + 2 < e && s_[p + 2] == '{') {
        std::uint32_t q = p + 3;
        while (hex(q)) ++q;
        ok = q > p + 3 && q < e && s_[q] == '}';
      } else if (kind == 'u') {
        ok = hex(p + 2) && hex(p + 3) && hex(p + 4) && hex(p + 5);
      }
      if (!ok) tree_.report(p, "invalid escape sequence");
      ++p;
    }
  }

  void scan_ident() {
    while (pos_ < end_ && ident_char(static_cast<unsigned char>(s_[pos_]))) {
      pos_ += s_[pos_] == '\\' ? 2 : 1;
    }
    pos_ = std::min(pos_, end_);
  }

  void scan_number() {
    auto run = [&](auto pred) {
      while (pos_ < end_ && (pred(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    };
    if (s_[pos_] == '0' && pos_ + 1 < end_ && std::strchr("xXoObB", s_[pos_ + 1]) != nullptr &&
        s_[pos_ + 1] != '\0') {
      pos_ += 2;
      run([](unsigned char ch) { return std::isxdigit(ch) != 0; });
    } else {
      run([](unsigned char ch) { return std::isdigit(ch) != 0; });
      if (pos_ < end_ && s_[pos_] == '.') {
        ++pos_;
        run([](unsigned char ch) { return std::isdigit(ch) != 0; });
      }
      if (pos_ < end_ && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
        std::uint32_t p = pos_ + 1;
        if (p < end_ && (s_[p] == '+' || s_[p] == '-')) ++p;
        if (p < end_ && std::isdigit(static_cast<unsigned char>(s_[p]))) {
          pos_ = p;
          run([](unsigned char ch) { return std::isdigit(ch) != 0; });
        }
      }
    }
    if (pos_ < end_ && s_[pos_] == 'n') ++pos_;
  }

  bool regex_allowed() const {
    if (tokens_.empty()) return true;
    const Token& prev = tokens_.back();
    const std::string_view w(s_.data() + prev.begin, prev.end - prev.begin);
    switch (prev.kind) {
      case Tok::kNumber:
      case Tok::kString:
      case Tok::kTemplate:
      case Tok::kRegex:
      case Tok::kPrivate:
        return false;
      case Tok::kIdent: {
        static constexpr std::array<std::string_view, 14> kBefore = {
            "return", "typeof", "instanceof", "in",   "of",    "new",   "delete",
            "void",   "throw",  "case",       "do",   "else",  "yield", "await"};
        return std::find(kBefore.begin(), kBefore.end(), w) != kBefore.end();
      }
      case Tok::kPunct:
        return w != ")" && w != "]" && w != "}" && w != "++" && w != "--";
      default:
        return true;
    }
  }

  void scan_regex() {
    const std::uint32_t b = pos_;
    ++pos_;
    bool in_class = false;
    while (pos_ < end_) {
      const char c = s_[pos_];
      if (c == '\n') break;
      if (c == '\\') {
        pos_ += 2;
        continue;
      }
      if (c == '[') in_class = true;
      if (c == ']') in_class = false;
      if (c == '/' && !in_class) {
        ++pos_;
        while (pos_ < end_ && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        return;
      }
      ++pos_;
    }
    pos_ = std::min(pos_, end_);
    tree_.report(b, "unterminated regular expression");
  }

  void scan_punct() {
    for (std::string_view p : kPunctuators) {
      if (pos_ + p.size() <= end_ && s_.compare(pos_, p.size(), p) == 0) {
        // `?.` followed by a digit is a conditional with a decimal.
        if (p == "?." && pos_ + 2 < end_ &&
            std::isdigit(static_cast<unsigned char>(s_[pos_ + 2]))) {
          continue;
        }
        const std::uint32_t b = pos_;
        pos_ += static_cast<std::uint32_t>(p.size());
        emit(Tok::kPunct, b);
        return;
      }
    }
    const std::uint32_t b = pos_;
    if (s_[pos_] == '.' || s_[pos_] == ':' || s_[pos_] == '=' || s_[pos_] == '@') {
      ++pos_;
      emit(Tok::kPunct, b);
      return;
    }
    tree_.report(pos_, std::string("invalid character '") + s_[pos_] + "'");
    ++pos_;
  }

  Tree& tree_;
  const std::string& s_;
  std::uint32_t pos_;
  std::uint32_t end_;
  bool newline_ = false;
  std::vector<Token> tokens_;
};

class Parser {
 public:
  Parser(Tree& tree, std::vector<Token> tokens)
      : t_(tree), s_(tree.source()), toks_(std::move(tokens)) {}

  NodeId parse_program() {
    NodeId program = t_.add("program", 0, static_cast<std::uint32_t>(s_.size()));
    while (peek().kind != Tok::kEnd) {
      if (is_p("}")) {
        t_.report(peek().begin, "unexpected '}'");
        attach(program, t_.add(kErrorType, peek().begin, peek().end));
        take();
        continue;
      }
      statement_into(program);
    }
    return program;
  }

  NodeId parse_embedded_expression() {
    NodeId e = expression();
    if (peek().kind != Tok::kEnd) fail("unexpected token in template substitution");
    return e;
  }

 private:
  // ---- token helpers -----------------------------------------------------
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(i_ + k, toks_.size() - 1)];
  }
  std::string_view text(const Token& tok) const {
    return std::string_view(s_).substr(tok.begin, tok.end - tok.begin);
  }
  bool is_p(std::string_view p, std::size_t k = 0) const {
    return peek(k).kind == Tok::kPunct && text(peek(k)) == p;
  }
  bool is_kw(std::string_view w, std::size_t k = 0) const {
    return peek(k).kind == Tok::kIdent && text(peek(k)) == w;
  }
  const Token& take() {
    const Token& tok = toks_[i_];
    if (i_ + 1 < toks_.size()) ++i_;
    return tok;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseFailure{peek().begin, msg}; }
  const Token& expect_p(std::string_view p) {
    if (!is_p(p)) fail("expected '" + std::string(p) + "'");
    return take();
  }
  void expect_kw(std::string_view w) {
    if (!is_kw(w)) fail("expected '" + std::string(w) + "'");
    take();
  }
  static std::string brief(std::string_view w) {
    std::string out(w.substr(0, std::min<std::size_t>(w.find('\n'), 24)));
    return out;
  }
  std::uint32_t prev_end() const { return i_ > 0 ? toks_[i_ - 1].end : 0; }
  NodeId leaf(std::string_view type, const Token& tok) { return t_.add(type, tok.begin, tok.end); }
  NodeId node(std::string_view type, std::uint32_t begin) { return t_.add(type, begin, begin); }
  void close(NodeId n) { t_.set_span(n, t_.node(n).begin, prev_end()); }
  void attach(NodeId parent, NodeId child, std::string_view field = {}) {
    t_.attach(parent, child, field);
  }

  bool is_identifier_token(std::size_t k = 0) const {
    return peek(k).kind == Tok::kIdent && !is_reserved(text(peek(k)));
  }

  NodeId identifier() {
    if (!is_identifier_token()) fail("expected identifier");
    return leaf("identifier", take());
  }

  void semicolon() {
    if (is_p(";")) {
      take();
      return;
    }
    if (is_p("}") || peek().kind == Tok::kEnd || peek().newline_before) return;
    fail("missing semicolon");
  }

  struct NoInGuard {
    NoInGuard(bool& flag, bool value) : flag_(flag), saved_(flag) { flag_ = value; }
    ~NoInGuard() { flag_ = saved_; }
    bool& flag_;
    bool saved_;
  };

  // ---- statements --------------------------------------------------------
  void statement_into(NodeId parent) {
    const std::size_t start = i_;
    try {
      attach(parent, statement());
    } catch (const ParseFailure& f) {
      t_.report(f.offset, f.message);
      recover(start, parent);
    }
  }

  void recover(std::size_t start, NodeId parent) {
    const std::uint32_t begin = toks_[start].begin;
    if (i_ == start && peek().kind != Tok::kEnd) take();
    int depth = 0;
    while (peek().kind != Tok::kEnd) {
      if (depth == 0 && peek().newline_before && i_ > start + 1) break;
      if (is_p("(") || is_p("[") || is_p("{")) ++depth;
      if (is_p(")") || is_p("]") || is_p("}")) {
        if (depth == 0) break;
        --depth;
      }
      const bool semi = is_p(";") && depth == 0;
      take();
      if (semi) break;
    }
    attach(parent, t_.add(kErrorType, begin, std::max(begin, prev_end())));
  }

  bool let_declaration() const {
    if (!is_kw("let")) return false;
    return peek(1).kind == Tok::kIdent || is_p("[", 1) || is_p("{", 1);
  }

  NodeId statement() {
    const Token& tok = peek();
    if (tok.kind == Tok::kPunct) {
      if (is_p("{")) return statement_block();
      if (is_p(";")) return leaf("empty_statement", take());
    }
    if (tok.kind == Tok::kIdent) {
      const auto w = text(tok);
      if (w == "var" || w == "const" || let_declaration()) {
        NodeId d = declaration();
        semicolon();
        close(d);
        return d;
      }
      if (w == "function" || (w == "async" && is_kw("function", 1) && !peek(1).newline_before)) {
        return function_like("function_declaration", true);
      }
      if (w == "class") return class_like("class_declaration", true);
      if (w == "if") return if_statement();
      if (w == "for") return for_statement();
      if (w == "while") return while_statement();
      if (w == "do") return do_statement();
      if (w == "return") return jump_with_value("return_statement");
      if (w == "throw") {
        if (peek(1).newline_before) fail("illegal newline after throw");
        return jump_with_value("throw_statement");
      }
      if (w == "break" || w == "continue") return break_continue();
      if (w == "try") return try_statement();
      if (w == "switch") return switch_statement();
      if (w == "debugger") {
        NodeId n = leaf("debugger_statement", take());
        semicolon();
        return n;
      }
      if (w == "import" && !is_p("(", 1) && !is_p(".", 1)) return import_statement();
      if (w == "export") return export_statement();
      if (w == "with") {
        NodeId n = node("with_statement", take().begin);
        attach(n, parenthesized(), "object");
        attach(n, statement(), "body");
        close(n);
        return n;
      }
      if (is_identifier_token() && is_p(":", 1)) {
        NodeId n = node("labeled_statement", tok.begin);
        attach(n, leaf("statement_identifier", take()), "label");
        take();
        attach(n, statement(), "body");
        close(n);
        return n;
      }
    }
    NodeId n = node("expression_statement", tok.begin);
    attach(n, expression());
    semicolon();
    close(n);
    return n;
  }

  NodeId statement_block() {
    NodeId n = node("statement_block", expect_p("{").begin);
    while (!is_p("}")) {
      if (peek().kind == Tok::kEnd) fail("expected '}'");
      statement_into(n);
    }
    take();
    close(n);
    return n;
  }

  NodeId binding_target() {
    if (is_p("[")) return array_literal();
    if (is_p("{")) return object_literal();
    return identifier();
  }

  // var/let/const with declarators; no trailing semicolon.
  NodeId declaration() {
    const Token& kw = take();
    NodeId n = node(text(kw) == "var" ? "variable_declaration" : "lexical_declaration", kw.begin);
    attach(n, leaf("operator", kw), "kind");
    do {
      if (is_p(",")) take();
      NodeId d = node("variable_declarator", peek().begin);
      NodeId name = binding_target();
      check_binding(name);
      attach(d, name, "name");
      if (is_p("=")) {
        take();
        attach(d, assignment(), "value");
      }
      close(d);
      attach(n, d);
    } while (is_p(","));
    close(n);
    return n;
  }

  NodeId parenthesized() {
    NodeId n = node("parenthesized_expression", expect_p("(").begin);
    {
      NoInGuard guard(no_in_, false);
      attach(n, expression());
    }
    expect_p(")");
    close(n);
    return n;
  }

  NodeId if_statement() {
    NodeId n = node("if_statement", take().begin);
    attach(n, parenthesized(), "condition");
    attach(n, statement(), "consequence");
    if (is_kw("else")) {
      NodeId e = node("else_clause", take().begin);
      attach(e, statement());
      close(e);
      attach(n, e, "alternative");
    }
    close(n);
    return n;
  }

  NodeId for_statement() {
    const std::uint32_t b = take().begin;
    if (is_kw("await")) take();
    expect_p("(");
    NodeId init = kNoNode;
    if (is_p(";")) {
      // empty initializer
    } else {
      NoInGuard guard(no_in_, true);
      if (is_kw("var") || is_kw("const") || let_declaration()) {
        init = declaration();
      } else {
        init = expression();
      }
    }
    if (init != kNoNode && (is_kw("of") || is_kw("in"))) {
      const auto init_type = t_.node(init).type;
      if (init_type != "lexical_declaration" && init_type != "variable_declaration") {
        check_target(init, false);
      }
      NodeId n = node("for_in_statement", b);
      attach(n, init, "left");
      const bool of = is_kw("of");
      attach(n, leaf("operator", take()), "operator");
      attach(n, of ? assignment() : expression(), "right");
      expect_p(")");
      attach(n, statement(), "body");
      close(n);
      return n;
    }
    NodeId n = node("for_statement", b);
    attach(n, init, "initializer");
    expect_p(";");
    if (!is_p(";")) attach(n, expression(), "condition");
    expect_p(";");
    if (!is_p(")")) attach(n, expression(), "increment");
    expect_p(")");
    attach(n, statement(), "body");
    close(n);
    return n;
  }

  NodeId while_statement() {
    NodeId n = node("while_statement", take().begin);
    attach(n, parenthesized(), "condition");
    attach(n, statement(), "body");
    close(n);
    return n;
  }

  NodeId do_statement() {
    NodeId n = node("do_statement", take().begin);
    attach(n, statement(), "body");
    expect_kw("while");
    attach(n, parenthesized(), "condition");
    if (is_p(";")) take();
    close(n);
    return n;
  }

  NodeId jump_with_value(std::string_view type) {
    NodeId n = node(type, take().begin);
    if (!is_p(";") && !is_p("}") && peek().kind != Tok::kEnd && !peek().newline_before) {
      attach(n, expression());
    }
    semicolon();
    close(n);
    return n;
  }

  NodeId break_continue() {
    const Token& kw = take();
    NodeId n = node(text(kw) == "break" ? "break_statement" : "continue_statement", kw.begin);
    if (is_identifier_token() && !peek().newline_before) {
      attach(n, leaf("statement_identifier", take()), "label");
    }
    semicolon();
    close(n);
    return n;
  }

  NodeId try_statement() {
    NodeId n = node("try_statement", take().begin);
    attach(n, statement_block(), "body");
    bool handled = false;
    if (is_kw("catch")) {
      handled = true;
      NodeId c = node("catch_clause", take().begin);
      if (is_p("(")) {
        take();
        attach(c, binding_target(), "parameter");
        expect_p(")");
      }
      attach(c, statement_block(), "body");
      close(c);
      attach(n, c, "handler");
    }
    if (is_kw("finally")) {
      handled = true;
      NodeId f = node("finally_clause", take().begin);
      attach(f, statement_block(), "body");
      close(f);
      attach(n, f, "finalizer");
    }
    if (!handled) fail("missing catch or finally after try");
    close(n);
    return n;
  }

  NodeId switch_statement() {
    NodeId n = node("switch_statement", take().begin);
    attach(n, parenthesized(), "value");
    NodeId body = node("switch_body", expect_p("{").begin);
    while (!is_p("}")) {
      NodeId c;
      if (is_kw("case")) {
        c = node("switch_case", take().begin);
        attach(c, expression(), "value");
      } else if (is_kw("default")) {
        c = node("switch_default", take().begin);
      } else {
        fail("expected case or default");
      }
      expect_p(":");
      while (!is_kw("case") && !is_kw("default") && !is_p("}")) {
        if (peek().kind == Tok::kEnd) fail("expected '}'");
        statement_into(c);
      }
      close(c);
      attach(body, c);
    }
    take();
    close(body);
    attach(n, body, "body");
    close(n);
    return n;
  }

  NodeId string_literal() {
    if (peek().kind != Tok::kString) fail("expected string");
    return leaf("string", take());
  }

  NodeId module_export_name() {
    if (peek().kind == Tok::kString) return string_literal();
    if (peek().kind != Tok::kIdent) fail("expected name");
    return leaf("identifier", take());
  }

  NodeId import_statement() {
    NodeId n = node("import_statement", take().begin);
    if (peek().kind == Tok::kString) {
      attach(n, string_literal(), "source");
      import_attributes(n);
      semicolon();
      close(n);
      return n;
    }
    NodeId clause = node("import_clause", peek().begin);
    if (is_identifier_token()) {
      attach(clause, identifier());
      if (is_p(",")) take();
    }
    if (is_p("*")) {
      NodeId ns = node("namespace_import", take().begin);
      expect_kw("as");
      attach(ns, identifier());
      close(ns);
      attach(clause, ns);
    } else if (is_p("{")) {
      attach(clause, specifier_list("named_imports", "import_specifier"));
    }
    close(clause);
    attach(n, clause);
    expect_kw("from");
    attach(n, string_literal(), "source");
    import_attributes(n);
    semicolon();
    close(n);
    return n;
  }

  void import_attributes(NodeId n) {
    if ((is_kw("with") || is_kw("assert")) && is_p("{", 1) && !peek().newline_before) {
      take();
      attach(n, object_literal());
    }
  }

  NodeId specifier_list(std::string_view list_type, std::string_view item_type) {
    NodeId list = node(list_type, expect_p("{").begin);
    while (!is_p("}")) {
      NodeId spec = node(item_type, peek().begin);
      attach(spec, module_export_name(), "name");
      if (is_kw("as")) {
        take();
        attach(spec, module_export_name(), "alias");
      }
      close(spec);
      attach(list, spec);
      if (!is_p("}")) expect_p(",");
    }
    take();
    close(list);
    return list;
  }

  NodeId export_statement() {
    NodeId n = node("export_statement", take().begin);
    if (is_kw("default")) {
      take();
      if (is_kw("function") || (is_kw("async") && is_kw("function", 1))) {
        attach(n, function_like("function_declaration", false), "declaration");
      } else if (is_kw("class")) {
        attach(n, class_like("class_declaration", false), "declaration");
      } else {
        attach(n, assignment(), "value");
        semicolon();
      }
    } else if (is_p("*")) {
      take();
      if (is_kw("as")) {
        take();
        attach(n, module_export_name());
      }
      expect_kw("from");
      attach(n, string_literal(), "source");
      semicolon();
    } else if (is_p("{")) {
      attach(n, specifier_list("export_clause", "export_specifier"));
      if (is_kw("from")) {
        take();
        attach(n, string_literal(), "source");
      }
      semicolon();
    } else if (is_kw("var") || is_kw("let") || is_kw("const")) {
      NodeId d = declaration();
      semicolon();
      close(d);
      attach(n, d, "declaration");
    } else if (is_kw("function") || (is_kw("async") && is_kw("function", 1))) {
      attach(n, function_like("function_declaration", true), "declaration");
    } else if (is_kw("class")) {
      attach(n, class_like("class_declaration", true), "declaration");
    } else {
      fail("unexpected token after export");
    }
    close(n);
    return n;
  }

  // `function` declarations and expressions, optionally async/generator.
  NodeId function_like(std::string_view type, bool name_required) {
    const std::uint32_t b = peek().begin;
    if (is_kw("async")) take();
    expect_kw("function");
    bool generator = false;
    if (is_p("*")) {
      take();
      generator = true;
    }
    if (generator && type == "function_declaration") type = "generator_function_declaration";
    if (generator && type == "function_expression") type = "generator_function";
    NodeId n = node(type, b);
    if (peek().kind == Tok::kIdent && !is_p("(")) {
      attach(n, leaf("identifier", take()), "name");
    } else if (name_required) {
      fail("function name expected");
    }
    attach(n, formal_parameters(), "parameters");
    attach(n, function_body(), "body");
    close(n);
    return n;
  }

  NodeId function_body() {
    NoInGuard guard(no_in_, false);
    return statement_block();
  }

  NodeId formal_parameters() {
    NodeId n = node("formal_parameters", expect_p("(").begin);
    NoInGuard guard(no_in_, false);
    while (!is_p(")")) {
      if (is_p("...")) {
        NodeId r = node("rest_pattern", take().begin);
        attach(r, binding_target());
        close(r);
        attach(n, r);
      } else {
        NodeId param = assignment();
        check_parameter(param);
        attach(n, param);
      }
      if (!is_p(")")) expect_p(",");
    }
    take();
    close(n);
    return n;
  }

  // Binding element: identifier or destructuring pattern, optionally defaulted.
  void check_parameter(NodeId n) const {
    const Node& node = t_.node(n);
    NodeId target = n;
    if (node.type == "assignment_expression") target = t_.field(n, "left");
    check_binding(target);
  }

  void check_binding(NodeId n) const {
    const Node& node = t_.node(n);
    const auto type = node.type;
    if (type == "identifier") return;
    if (type == "array") {
      for (NodeId c : node.children) {
        if (t_.node(c).type == "spread_element") {
          check_binding(t_.node(c).children[0]);
        } else {
          check_parameter(c);
        }
      }
      return;
    }
    if (type == "object") {
      for (NodeId c : node.children) {
        const auto ct = t_.node(c).type;
        if (ct == "pair") {
          check_parameter(t_.field(c, "value"));
        } else if (ct == "spread_element") {
          check_binding(t_.node(c).children[0]);
        } else if (ct != "shorthand_property_identifier" && ct != "object_assignment_pattern") {
          throw ParseFailure{t_.node(c).begin, "invalid destructuring target"};
        }
      }
      return;
    }
    throw ParseFailure{node.begin, "invalid binding target"};
  }

  NodeId class_like(std::string_view type, bool name_required) {
    NodeId n = node(type, take().begin);
    if (is_identifier_token() && !is_kw("extends")) {
      attach(n, identifier(), "name");
    } else if (name_required) {
      fail("class name expected");
    }
    if (is_kw("extends")) {
      NodeId h = node("class_heritage", take().begin);
      attach(h, lhs_expression());
      close(h);
      attach(n, h);
    }
    attach(n, class_body(), "body");
    close(n);
    return n;
  }

  // Property key in classes and object literals.
  NodeId property_name() {
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::kIdent:
        return leaf("property_identifier", take());
      case Tok::kPrivate:
        return leaf("private_property_identifier", take());
      case Tok::kString:
        return leaf("string", take());
      case Tok::kNumber:
        return leaf("number", take());
      default:
        break;
    }
    if (is_p("[")) {
      NodeId n = node("computed_property_name", take().begin);
      NoInGuard guard(no_in_, false);
      attach(n, assignment());
      expect_p("]");
      close(n);
      return n;
    }
    fail("expected property name");
  }

  // True when the identifier at the cursor is a modifier (static/get/set/async)
  // rather than the member name itself.
  bool modifier_here() const {
    if (peek().kind != Tok::kIdent) return false;
    const auto w = text(peek());
    if (w != "static" && w != "get" && w != "set" && w != "async") return false;
    if (is_p("(", 1) || is_p("=", 1) || is_p(";", 1) || is_p("}", 1) || is_p(":", 1) ||
        is_p(",", 1)) {
      return false;
    }
    return !(w == "async" && peek(1).newline_before);
  }

  NodeId method_rest(std::uint32_t b, NodeId name) {
    NodeId m = node("method_definition", b);
    attach(m, name, "name");
    attach(m, formal_parameters(), "parameters");
    attach(m, function_body(), "body");
    close(m);
    return m;
  }

  NodeId class_body() {
    NodeId n = node("class_body", expect_p("{").begin);
    while (!is_p("}")) {
      if (peek().kind == Tok::kEnd) fail("expected '}'");
      if (is_p(";")) {
        take();
        continue;
      }
      const std::uint32_t b = peek().begin;
      if (is_kw("static") && is_p("{", 1)) {
        take();
        NodeId blk = node("class_static_block", b);
        attach(blk, statement_block(), "body");
        close(blk);
        attach(n, blk);
        continue;
      }
      while (modifier_here()) take();
      if (is_p("*")) take();
      NodeId name = property_name();
      if (is_p("(")) {
        attach(n, method_rest(b, name));
        continue;
      }
      NodeId f = node("field_definition", b);
      attach(f, name, "property");
      if (is_p("=")) {
        take();
        attach(f, assignment(), "value");
      }
      semicolon();
      close(f);
      attach(n, f);
    }
    take();
    close(n);
    return n;
  }

  // ---- expressions -------------------------------------------------------
  NodeId expression() {
    const std::uint32_t b = peek().begin;
    NodeId first = assignment();
    if (!is_p(",")) return first;
    NodeId seq = node("sequence_expression", b);
    attach(seq, first);
    while (is_p(",")) {
      take();
      attach(seq, assignment());
    }
    close(seq);
    return seq;
  }

  std::size_t matching_paren(std::size_t open) const {
    int depth = 0;
    for (std::size_t k = open; k < toks_.size(); ++k) {
      if (toks_[k].kind != Tok::kPunct) continue;
      const auto w = text(toks_[k]);
      if (w == "(" || w == "[" || w == "{") ++depth;
      if (w == ")" || w == "]" || w == "}") {
        if (--depth == 0) return k;
      }
    }
    return toks_.size() - 1;
  }

  bool arrow_ahead(std::size_t k) const {
    const std::size_t at = i_ + k;
    if (at >= toks_.size()) return false;
    if (toks_[at].kind == Tok::kIdent && !is_reserved(text(toks_[at]))) {
      return at + 1 < toks_.size() && toks_[at + 1].kind == Tok::kPunct &&
             text(toks_[at + 1]) == "=>" && !toks_[at + 1].newline_before;
    }
    if (toks_[at].kind == Tok::kPunct && text(toks_[at]) == "(") {
      const std::size_t close_at = matching_paren(at);
      return close_at + 1 < toks_.size() && toks_[close_at + 1].kind == Tok::kPunct &&
             text(toks_[close_at + 1]) == "=>" && !toks_[close_at + 1].newline_before;
    }
    return false;
  }

  NodeId arrow_function() {
    const std::uint32_t b = peek().begin;
    if (is_kw("async") && !arrow_ahead(0)) take();
    NodeId n = node("arrow_function", b);
    if (is_p("(")) {
      attach(n, formal_parameters(), "parameters");
    } else {
      attach(n, identifier(), "parameter");
    }
    expect_p("=>");
    if (is_p("{")) {
      attach(n, function_body(), "body");
    } else {
      attach(n, assignment(), "body");
    }
    close(n);
    return n;
  }

  void check_target(NodeId n, bool simple) const {
    const Node& node = t_.node(n);
    const auto type = node.type;
    if (type == "identifier" || type == "member_expression" || type == "subscript_expression") {
      return;
    }
    if (type == "parenthesized_expression" && node.children.size() == 1) {
      check_target(node.children[0], simple);
      return;
    }
    if (!simple && (type == "array" || type == "object")) return;
    throw ParseFailure{node.begin, "invalid assignment target"};
  }

  bool is_assign_op() const {
    if (peek().kind != Tok::kPunct) return false;
    static constexpr std::array<std::string_view, 16> kOps = {
        "=",  "+=", "-=",  "*=",  "/=",  "%=",  "**=", "<<=",
        ">>=", ">>>=", "&=", "|=", "^=", "&&=", "||=", "?\?="};
    const auto w = text(peek());
    return std::find(kOps.begin(), kOps.end(), w) != kOps.end();
  }

  NodeId assignment() {
    if (arrow_ahead(0) || (is_kw("async") && !peek(1).newline_before && arrow_ahead(1))) {
      return arrow_function();
    }
    if (is_kw("yield")) {
      NodeId y = node("yield_expression", take().begin);
      if (is_p("*")) take();
      if (!is_p(")") && !is_p("]") && !is_p("}") && !is_p(",") && !is_p(";") &&
          !is_p(":") && peek().kind != Tok::kEnd && !peek().newline_before) {
        attach(y, assignment());
      }
      close(y);
      return y;
    }
    NodeId left = conditional();
    if (!is_assign_op()) return left;
    const Token& op = take();
    const bool plain = text(op) == "=";
    check_target(left, !plain);
    NodeId n = t_.add(plain ? "assignment_expression" : "augmented_assignment_expression",
                      t_.node(left).begin, t_.node(left).end);
    attach(n, left, "left");
    if (!plain) attach(n, leaf("operator", op), "operator");
    attach(n, assignment(), "right");
    close(n);
    return n;
  }

  NodeId conditional() {
    NodeId cond = binary(1);
    if (!is_p("?")) return cond;
    take();
    NodeId n = t_.add("ternary_expression", t_.node(cond).begin, t_.node(cond).end);
    attach(n, cond, "condition");
    {
      NoInGuard guard(no_in_, false);
      attach(n, assignment(), "consequence");
    }
    expect_p(":");
    attach(n, assignment(), "alternative");
    close(n);
    return n;
  }

  int precedence() const {
    const Token& tok = peek();
    const auto w = text(tok);
    if (tok.kind == Tok::kIdent) {
      if (w == "instanceof") return 7;
      if (w == "in" && !no_in_) return 7;
      return 0;
    }
    if (tok.kind != Tok::kPunct) return 0;
    if (w == "??" || w == "||") return 1;
    if (w == "&&") return 2;
    if (w == "|") return 3;
    if (w == "^") return 4;
    if (w == "&") return 5;
    if (w == "==" || w == "!=" || w == "===" || w == "!==") return 6;
    if (w == "<" || w == ">" || w == "<=" || w == ">=") return 7;
    if (w == "<<" || w == ">>" || w == ">>>") return 8;
    if (w == "+" || w == "-") return 9;
    if (w == "*" || w == "/" || w == "%") return 10;
    if (w == "**") return 11;
    return 0;
  }

  NodeId binary(int min_prec) {
    NodeId left = unary();
    for (;;) {
      const int p = precedence();
      if (p == 0 || p < min_prec) return left;
      const bool right_assoc = text(peek()) == "**";
      NodeId op = leaf("operator", take());
      NodeId right = binary(right_assoc ? p : p + 1);
      NodeId n = t_.add("binary_expression", t_.node(left).begin, t_.node(right).end);
      attach(n, left, "left");
      attach(n, op, "operator");
      attach(n, right, "right");
      left = n;
    }
  }

  bool starts_expression() const {
    const Token& tok = peek();
    if (tok.kind == Tok::kEnd) return false;
    if (tok.kind != Tok::kPunct) return true;
    const auto w = text(tok);
    return w == "(" || w == "[" || w == "{" || w == "!" || w == "~" || w == "+" ||
           w == "-" || w == "++" || w == "--" || w == "/";
  }

  NodeId unary() {
    const Token& tok = peek();
    const auto w = text(tok);
    const bool punct_unary =
        tok.kind == Tok::kPunct && (w == "!" || w == "~" || w == "+" || w == "-");
    const bool word_unary =
        tok.kind == Tok::kIdent && (w == "typeof" || w == "void" || w == "delete");
    if (punct_unary || word_unary) {
      NodeId n = node("unary_expression", tok.begin);
      attach(n, leaf("operator", take()), "operator");
      attach(n, unary(), "argument");
      close(n);
      return n;
    }
    if (tok.kind == Tok::kIdent && w == "await" && !is_p("=>", 1)) {
      take();
      if (starts_expression() && !is_p(")") ) {
        NodeId n = node("await_expression", tok.begin);
        attach(n, unary());
        close(n);
        return n;
      }
      --i_;
    }
    if (tok.kind == Tok::kPunct && (w == "++" || w == "--")) {
      NodeId n = node("update_expression", tok.begin);
      attach(n, leaf("operator", take()), "operator");
      NodeId arg = unary();
      check_target(arg, true);
      attach(n, arg, "argument");
      close(n);
      return n;
    }
    NodeId e = lhs_expression();
    if ((is_p("++") || is_p("--")) && !peek().newline_before) {
      check_target(e, true);
      NodeId n = t_.add("update_expression", t_.node(e).begin, t_.node(e).end);
      attach(n, e, "argument");
      attach(n, leaf("operator", take()), "operator");
      close(n);
      return n;
    }
    return e;
  }

  NodeId arguments() {
    NodeId n = node("arguments", expect_p("(").begin);
    NoInGuard guard(no_in_, false);
    while (!is_p(")")) {
      if (is_p("...")) {
        NodeId s = node("spread_element", take().begin);
        attach(s, assignment());
        close(s);
        attach(n, s);
      } else {
        attach(n, assignment());
      }
      if (!is_p(")")) expect_p(",");
    }
    take();
    close(n);
    return n;
  }

  NodeId member_property() {
    if (peek().kind == Tok::kIdent) return leaf("property_identifier", take());
    if (peek().kind == Tok::kPrivate) return leaf("private_property_identifier", take());
    fail("expected property name");
  }

  NodeId new_expression() {
    const std::uint32_t b = take().begin;
    if (is_p(".")) {
      take();
      NodeId m = node("meta_property", b);
      attach(m, member_property());
      close(m);
      return m;
    }
    NodeId n = node("new_expression", b);
    NodeId callee = is_kw("new") ? new_expression() : primary();
    for (;;) {
      if (is_p(".")) {
        take();
        NodeId m = t_.add("member_expression", t_.node(callee).begin, t_.node(callee).end);
        attach(m, callee, "object");
        attach(m, member_property(), "property");
        close(m);
        callee = m;
      } else if (is_p("[")) {
        take();
        NodeId m = t_.add("subscript_expression", t_.node(callee).begin, t_.node(callee).end);
        attach(m, callee, "object");
        {
          NoInGuard guard(no_in_, false);
          attach(m, expression(), "index");
        }
        expect_p("]");
        close(m);
        callee = m;
      } else {
        break;
      }
    }
    attach(n, callee, "constructor");
    if (is_p("(")) attach(n, arguments(), "arguments");
    close(n);
    return n;
  }

  NodeId lhs_expression() {
    NodeId e = is_kw("new") ? new_expression() : primary();
    for (;;) {
      const std::uint32_t b = t_.node(e).begin;
      if (is_p(".") || (is_p("?.") && !is_p("(", 1) && !is_p("[", 1))) {
        take();
        NodeId m = node("member_expression", b);
        attach(m, e, "object");
        attach(m, member_property(), "property");
        close(m);
        e = m;
      } else if (is_p("?.") && is_p("[", 1)) {
        take();
        continue;
      } else if (is_p("?.") && is_p("(", 1)) {
        take();
        continue;
      } else if (is_p("[")) {
        take();
        NodeId m = node("subscript_expression", b);
        attach(m, e, "object");
        {
          NoInGuard guard(no_in_, false);
          attach(m, expression(), "index");
        }
        expect_p("]");
        close(m);
        e = m;
      } else if (is_p("(")) {
        NodeId c = node("call_expression", b);
        attach(c, e, "function");
        attach(c, arguments(), "arguments");
        close(c);
        e = c;
      } else if (peek().kind == Tok::kTemplate) {
        NodeId c = node("call_expression", b);
        attach(c, e, "function");
        attach(c, template_string(), "arguments");
        close(c);
        e = c;
      } else {
        return e;
      }
    }
  }

  NodeId primary() {
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::kIdent: {
        const auto w = text(tok);
        if (w == "this") return leaf("this", take());
        if (w == "super") return leaf("super", take());
        if (w == "null") return leaf("null", take());
        if (w == "true") return leaf("true", take());
        if (w == "false") return leaf("false", take());
        if (w == "function" || (w == "async" && is_kw("function", 1))) {
          return function_like("function_expression", false);
        }
        if (w == "class") return class_like("class", false);
        if (w == "import") return leaf("import", take());
        if (is_reserved(w)) fail("unexpected keyword '" + std::string(w) + "'");
        return leaf("identifier", take());
      }
      case Tok::kPrivate:
        return leaf("private_property_identifier", take());
      case Tok::kNumber:
        return leaf("number", take());
      case Tok::kString:
        return leaf("string", take());
      case Tok::kTemplate:
        return template_string();
      case Tok::kRegex:
        return leaf("regex", take());
      case Tok::kPunct:
        break;
      case Tok::kEnd:
        fail("unexpected end of input");
    }
    if (is_p("(")) return parenthesized();
    if (is_p("[")) return array_literal();
    if (is_p("{")) return object_literal();
    fail("unexpected token '" + brief(text(tok)) + "'");
  }

  NodeId array_literal() {
    NodeId n = node("array", expect_p("[").begin);
    NoInGuard guard(no_in_, false);
    while (!is_p("]")) {
      if (is_p(",")) {
        take();
        continue;
      }
      if (is_p("...")) {
        NodeId s = node("spread_element", take().begin);
        attach(s, assignment());
        close(s);
        attach(n, s);
      } else {
        attach(n, assignment());
      }
      if (!is_p("]")) expect_p(",");
    }
    take();
    close(n);
    return n;
  }

  NodeId object_literal() {
    NodeId n = node("object", expect_p("{").begin);
    NoInGuard guard(no_in_, false);
    while (!is_p("}")) {
      const std::uint32_t b = peek().begin;
      if (is_p("...")) {
        NodeId s = node("spread_element", take().begin);
        attach(s, assignment());
        close(s);
        attach(n, s);
      } else {
        bool modified = false;
        while (modifier_here()) {
          take();
          modified = true;
        }
        if (is_p("*")) {
          take();
          modified = true;
        }
        const bool shorthand_candidate = peek().kind == Tok::kIdent;
        NodeId key = property_name();
        if (is_p("(")) {
          attach(n, method_rest(b, key));
        } else if (is_p(":") && !modified) {
          take();
          NodeId pair = node("pair", b);
          attach(pair, key, "key");
          attach(pair, assignment(), "value");
          close(pair);
          attach(n, pair);
        } else if (shorthand_candidate && !modified) {
          t_.set_span(key, t_.node(key).begin, t_.node(key).end);
          NodeId sh = t_.add("shorthand_property_identifier", t_.node(key).begin, t_.node(key).end);
          if (is_p("=")) {
            take();
            NodeId pat = node("object_assignment_pattern", b);
            attach(pat, sh, "left");
            attach(pat, assignment(), "right");
            close(pat);
            attach(n, pat);
          } else {
            attach(n, sh);
          }
        } else {
          fail("unexpected token in object literal");
        }
      }
      if (!is_p("}")) expect_p(",");
    }
    take();
    close(n);
    return n;
  }

  NodeId template_string() {
    const Token& tok = take();
    NodeId n = leaf("template_string", tok);
    std::uint32_t p = tok.begin + 1;
    const std::uint32_t end = tok.end > tok.begin + 1 ? tok.end - 1 : tok.end;
    while (p < end) {
      const char c = s_[p];
      if (c == '\\') {
        p += 2;
        continue;
      }
      if (c == '$' && p + 1 < end && s_[p + 1] == '{') {
        bool ok = true;
        const std::uint32_t close_brace = skip_braced_code(s_, p + 2, end, &ok);
        if (!ok) throw ParseFailure{p, "unterminated template substitution"};
        NodeId sub = t_.add("template_substitution", p, close_brace + 1);
        Lexer lexer(t_, p + 2, close_brace);
        Parser inner(t_, lexer.run());
        t_.attach(sub, inner.parse_embedded_expression(), "expression");
        attach(n, sub);
        p = close_brace + 1;
        continue;
      }
      ++p;
    }
    return n;
  }

  Tree& t_;
  const std::string& s_;
  std::vector<Token> toks_;
  std::size_t i_ = 0;
  bool no_in_ = false;
};

}  // namespace

Tree parse_javascript(std::string source) {
  Tree tree(std::move(source));
  Lexer lexer(tree, 0, static_cast<std::uint32_t>(tree.source().size()));
  Parser parser(tree, lexer.run());
  tree.set_root(parser.parse_program());
  tree.finish();
  return tree;
}

const std::set<std::string_view>& javascript_node_types() {
  static const std::set<std::string_view> kTypes = {
      "ERROR", "arguments", "array", "arrow_function", "assignment_expression",
      "augmented_assignment_expression", "await_expression", "binary_expression",
      "break_statement", "call_expression", "catch_clause", "class", "class_body",
      "class_declaration", "class_heritage", "class_static_block", "computed_property_name",
      "continue_statement", "debugger_statement", "do_statement", "else_clause",
      "empty_statement", "export_clause", "export_specifier", "export_statement",
      "expression_statement", "false", "field_definition", "finally_clause",
      "for_in_statement", "for_statement", "formal_parameters", "function_declaration",
      "function_expression", "generator_function", "generator_function_declaration",
      "identifier", "if_statement", "import", "import_clause", "import_specifier",
      "import_statement", "labeled_statement", "lexical_declaration", "member_expression",
      "meta_property", "method_definition", "named_imports", "namespace_import",
      "new_expression", "null", "number", "object", "object_assignment_pattern",
      "operator", "pair", "parenthesized_expression", "private_property_identifier",
      "program", "property_identifier", "regex", "rest_pattern", "return_statement",
      "sequence_expression", "shorthand_property_identifier", "spread_element",
      "statement_block", "statement_identifier", "string", "subscript_expression", "super",
      "switch_body", "switch_case", "switch_default", "switch_statement", "template_string",
      "template_substitution", "ternary_expression", "this", "throw_statement", "true",
      "try_statement", "unary_expression", "update_expression", "variable_declaration",
      "variable_declarator", "while_statement", "with_statement", "yield_expression"};
  return kTypes;
}

const std::set<std::string_view>& javascript_fields() {
  static const std::set<std::string_view> kFields = {
      "alias", "alternative", "argument", "arguments", "body", "condition", "consequence",
      "constructor", "declaration", "expression", "finalizer", "function", "handler",
      "increment", "index", "initializer", "key", "kind", "label", "left", "name", "object",
      "operator", "parameter", "parameters", "property", "right", "source", "value"};
  return kFields;
}

}  // namespace forge::syntax
