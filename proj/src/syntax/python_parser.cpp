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

enum class Tok { kName, kNumber, kString, kOp, kNewline, kIndent, kDedent, kEnd };

struct Token {
  Tok kind;
  std::uint32_t begin;
  std::uint32_t end;
};

bool is_ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}
bool is_ident_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c >= 0x80;
}

constexpr std::array<std::string_view, 47> kOperators = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=",
    ">=",  "==",  "!=",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@=",
    "+",   "-",   "*",   "/",   "%",   "@",  "&",  "|",  "^",  "~",  "<",  ">",
    "(",   ")",   "[",   "]",   "{",   "}",  ",",  ":",  ";",  ".",  "="};

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",     "and",   "as",     "assert", "async",
    "await", "break",  "class",    "continue", "def", "del",    "elif",
    "else",  "except", "finally",  "for",   "from",   "global", "if",
    "import", "in",    "is",       "lambda", "nonlocal", "not", "or",
    "pass",  "raise",  "return",   "try",   "while",  "with",   "yield"};

bool is_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

class Lexer {
 public:
  Lexer(Tree& tree, std::uint32_t begin, std::uint32_t end, bool expression_mode)
      : tree_(tree),
        s_(tree.source()),
        pos_(begin),
        end_(end),
        expression_mode_(expression_mode) {}

  std::vector<Token> run() {
    bool at_line_start = !expression_mode_;
    bool line_has_tokens = false;
    while (pos_ < end_) {
      if (at_line_start && depth_ == 0) {
        at_line_start = false;
        int col = 0;
        std::uint32_t p = pos_;
        while (p < end_ && (s_[p] == ' ' || s_[p] == '\t' || s_[p] == '\f')) {
          col = s_[p] == '\t' ? (col / 8 + 1) * 8 : col + 1;
          ++p;
        }
        if (p >= end_ || s_[p] == '\n' || s_[p] == '\r' || s_[p] == '#') {
          // Blank or comment-only line: no indentation change.
          while (p < end_ && s_[p] != '\n') ++p;
          pos_ = p < end_ ? p + 1 : p;
          at_line_start = true;
          continue;
        }
        pos_ = p;
        if (col > indents_.back()) {
          indents_.push_back(col);
          emit(Tok::kIndent, pos_, pos_);
        } else {
          while (col < indents_.back()) {
            indents_.pop_back();
            emit(Tok::kDedent, pos_, pos_);
          }
          if (col != indents_.back()) {
            tree_.report(pos_, "unindent does not match any outer indentation level");
          }
        }
      }
      const unsigned char c = static_cast<unsigned char>(s_[pos_]);
      if (c == ' ' || c == '\t' || c == '\f' || c == '\r') {
        ++pos_;
        continue;
      }
      if (c == '#') {
        while (pos_ < end_ && s_[pos_] != '\n') ++pos_;
        continue;
      }
      if (c == '\n') {
        if (depth_ == 0 && !expression_mode_) {
          if (line_has_tokens) emit(Tok::kNewline, pos_, pos_ + 1);
          line_has_tokens = false;
          at_line_start = true;
        }
        ++pos_;
        continue;
      }
      if (c == '\\') {
        std::uint32_t p = pos_ + 1;
        if (p < end_ && s_[p] == '\r') ++p;
        if (p < end_ && s_[p] == '\n') {
          pos_ = p + 1;
          continue;
        }
        tree_.report(pos_, "unexpected character after line continuation");
        ++pos_;
        continue;
      }
      line_has_tokens = true;
      if (string_start()) {
        lex_string();
      } else if (is_ident_start(c)) {
        std::uint32_t b = pos_;
        while (pos_ < end_ && is_ident_char(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        emit(Tok::kName, b, pos_);
      } else if (std::isdigit(c) ||
                 (c == '.' && pos_ + 1 < end_ &&
                  std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
        lex_number();
      } else {
        lex_operator();
      }
    }
    if (depth_ > 0) tree_.report(end_, "unexpected EOF: unclosed bracket");
    if (line_has_tokens && !expression_mode_) emit(Tok::kNewline, end_, end_);
    while (indents_.size() > 1) {
      indents_.pop_back();
      emit(Tok::kDedent, end_, end_);
    }
    emit(Tok::kEnd, end_, end_);
    return std::move(tokens_);
  }

 private:
  void emit(Tok kind, std::uint32_t b, std::uint32_t e) { tokens_.push_back({kind, b, e}); }

  // True when the cursor sits on an optional string prefix followed by a quote.
  bool string_start() const {
    std::uint32_t p = pos_;
    while (p < end_ && p - pos_ < 3 && std::isalpha(static_cast<unsigned char>(s_[p]))) ++p;
    if (p >= end_ || (s_[p] != '\'' && s_[p] != '"')) return false;
    std::string prefix(s_.substr(pos_, p - pos_));
    std::transform(prefix.begin(), prefix.end(), prefix.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    static constexpr std::array<std::string_view, 12> kPrefixes = {
        "", "r", "u", "f", "b", "br", "rb", "fr", "rf", "t", "tr", "rt"};
    return std::find(kPrefixes.begin(), kPrefixes.end(), prefix) != kPrefixes.end();
  }

  void lex_string() {
    const std::uint32_t b = pos_;
    bool raw = false;
    bool bytes = false;
    while (s_[pos_] != '\'' && s_[pos_] != '"') {
      const char p = static_cast<char>(std::tolower(static_cast<unsigned char>(s_[pos_++])));
      raw = raw || p == 'r';
      bytes = bytes || p == 'b';
    }
    const char q = s_[pos_];
    const bool triple = pos_ + 2 < end_ && s_[pos_ + 1] == q && s_[pos_ + 2] == q;
    pos_ += triple ? 3 : 1;
    while (pos_ < end_) {
      const char c = s_[pos_];
      if (c == '\\') {
        if (!raw) check_escape(bytes);
        pos_ += 2;
        continue;
      }
      if (!triple && c == '\n') break;
      if (c == q) {
        if (!triple) {
          ++pos_;
          emit(Tok::kString, b, pos_);
          return;
        }
        if (pos_ + 2 < end_ + 0 && s_[pos_ + 1] == q && s_[pos_ + 2] == q) {
          pos_ += 3;
          emit(Tok::kString, b, pos_);
          return;
        }
      }
      ++pos_;
    }
    pos_ = std::min(pos_, end_);
    tree_.report(b, triple ? "unterminated triple-quoted string literal"
                           : "unterminated string literal");
    emit(Tok::kString, b, pos_);
  }

  // `pos_` is on a backslash inside a non-raw literal.
  void check_escape(bool bytes) {
    const char kind = pos_ + 1 < end_ ? s_[pos_ + 1] : '\0';
    std::uint32_t need = 0;
    if (kind == 'x') need = 2;
    if (!bytes && kind == 'u') need = 4;
    if (!bytes && kind == 'U') need = 8;
    if (!bytes && kind == 'N') {
      const auto close = s_.find('}', pos_ + 2);
      if (pos_ + 2 >= end_ || s_[pos_ + 2] != '{' || close == std::string::npos ||
          close >= end_ || s_.find('\n', pos_) < close) {
        tree_.report(pos_, "malformed \\N character escape");
      }
      return;
    }
    for (std::uint32_t k = 0; k < need; ++k) {
      const std::uint32_t p = pos_ + 2 + k;
      if (p >= end_ || !std::isxdigit(static_cast<unsigned char>(s_[p]))) {
        tree_.report(pos_, "truncated escape sequence");
        return;
      }
    }
  }

  void lex_number() {
    const std::uint32_t b = pos_;
    auto digits = [&](auto pred) {
      while (pos_ < end_ && (pred(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    };
    if (s_[pos_] == '0' && pos_ + 1 < end_ && std::strchr("xXoObB", s_[pos_ + 1]) &&
        s_[pos_ + 1] != '\0') {
      pos_ += 2;
      digits([](unsigned char ch) { return std::isxdigit(ch) != 0; });
    } else {
      digits([](unsigned char ch) { return std::isdigit(ch) != 0; });
      if (pos_ < end_ && s_[pos_] == '.') {
        ++pos_;
        digits([](unsigned char ch) { return std::isdigit(ch) != 0; });
      }
      if (pos_ < end_ && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
        std::uint32_t p = pos_ + 1;
        if (p < end_ && (s_[p] == '+' || s_[p] == '-')) ++p;
        if (p < end_ && std::isdigit(static_cast<unsigned char>(s_[p]))) {
          pos_ = p;
          digits([](unsigned char ch) { return std::isdigit(ch) != 0; });
        }
      }
      if (pos_ < end_ && (s_[pos_] == 'j' || s_[pos_] == 'J')) ++pos_;
    }
    emit(Tok::kNumber, b, pos_);
  }

  void lex_operator() {
    for (std::string_view op : kOperators) {
      if (s_.compare(pos_, op.size(), op) == 0 && pos_ + op.size() <= end_) {
        if (op == "(" || op == "[" || op == "{") ++depth_;
        if (op == ")" || op == "]" || op == "}") {
          if (depth_ == 0) {
            tree_.report(pos_, "unmatched '" + std::string(op) + "'");
          } else {
            --depth_;
          }
        }
        emit(Tok::kOp, pos_, pos_ + static_cast<std::uint32_t>(op.size()));
        pos_ += static_cast<std::uint32_t>(op.size());
        return;
      }
    }
    tree_.report(pos_, std::string("invalid character '") + s_[pos_] + "'");
    ++pos_;
  }

  Tree& tree_;
  const std::string& s_;
  std::uint32_t pos_;
  std::uint32_t end_;
  bool expression_mode_;
  int depth_ = 0;
  std::vector<int> indents_{0};
  std::vector<Token> tokens_;
};

class Parser {
 public:
  Parser(Tree& tree, std::vector<Token> tokens)
      : t_(tree), s_(tree.source()), toks_(std::move(tokens)) {}

  NodeId parse_module() {
    NodeId module = t_.add("module", 0, static_cast<std::uint32_t>(s_.size()));
    while (peek().kind != Tok::kEnd) {
      if (peek().kind == Tok::kNewline || peek().kind == Tok::kDedent) {
        ++i_;
        continue;
      }
      if (peek().kind == Tok::kIndent) {
        t_.report(peek().begin, "unexpected indent");
        skip_indented_block(module);
        continue;
      }
      statement_into(module);
    }
    return module;
  }

  // Expression inside an f-string replacement field.
  NodeId parse_embedded_expression() {
    NodeId e = star_expressions();
    if (peek().kind != Tok::kEnd) fail("f-string: invalid expression");
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
  bool is_op(std::string_view op, std::size_t k = 0) const {
    return peek(k).kind == Tok::kOp && text(peek(k)) == op;
  }
  bool is_kw(std::string_view kw, std::size_t k = 0) const {
    return peek(k).kind == Tok::kName && text(peek(k)) == kw;
  }
  const Token& take() {
    const Token& tok = toks_[i_];
    if (i_ + 1 < toks_.size()) ++i_;
    return tok;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseFailure{peek().begin, msg};
  }
  const Token& expect_op(std::string_view op) {
    if (!is_op(op)) fail("expected '" + std::string(op) + "'");
    return take();
  }
  void expect_kw(std::string_view kw) {
    if (!is_kw(kw)) fail("expected '" + std::string(kw) + "'");
    take();
  }
  std::uint32_t prev_end() const { return i_ > 0 ? toks_[i_ - 1].end : 0; }

  NodeId leaf(std::string_view type, const Token& tok) { return t_.add(type, tok.begin, tok.end); }
  NodeId node(std::string_view type, std::uint32_t begin) { return t_.add(type, begin, begin); }
  void close(NodeId n) { t_.set_span(n, t_.node(n).begin, prev_end()); }
  void attach(NodeId parent, NodeId child, std::string_view field = {}) {
    t_.attach(parent, child, field);
  }

  NodeId identifier() {
    if (peek().kind != Tok::kName || is_keyword(text(peek()))) fail("expected identifier");
    return leaf("identifier", take());
  }

  bool starts_expression() const {
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::kNumber:
      case Tok::kString:
        return true;
      case Tok::kName: {
        auto w = text(tok);
        return !is_keyword(w) || w == "None" || w == "True" || w == "False" ||
               w == "lambda" || w == "not" || w == "await" || w == "yield";
      }
      case Tok::kOp: {
        auto w = text(tok);
        return w == "(" || w == "[" || w == "{" || w == "-" || w == "+" || w == "~" ||
               w == "*" || w == "..." || w == "**";
      }
      default:
        return false;
    }
  }

  // ---- statements --------------------------------------------------------
  void statement_into(NodeId parent) {
    const std::size_t start = i_;
    try {
      statement(parent);
    } catch (const ParseFailure& f) {
      t_.report(f.offset, f.message);
      recover(start, parent);
    }
  }

  void recover(std::size_t start, NodeId parent) {
    const std::uint32_t begin = toks_[start].begin;
    const bool line_done = i_ > start && toks_[i_ - 1].kind == Tok::kNewline;
    if (!line_done) {
      if (i_ == start && peek().kind != Tok::kNewline && peek().kind != Tok::kEnd &&
          peek().kind != Tok::kDedent) {
        take();
      }
      while (peek().kind != Tok::kNewline && peek().kind != Tok::kEnd &&
             peek().kind != Tok::kDedent) {
        if (peek().kind == Tok::kIndent) break;
        take();
      }
      if (peek().kind == Tok::kNewline) take();
    }
    NodeId err = t_.add(kErrorType, begin, std::max(begin, prev_end()));
    attach(parent, err);
    if (peek().kind == Tok::kIndent) skip_indented_block(err);
  }

  void skip_indented_block(NodeId owner) {
    int depth = 0;
    std::uint32_t begin = peek().begin;
    do {
      if (peek().kind == Tok::kIndent) ++depth;
      if (peek().kind == Tok::kDedent) --depth;
      if (peek().kind == Tok::kEnd) break;
      take();
    } while (depth > 0);
    NodeId err = t_.add(kErrorType, begin, prev_end());
    attach(owner, err);
  }

  void statement(NodeId parent) {
    if (peek().kind == Tok::kName) {
      auto w = text(peek());
      if (w == "if") return attach(parent, if_statement());
      if (w == "while") return attach(parent, while_statement());
      if (w == "for") return attach(parent, for_statement());
      if (w == "try") return attach(parent, try_statement());
      if (w == "with") return attach(parent, with_statement());
      if (w == "def") return attach(parent, function_definition());
      if (w == "class") return attach(parent, class_definition());
      if (w == "match" && match_ahead()) return attach(parent, match_statement());
      if (w == "async") {
        if (is_kw("def", 1)) return attach(parent, function_definition());
        if (is_kw("for", 1)) return attach(parent, for_statement());
        if (is_kw("with", 1)) return attach(parent, with_statement());
        fail("unexpected 'async'");
      }
    }
    if (is_op("@")) return attach(parent, decorated_definition());
    simple_statements(parent);
  }

  // `match` is a soft keyword: a statement only when its line ends in ':'
  // and an indented block follows.
  bool match_ahead() const {
    const Token& next = peek(1);
    if (next.kind == Tok::kNewline || next.kind == Tok::kEnd) return false;
    if (next.kind == Tok::kOp) {
      auto w = text(next);
      if (w != "(" && w != "[" && w != "{" && w != "-" && w != "*" && w != "~") return false;
    }
    for (std::size_t k = i_ + 1; k + 1 < toks_.size(); ++k) {
      if (toks_[k].kind == Tok::kEnd) return false;
      if (toks_[k + 1].kind == Tok::kNewline) {
        return toks_[k].kind == Tok::kOp && text(toks_[k]) == ":" && k + 2 < toks_.size() &&
               toks_[k + 2].kind == Tok::kIndent;
      }
    }
    return false;
  }

  NodeId match_statement() {
    NodeId n = node("match_statement", take().begin);
    attach(n, star_expressions(), "subject");
    expect_op(":");
    if (peek().kind != Tok::kNewline) fail("invalid syntax");
    take();
    if (peek().kind != Tok::kIndent) fail("expected an indented block");
    NodeId body = node("block", take().begin);
    while (peek().kind != Tok::kDedent && peek().kind != Tok::kEnd) {
      if (peek().kind == Tok::kNewline) {
        take();
        continue;
      }
      if (!is_kw("case")) fail("expected 'case' block");
      NodeId c = node("case_clause", take().begin);
      NodeId pat = node("case_pattern", peek().begin);
      for (;;) {
        if (is_op("*")) {
          NodeId splat = node("list_splat_pattern", take().begin);
          attach(splat, identifier());
          close(splat);
          attach(pat, splat);
        } else {
          attach(pat, bit_or());
        }
        while (is_kw("as")) {
          take();
          attach(pat, identifier(), "alias");
        }
        if (!is_op(",")) break;
        take();
        if (is_op(":") || is_kw("if")) break;
      }
      close(pat);
      attach(c, pat, "pattern");
      if (is_kw("if")) {
        take();
        attach(c, named_expression(), "guard");
      }
      attach(c, suite(), "consequence");
      close(c);
      attach(body, c);
    }
    close(body);
    if (peek().kind == Tok::kDedent) take();
    attach(n, body, "body");
    close(n);
    return n;
  }

  void simple_statements(NodeId parent) {
    for (;;) {
      attach(parent, small_statement());
      if (is_op(";")) {
        take();
        if (peek().kind == Tok::kNewline || peek().kind == Tok::kEnd) break;
        continue;
      }
      break;
    }
    if (peek().kind == Tok::kNewline) {
      take();
    } else if (peek().kind != Tok::kEnd && peek().kind != Tok::kDedent) {
      fail("invalid syntax");
    }
  }

  bool at_statement_end() const {
    return peek().kind == Tok::kNewline || peek().kind == Tok::kEnd || is_op(";");
  }

  NodeId small_statement() {
    const Token& first = peek();
    const std::uint32_t b = first.begin;
    if (first.kind == Tok::kName) {
      auto w = text(first);
      if (w == "pass") return leaf("pass_statement", take());
      if (w == "break") return leaf("break_statement", take());
      if (w == "continue") return leaf("continue_statement", take());
      if (w == "return") {
        take();
        NodeId n = node("return_statement", b);
        if (!at_statement_end()) attach(n, star_expressions());
        close(n);
        return n;
      }
      if (w == "raise") {
        take();
        NodeId n = node("raise_statement", b);
        if (!at_statement_end()) {
          attach(n, test());
          if (is_kw("from")) {
            take();
            attach(n, test(), "cause");
          }
        }
        close(n);
        return n;
      }
      if (w == "global" || w == "nonlocal") {
        take();
        NodeId n = node(w == "global" ? "global_statement" : "nonlocal_statement", b);
        attach(n, identifier());
        while (is_op(",")) {
          take();
          attach(n, identifier());
        }
        close(n);
        return n;
      }
      if (w == "del") {
        take();
        NodeId n = node("delete_statement", b);
        attach(n, star_expressions());
        close(n);
        return n;
      }
      if (w == "assert") {
        take();
        NodeId n = node("assert_statement", b);
        attach(n, test());
        if (is_op(",")) {
          take();
          attach(n, test());
        }
        close(n);
        return n;
      }
      if (w == "import") return import_statement();
      if (w == "from") return import_from_statement();
    }
    return expression_statement();
  }

  NodeId dotted_name() {
    const std::uint32_t b = peek().begin;
    NodeId n = node("dotted_name", b);
    attach(n, identifier());
    while (is_op(".")) {
      take();
      attach(n, identifier());
    }
    close(n);
    return n;
  }

  NodeId import_statement() {
    const std::uint32_t b = take().begin;
    NodeId n = node("import_statement", b);
    do {
      if (is_op(",")) take();
      const std::uint32_t ab = peek().begin;
      NodeId name = dotted_name();
      if (is_kw("as")) {
        take();
        NodeId alias = node("aliased_import", ab);
        attach(alias, name, "name");
        attach(alias, identifier(), "alias");
        close(alias);
        name = alias;
      }
      attach(n, name, "name");
    } while (is_op(","));
    close(n);
    return n;
  }

  NodeId import_from_statement() {
    const std::uint32_t b = take().begin;
    NodeId n = node("import_from_statement", b);
    const std::uint32_t mb = peek().begin;
    bool relative = false;
    while (is_op(".") || is_op("...")) {
      take();
      relative = true;
    }
    if (!is_kw("import")) {
      NodeId mod = dotted_name();
      if (relative) {
        NodeId rel = node("relative_import", mb);
        attach(rel, mod);
        close(rel);
        mod = rel;
      }
      attach(n, mod, "module_name");
    } else if (relative) {
      NodeId rel = node("relative_import", mb);
      close(rel);
      attach(n, rel, "module_name");
    } else {
      fail("expected module name");
    }
    expect_kw("import");
    if (is_op("*")) {
      attach(n, leaf("wildcard_import", take()));
      close(n);
      return n;
    }
    const bool paren = is_op("(");
    if (paren) take();
    do {
      if (is_op(",")) {
        take();
        if (paren && is_op(")")) break;
      }
      const std::uint32_t ab = peek().begin;
      NodeId name = dotted_name();
      if (is_kw("as")) {
        take();
        NodeId alias = node("aliased_import", ab);
        attach(alias, name, "name");
        attach(alias, identifier(), "alias");
        close(alias);
        name = alias;
      }
      attach(n, name, "name");
    } while (is_op(","));
    if (paren) expect_op(")");
    close(n);
    return n;
  }

  bool is_augassign() const {
    if (peek().kind != Tok::kOp) return false;
    static constexpr std::array<std::string_view, 13> kAug = {
        "+=", "-=", "*=", "/=", "//=", "%=", "@=", "&=", "|=", "^=", ">>=", "<<=", "**="};
    auto w = text(peek());
    return std::find(kAug.begin(), kAug.end(), w) != kAug.end();
  }

  NodeId rhs() { return is_kw("yield") ? yield_expression() : star_expressions(); }

  void check_target(NodeId n, bool single) const {
    const Node& node = t_.node(n);
    const auto type = node.type;
    if (type == "identifier" || type == "attribute" || type == "subscript") return;
    if (type == "parenthesized_expression" && node.children.size() == 1) {
      check_target(node.children[0], single);
      return;
    }
    if (!single) {
      if (type == "tuple" || type == "list" || type == "expression_list" ||
          type == "pattern_list") {
        for (NodeId c : node.children) check_target(c, false);
        return;
      }
      if ((type == "list_splat" ||
           type == "list_splat_pattern") &&
          node.children.size() == 1) {
        check_target(node.children[0], false);
        return;
      }
    }
    throw ParseFailure{node.begin, "cannot assign to expression"};
  }

  NodeId expression_statement() {
    const std::uint32_t b = peek().begin;
    NodeId lhs = rhs();
    NodeId stmt = node("expression_statement", b);
    if (is_op(":")) {
      take();
      check_target(lhs, true);
      NodeId a = node("assignment", b);
      attach(a, lhs, "left");
      attach(a, test(), "type");
      if (is_op("=")) {
        take();
        attach(a, rhs(), "right");
      }
      close(a);
      attach(stmt, a);
    } else if (is_op("=")) {
      std::vector<NodeId> chain{lhs};
      while (is_op("=")) {
        take();
        chain.push_back(rhs());
      }
      for (std::size_t k = 0; k + 1 < chain.size(); ++k) check_target(chain[k], false);
      NodeId right = chain.back();
      for (std::size_t k = chain.size() - 1; k-- > 0;) {
        NodeId a = t_.add("assignment", t_.node(chain[k]).begin, t_.node(right).end);
        attach(a, chain[k], "left");
        attach(a, right, "right");
        right = a;
      }
      attach(stmt, right);
    } else if (is_augassign()) {
      check_target(lhs, true);
      NodeId a = node("augmented_assignment", b);
      attach(a, lhs, "left");
      attach(a, leaf("operator", take()), "operator");
      attach(a, rhs(), "right");
      close(a);
      attach(stmt, a);
    } else {
      attach(stmt, lhs);
    }
    close(stmt);
    return stmt;
  }

  NodeId block() {
    const std::uint32_t b = peek().begin;
    NodeId n = node("block", b);
    if (peek().kind == Tok::kNewline) {
      take();
      if (peek().kind != Tok::kIndent) fail("expected an indented block");
      take();
      while (peek().kind != Tok::kDedent && peek().kind != Tok::kEnd) {
        if (peek().kind == Tok::kNewline) {
          take();
          continue;
        }
        if (peek().kind == Tok::kIndent) {
          t_.report(peek().begin, "unexpected indent");
          skip_indented_block(n);
          continue;
        }
        statement_into(n);
      }
      close(n);
      if (peek().kind == Tok::kDedent) take();
      return n;
    }
    simple_statements(n);
    close(n);
    return n;
  }

  NodeId suite() {
    expect_op(":");
    return block();
  }

  NodeId if_statement() {
    const std::uint32_t b = take().begin;
    NodeId n = node("if_statement", b);
    attach(n, named_expression(), "condition");
    attach(n, suite(), "consequence");
    while (is_kw("elif")) {
      NodeId e = node("elif_clause", take().begin);
      attach(e, named_expression(), "condition");
      attach(e, suite(), "consequence");
      close(e);
      attach(n, e, "alternative");
    }
    if (is_kw("else")) attach(n, else_clause(), "alternative");
    close(n);
    return n;
  }

  NodeId else_clause() {
    NodeId e = node("else_clause", take().begin);
    attach(e, suite(), "body");
    close(e);
    return e;
  }

  NodeId while_statement() {
    NodeId n = node("while_statement", take().begin);
    attach(n, named_expression(), "condition");
    attach(n, suite(), "body");
    if (is_kw("else")) attach(n, else_clause(), "alternative");
    close(n);
    return n;
  }

  NodeId for_statement() {
    const std::uint32_t b = peek().begin;
    if (is_kw("async")) take();
    expect_kw("for");
    NodeId n = node("for_statement", b);
    NodeId left = target_list();
    check_target(left, false);
    attach(n, left, "left");
    expect_kw("in");
    attach(n, star_expressions(), "right");
    attach(n, suite(), "body");
    if (is_kw("else")) attach(n, else_clause(), "alternative");
    close(n);
    return n;
  }

  NodeId try_statement() {
    NodeId n = node("try_statement", take().begin);
    attach(n, suite(), "body");
    bool handled = false;
    while (is_kw("except")) {
      handled = true;
      NodeId e = node("except_clause", take().begin);
      if (is_op("*")) take();
      if (!is_op(":")) {
        attach(e, test());
        if (is_kw("as")) {
          take();
          attach(e, identifier(), "alias");
        } else if (is_op(",")) {
          while (is_op(",")) {
            take();
            attach(e, test());
          }
        }
      }
      attach(e, suite(), "body");
      close(e);
      attach(n, e);
    }
    if (is_kw("else")) attach(n, else_clause());
    if (is_kw("finally")) {
      handled = true;
      NodeId f = node("finally_clause", take().begin);
      attach(f, suite(), "body");
      close(f);
      attach(n, f);
    }
    if (!handled) fail("expected 'except' or 'finally' block");
    close(n);
    return n;
  }

  // Looks ahead from an opening '(' for an `as` at nesting depth one before
  // the matching ')', which marks a parenthesised with-item list.
  bool parenthesized_with_items() const {
    int depth = 0;
    for (std::size_t k = i_; k < toks_.size(); ++k) {
      const Token& tok = toks_[k];
      if (tok.kind == Tok::kOp) {
        auto w = text(tok);
        if (w == "(" || w == "[" || w == "{") ++depth;
        if (w == ")" || w == "]" || w == "}") {
          if (--depth == 0) {
            return k + 1 < toks_.size() && toks_[k + 1].kind == Tok::kOp &&
                   text(toks_[k + 1]) == ":";
          }
        }
      }
      if (tok.kind == Tok::kName && depth == 1 && text(tok) == "as") return true;
      if (tok.kind == Tok::kNewline || tok.kind == Tok::kEnd) return false;
    }
    return false;
  }

  NodeId with_item() {
    NodeId item = node("with_item", peek().begin);
    attach(item, test(), "value");
    if (is_kw("as")) {
      take();
      attach(item, target_atom(), "alias");
    }
    close(item);
    return item;
  }

  NodeId with_statement() {
    const std::uint32_t b = peek().begin;
    if (is_kw("async")) take();
    expect_kw("with");
    NodeId n = node("with_statement", b);
    NodeId clause = node("with_clause", peek().begin);
    const bool paren = is_op("(") && parenthesized_with_items();
    if (paren) take();
    do {
      if (is_op(",")) {
        take();
        if (paren && is_op(")")) break;
      }
      attach(clause, with_item());
    } while (is_op(","));
    if (paren) expect_op(")");
    close(clause);
    attach(n, clause);
    attach(n, suite(), "body");
    close(n);
    return n;
  }

  NodeId function_definition() {
    const std::uint32_t b = peek().begin;
    if (is_kw("async")) take();
    expect_kw("def");
    NodeId n = node("function_definition", b);
    attach(n, identifier(), "name");
    if (is_op("[")) attach(n, type_parameters(), "type_parameters");
    attach(n, parameters(), "parameters");
    if (is_op("->")) {
      take();
      attach(n, test(), "return_type");
    }
    attach(n, suite(), "body");
    close(n);
    return n;
  }

  NodeId type_parameters() {
    NodeId n = node("type_parameter", take().begin);
    while (!is_op("]")) {
      if (is_op(",")) {
        take();
        continue;
      }
      if (is_op("*") || is_op("**")) take();
      attach(n, identifier());
      if (is_op(":")) {
        take();
        attach(n, test());
      }
    }
    take();
    close(n);
    return n;
  }

  NodeId parameter(bool annotations) {
    const std::uint32_t b = peek().begin;
    if (is_op("/")) return leaf("positional_separator", take());
    if (is_op("*") || is_op("**")) {
      const bool dict = is_op("**");
      take();
      if (!dict && (is_op(",") || is_op(")") || is_op(":"))) {
        return t_.add("keyword_separator", b, prev_end());
      }
      NodeId n = node(dict ? "dictionary_splat_pattern" : "list_splat_pattern", b);
      attach(n, identifier());
      if (annotations && is_op(":")) {
        take();
        attach(n, test(), "type");
      }
      close(n);
      return n;
    }
    NodeId name = identifier();
    NodeId type = kNoNode;
    if (annotations && is_op(":")) {
      take();
      type = test();
    }
    if (is_op("=")) {
      take();
      NodeId n = node(type == kNoNode ? "default_parameter" : "typed_default_parameter", b);
      attach(n, name, "name");
      if (type != kNoNode) attach(n, type, "type");
      attach(n, test(), "value");
      close(n);
      return n;
    }
    if (type != kNoNode) {
      NodeId n = node("typed_parameter", b);
      attach(n, name);
      attach(n, type, "type");
      close(n);
      return n;
    }
    return name;
  }

  NodeId parameters() {
    NodeId n = node("parameters", expect_op("(").begin);
    while (!is_op(")")) {
      attach(n, parameter(true));
      if (!is_op(")")) expect_op(",");
    }
    take();
    close(n);
    return n;
  }

  NodeId class_definition() {
    NodeId n = node("class_definition", take().begin);
    attach(n, identifier(), "name");
    if (is_op("[")) attach(n, type_parameters(), "type_parameters");
    if (is_op("(")) attach(n, argument_list(), "superclasses");
    attach(n, suite(), "body");
    close(n);
    return n;
  }

  NodeId decorated_definition() {
    NodeId n = node("decorated_definition", peek().begin);
    while (is_op("@")) {
      NodeId d = node("decorator", take().begin);
      attach(d, named_expression());
      close(d);
      attach(n, d);
      if (peek().kind != Tok::kNewline) fail("expected newline after decorator");
      take();
    }
    if (is_kw("def") || (is_kw("async") && is_kw("def", 1))) {
      attach(n, function_definition(), "definition");
    } else if (is_kw("class")) {
      attach(n, class_definition(), "definition");
    } else {
      fail("expected function or class definition after decorator");
    }
    close(n);
    return n;
  }

  // ---- expressions -------------------------------------------------------
  NodeId yield_expression() {
    NodeId n = node("yield", take().begin);
    if (is_kw("from")) {
      take();
      attach(n, test());
    } else if (starts_expression()) {
      attach(n, star_expressions());
    }
    close(n);
    return n;
  }

  NodeId star_expression() {
    if (is_op("*")) {
      NodeId n = node("list_splat", take().begin);
      attach(n, bit_or());
      close(n);
      return n;
    }
    return named_expression();
  }

  NodeId star_expressions() {
    const std::uint32_t b = peek().begin;
    NodeId first = star_expression();
    if (!is_op(",")) return first;
    NodeId list = node("expression_list", b);
    attach(list, first);
    while (is_op(",")) {
      take();
      if (!starts_expression()) break;
      attach(list, star_expression());
    }
    close(list);
    return list;
  }

  NodeId target_atom() {
    if (is_op("*")) {
      NodeId n = node("list_splat_pattern", take().begin);
      attach(n, bit_or());
      close(n);
      return n;
    }
    return bit_or();
  }

  NodeId target_list() {
    const std::uint32_t b = peek().begin;
    NodeId first = target_atom();
    if (!is_op(",")) return first;
    NodeId list = node("pattern_list", b);
    attach(list, first);
    while (is_op(",")) {
      take();
      if (is_kw("in") || is_op("=")) break;
      attach(list, target_atom());
    }
    close(list);
    return list;
  }

  NodeId named_expression() {
    if (peek().kind == Tok::kName && is_op(":=", 1) && !is_keyword(text(peek()))) {
      NodeId n = node("named_expression", peek().begin);
      attach(n, identifier(), "name");
      take();
      attach(n, test(), "value");
      close(n);
      return n;
    }
    return test();
  }

  NodeId test() {
    if (is_kw("lambda")) return lambda();
    const std::uint32_t b = peek().begin;
    NodeId x = or_test();
    if (is_kw("if")) {
      take();
      NodeId n = node("conditional_expression", b);
      attach(n, x);
      attach(n, or_test());
      expect_kw("else");
      attach(n, test());
      close(n);
      return n;
    }
    return x;
  }

  NodeId test_no_cond() { return is_kw("lambda") ? lambda() : or_test(); }

  NodeId lambda() {
    NodeId n = node("lambda", take().begin);
    if (!is_op(":")) {
      NodeId params = node("lambda_parameters", peek().begin);
      while (!is_op(":")) {
        attach(params, parameter(false));
        if (!is_op(":")) expect_op(",");
      }
      close(params);
      attach(n, params, "parameters");
    }
    expect_op(":");
    attach(n, test(), "body");
    close(n);
    return n;
  }

  NodeId binary(std::string_view type, NodeId left, NodeId op, NodeId right) {
    NodeId n = t_.add(type, t_.node(left).begin, t_.node(right).end);
    attach(n, left, "left");
    attach(n, op, "operator");
    attach(n, right, "right");
    return n;
  }

  NodeId or_test() {
    NodeId left = and_test();
    while (is_kw("or")) {
      NodeId op = leaf("operator", take());
      left = binary("boolean_operator", left, op, and_test());
    }
    return left;
  }

  NodeId and_test() {
    NodeId left = not_test();
    while (is_kw("and")) {
      NodeId op = leaf("operator", take());
      left = binary("boolean_operator", left, op, not_test());
    }
    return left;
  }

  NodeId not_test() {
    if (is_kw("not")) {
      NodeId n = node("not_operator", take().begin);
      attach(n, not_test(), "argument");
      close(n);
      return n;
    }
    return comparison();
  }

  // Returns the operator leaf when the cursor is on a comparison operator.
  NodeId comparison_operator() {
    if (peek().kind == Tok::kOp) {
      auto w = text(peek());
      if (w == "<" || w == ">" || w == "==" || w == ">=" || w == "<=" || w == "!=") {
        return leaf("operator", take());
      }
      return kNoNode;
    }
    if (is_kw("in")) return leaf("operator", take());
    if (is_kw("not") && is_kw("in", 1)) {
      const std::uint32_t b = take().begin;
      return t_.add("operator", b, take().end);
    }
    if (is_kw("is")) {
      const std::uint32_t b = take().begin;
      if (is_kw("not")) return t_.add("operator", b, take().end);
      return t_.add("operator", b, prev_end());
    }
    return kNoNode;
  }

  NodeId comparison() {
    NodeId first = bit_or();
    NodeId op = comparison_operator();
    if (op == kNoNode) return first;
    NodeId n = t_.add("comparison_operator", t_.node(first).begin, t_.node(first).end);
    attach(n, first);
    while (op != kNoNode) {
      attach(n, op, "operators");
      attach(n, bit_or());
      op = comparison_operator();
    }
    close(n);
    return n;
  }

  template <typename Next>
  NodeId left_assoc(std::initializer_list<std::string_view> ops, Next next) {
    NodeId left = (this->*next)();
    for (;;) {
      bool matched = false;
      for (auto op : ops) {
        if (is_op(op)) {
          NodeId o = leaf("operator", take());
          left = binary("binary_operator", left, o, (this->*next)());
          matched = true;
          break;
        }
      }
      if (!matched) return left;
    }
  }

  NodeId bit_or() { return left_assoc({"|"}, &Parser::bit_xor); }
  NodeId bit_xor() { return left_assoc({"^"}, &Parser::bit_and); }
  NodeId bit_and() { return left_assoc({"&"}, &Parser::shift); }
  NodeId shift() { return left_assoc({"<<", ">>"}, &Parser::arith); }
  NodeId arith() { return left_assoc({"+", "-"}, &Parser::term); }
  NodeId term() { return left_assoc({"*", "/", "//", "%", "@"}, &Parser::factor); }

  NodeId factor() {
    if (is_op("+") || is_op("-") || is_op("~")) {
      NodeId n = node("unary_operator", peek().begin);
      attach(n, leaf("operator", take()), "operator");
      attach(n, factor(), "argument");
      close(n);
      return n;
    }
    return power();
  }

  NodeId power() {
    NodeId base = await_primary();
    if (is_op("**")) {
      NodeId op = leaf("operator", take());
      return binary("binary_operator", base, op, factor());
    }
    return base;
  }

  NodeId await_primary() {
    if (is_kw("await")) {
      NodeId n = node("await", take().begin);
      attach(n, primary());
      close(n);
      return n;
    }
    return primary();
  }

  NodeId primary() {
    NodeId e = atom();
    for (;;) {
      if (is_op("(")) {
        NodeId call = t_.add("call", t_.node(e).begin, t_.node(e).end);
        attach(call, e, "function");
        attach(call, argument_list(), "arguments");
        close(call);
        e = call;
      } else if (is_op("[")) {
        NodeId sub = t_.add("subscript", t_.node(e).begin, t_.node(e).end);
        attach(sub, e, "value");
        take();
        do {
          if (is_op(",")) {
            take();
            if (is_op("]")) break;
          }
          attach(sub, slice_item(), "subscript");
        } while (is_op(","));
        expect_op("]");
        close(sub);
        e = sub;
      } else if (is_op(".")) {
        take();
        NodeId attr = t_.add("attribute", t_.node(e).begin, t_.node(e).end);
        attach(attr, e, "object");
        attach(attr, identifier(), "attribute");
        close(attr);
        e = attr;
      } else {
        return e;
      }
    }
  }

  NodeId slice_item() {
    const std::uint32_t b = peek().begin;
    NodeId start = kNoNode;
    if (!is_op(":")) {
      start = star_expression();
      if (!is_op(":")) return start;
    }
    NodeId n = node("slice", b);
    attach(n, start);
    for (int k = 0; k < 2 && is_op(":"); ++k) {
      take();
      if (!is_op(":") && !is_op("]") && !is_op(",")) attach(n, test());
    }
    close(n);
    return n;
  }

  NodeId argument_list() {
    const std::uint32_t b = expect_op("(").begin;
    NodeId n = node("argument_list", b);
    bool seen_keyword = false;
    bool seen_dict_splat = false;
    while (!is_op(")")) {
      const std::uint32_t ab = peek().begin;
      const bool keyword =
          peek().kind == Tok::kName && is_op("=", 1) && !is_keyword(text(peek()));
      if (!keyword && !is_op("**") &&
          (seen_dict_splat || (seen_keyword && !is_op("*")))) {
        fail("positional argument follows keyword argument");
      }
      seen_keyword = seen_keyword || keyword;
      seen_dict_splat = seen_dict_splat || is_op("**");
      if (is_op("*") || is_op("**")) {
        const bool dict = is_op("**");
        take();
        NodeId s = node(dict ? "dictionary_splat" : "list_splat", ab);
        attach(s, test());
        close(s);
        attach(n, s);
      } else if (peek().kind == Tok::kName && is_op("=", 1) && !is_keyword(text(peek()))) {
        NodeId kw = node("keyword_argument", ab);
        attach(kw, identifier(), "name");
        take();
        attach(kw, test(), "value");
        close(kw);
        attach(n, kw);
      } else {
        NodeId arg = named_expression();
        if (is_kw("for") || (is_kw("async") && is_kw("for", 1))) {
          NodeId gen = node("generator_expression", ab);
          attach(gen, arg, "body");
          comprehension_clauses(gen);
          close(gen);
          arg = gen;
        }
        attach(n, arg);
      }
      if (!is_op(")")) expect_op(",");
    }
    take();
    close(n);
    return n;
  }

  void comprehension_clauses(NodeId owner) {
    while (is_kw("for") || (is_kw("async") && is_kw("for", 1))) {
      const std::uint32_t b = peek().begin;
      if (is_kw("async")) take();
      take();
      NodeId f = node("for_in_clause", b);
      attach(f, target_list(), "left");
      expect_kw("in");
      attach(f, test_no_cond(), "right");
      close(f);
      attach(owner, f);
      while (is_kw("if")) {
        NodeId c = node("if_clause", take().begin);
        attach(c, test_no_cond());
        close(c);
        attach(owner, c);
      }
    }
  }

  bool at_comprehension() const { return is_kw("for") || (is_kw("async") && is_kw("for", 1)); }

  NodeId atom() {
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::kName: {
        auto w = text(tok);
        if (w == "True") return leaf("true", take());
        if (w == "False") return leaf("false", take());
        if (w == "None") return leaf("none", take());
        if (is_keyword(w)) fail("invalid syntax: unexpected '" + std::string(w) + "'");
        return leaf("identifier", take());
      }
      case Tok::kNumber: {
        auto w = text(tok);
        const bool hex = w.size() > 1 && (w[1] == 'x' || w[1] == 'X');
        const bool is_float = !hex && w.find_first_of(".eEjJ") != std::string_view::npos;
        return leaf(is_float ? "float" : "integer", take());
      }
      case Tok::kString:
        return strings();
      case Tok::kOp:
        break;
      default:
        fail("invalid syntax");
    }
    if (is_op("...")) return leaf("ellipsis", take());
    if (is_op("(")) return paren_atom();
    if (is_op("[")) return list_atom();
    if (is_op("{")) return brace_atom();
    fail("invalid syntax");
  }

  NodeId strings() {
    const std::uint32_t b = peek().begin;
    std::vector<NodeId> parts;
    while (peek().kind == Tok::kString) parts.push_back(string_literal(take()));
    if (parts.size() == 1) return parts.front();
    NodeId n = node("concatenated_string", b);
    for (NodeId p : parts) attach(n, p);
    close(n);
    return n;
  }

  NodeId string_literal(const Token& tok) {
    NodeId n = leaf("string", tok);
    std::uint32_t p = tok.begin;
    bool fmt = false;
    bool raw = false;
    while (s_[p] != '\'' && s_[p] != '"') {
      const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s_[p])));
      fmt |= c == 'f' || c == 't';
      raw |= c == 'r';
      ++p;
    }
    if (!fmt) return n;
    const char q = s_[p];
    const std::uint32_t quote_len =
        (p + 2 < tok.end && s_[p + 1] == q && s_[p + 2] == q && tok.end - p >= 6) ? 3 : 1;
    const std::uint32_t cb = p + quote_len;
    const std::uint32_t ce = tok.end >= cb + quote_len ? tok.end - quote_len : cb;
    replacement_fields(n, cb, ce, raw);
    return n;
  }

  void replacement_fields(NodeId owner, std::uint32_t p, std::uint32_t end, bool raw);

  NodeId paren_atom() {
    const std::uint32_t b = take().begin;
    if (is_op(")")) {
      take();
      return t_.add("tuple", b, prev_end());
    }
    if (is_kw("yield")) {
      NodeId n = node("parenthesized_expression", b);
      attach(n, yield_expression());
      expect_op(")");
      close(n);
      return n;
    }
    NodeId first = star_expression();
    if (at_comprehension()) {
      NodeId gen = node("generator_expression", b);
      attach(gen, first, "body");
      comprehension_clauses(gen);
      expect_op(")");
      close(gen);
      return gen;
    }
    if (is_op(",")) {
      NodeId tup = node("tuple", b);
      attach(tup, first);
      while (is_op(",")) {
        take();
        if (is_op(")")) break;
        attach(tup, star_expression());
      }
      expect_op(")");
      close(tup);
      return tup;
    }
    expect_op(")");
    NodeId n = node("parenthesized_expression", b);
    attach(n, first);
    close(n);
    return n;
  }

  NodeId list_atom() {
    const std::uint32_t b = take().begin;
    if (is_op("]")) {
      take();
      return t_.add("list", b, prev_end());
    }
    NodeId first = star_expression();
    if (at_comprehension()) {
      NodeId comp = node("list_comprehension", b);
      attach(comp, first, "body");
      comprehension_clauses(comp);
      expect_op("]");
      close(comp);
      return comp;
    }
    NodeId list = node("list", b);
    attach(list, first);
    while (is_op(",")) {
      take();
      if (is_op("]")) break;
      attach(list, star_expression());
    }
    expect_op("]");
    close(list);
    return list;
  }

  NodeId dict_entry() {
    const std::uint32_t b = peek().begin;
    if (is_op("**")) {
      take();
      NodeId s = node("dictionary_splat", b);
      attach(s, bit_or());
      close(s);
      return s;
    }
    NodeId pair = node("pair", b);
    attach(pair, test(), "key");
    expect_op(":");
    attach(pair, test(), "value");
    close(pair);
    return pair;
  }

  NodeId brace_atom() {
    const std::uint32_t b = take().begin;
    if (is_op("}")) {
      take();
      return t_.add("dictionary", b, prev_end());
    }
    bool is_dict = is_op("**");
    NodeId first;
    if (is_dict) {
      first = dict_entry();
    } else {
      const std::uint32_t fb = peek().begin;
      NodeId key = star_expression();
      if (is_op(":")) {
        take();
        is_dict = true;
        first = node("pair", fb);
        attach(first, key, "key");
        attach(first, test(), "value");
        close(first);
      } else {
        first = key;
      }
    }
    if (at_comprehension()) {
      NodeId comp = node(is_dict ? "dictionary_comprehension" : "set_comprehension", b);
      attach(comp, first, "body");
      comprehension_clauses(comp);
      expect_op("}");
      close(comp);
      return comp;
    }
    NodeId n = node(is_dict ? "dictionary" : "set", b);
    attach(n, first);
    while (is_op(",")) {
      take();
      if (is_op("}")) break;
      attach(n, is_dict ? dict_entry() : star_expression());
    }
    expect_op("}");
    close(n);
    return n;
  }

  Tree& t_;
  const std::string& s_;
  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

// Finds the replacement fields of an f-string body [p, end) and parses each
// expression with a nested parser over the same source buffer.
void Parser::replacement_fields(NodeId owner, std::uint32_t p, std::uint32_t end, bool raw) {
  while (p < end) {
    const char c = s_[p];
    if (c == '\\' && !raw) {
      p += 2;
      continue;
    }
    if (c == '}') {
      if (p + 1 < end && s_[p + 1] == '}') {
        p += 2;
        continue;
      }
      throw ParseFailure{p, "f-string: single '}' is not allowed"};
    }
    if (c != '{') {
      ++p;
      continue;
    }
    if (p + 1 < end && s_[p + 1] == '{') {
      p += 2;
      continue;
    }
    int depth = 0;
    std::uint32_t q = p + 1;
    std::uint32_t expr_end = 0;
    std::uint32_t spec_begin = 0;
    std::uint32_t close_brace = 0;
    while (q < end) {
      const char d = s_[q];
      if (d == '\'' || d == '"') {
        const char quote = d;
        ++q;
        while (q < end && s_[q] != quote) q += s_[q] == '\\' ? 2 : 1;
        ++q;
        continue;
      }
      if (d == '(' || d == '[' || d == '{') {
        ++depth;
      } else if ((d == ')' || d == ']') && depth > 0) {
        --depth;
      } else if (d == '}') {
        if (depth == 0) {
          close_brace = q;
          break;
        }
        --depth;
      } else if (depth == 0 && expr_end == 0) {
        if (d == '!' && q + 1 < end && s_[q + 1] != '=') {
          expr_end = q;
        } else if (d == ':') {
          expr_end = q;
          spec_begin = q + 1;
        } else if (d == '=' && q + 1 < end &&
                   (s_[q + 1] == '}' || s_[q + 1] == '!' || s_[q + 1] == ':') &&
                   std::strchr("=!<>", s_[q - 1]) == nullptr) {
          expr_end = q;
        }
      }
      ++q;
    }
    if (close_brace == 0) throw ParseFailure{p, "f-string: expecting '}'"};
    if (expr_end == 0) expr_end = close_brace;
    std::string_view expr = std::string_view(s_).substr(p + 1, expr_end - p - 1);
    if (expr.find_first_not_of(" \t\r\n") == std::string_view::npos) {
      throw ParseFailure{p, "f-string: empty expression not allowed"};
    }
    NodeId interp = t_.add("interpolation", p, close_brace + 1);
    Lexer lexer(t_, p + 1, expr_end, true);
    Parser sub(t_, lexer.run());
    t_.attach(interp, sub.parse_embedded_expression(), "expression");
    if (spec_begin != 0) replacement_fields(interp, spec_begin, close_brace, raw);
    t_.attach(owner, interp);
    p = close_brace + 1;
  }
}

}  // namespace

Tree parse_python(std::string source) {
  Tree tree(std::move(source));
  Lexer lexer(tree, 0, static_cast<std::uint32_t>(tree.source().size()), false);
  Parser parser(tree, lexer.run());
  tree.set_root(parser.parse_module());
  tree.finish();
  return tree;
}

const std::set<std::string_view>& python_node_types() {
  static const std::set<std::string_view> kTypes = {
      "ERROR", "aliased_import", "argument_list", "assert_statement", "assignment",
      "attribute", "augmented_assignment", "await", "binary_operator", "block",
      "boolean_operator", "break_statement", "call", "case_clause", "case_pattern",
      "class_definition",
      "comparison_operator", "concatenated_string", "conditional_expression",
      "continue_statement", "decorated_definition", "decorator", "default_parameter",
      "delete_statement", "dictionary", "dictionary_comprehension", "dictionary_splat",
      "dictionary_splat_pattern", "dotted_name", "elif_clause", "ellipsis", "else_clause",
      "except_clause", "expression_list", "expression_statement", "false", "finally_clause",
      "float", "for_in_clause", "for_statement", "function_definition",
      "generator_expression", "global_statement", "identifier", "if_clause", "if_statement",
      "import_from_statement", "import_statement", "integer", "interpolation",
      "keyword_argument", "keyword_separator", "lambda", "lambda_parameters", "list",
      "list_comprehension", "list_splat", "list_splat_pattern", "match_statement", "module",
      "named_expression", "none", "nonlocal_statement", "not_operator", "operator", "pair",
      "parameters", "parenthesized_expression", "pass_statement", "pattern_list",
      "positional_separator", "raise_statement", "relative_import", "return_statement",
      "set", "set_comprehension", "slice", "string", "subscript", "true", "try_statement",
      "tuple", "type_parameter", "typed_default_parameter", "typed_parameter",
      "unary_operator", "while_statement", "wildcard_import", "with_clause", "with_item",
      "with_statement", "yield"};
  return kTypes;
}

const std::set<std::string_view>& python_fields() {
  static const std::set<std::string_view> kFields = {
      "alias", "alternative", "argument", "arguments", "attribute", "body", "cause",
      "condition", "consequence", "definition", "expression", "function", "guard", "key",
      "left",
      "module_name", "name", "object", "operator", "operators", "parameters",
      "pattern", "return_type", "right", "subject", "subscript", "superclasses", "type", "type_parameters",
      "value"};
  return kFields;
}

}  // namespace forge::syntax
