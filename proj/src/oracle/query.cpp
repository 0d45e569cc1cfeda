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

#include "forge/oracle/query.hpp"

#include <cctype>
#include <regex>

#include "forge/error.hpp"

namespace forge::oracle {

namespace detail {

struct Item;

struct Pat {
  bool alternation = false;
  std::string type;  // empty for alternation, "_" for any
  std::vector<Item> items;
  std::vector<std::shared_ptr<const Pat>> alternatives;
  std::string capture;
  std::optional<std::regex> regex;
  bool regex_negated = false;
};

struct Item {
  enum class Kind { kChild, kField, kIndex, kHas, kNot };
  Kind kind = Kind::kChild;
  std::string field;
  int index = 0;
  std::shared_ptr<const Pat> pat;
  std::shared_ptr<const Item> inner;
};

}  // namespace detail

namespace {

using detail::Item;
using detail::Pat;
using syntax::NodeId;
using syntax::Tree;

class Compiler {
 public:
  Compiler(std::string_view text, const syntax::Grammar& grammar)
      : s_(text), grammar_(grammar) {}

  std::shared_ptr<const Pat> run() {
    auto p = pattern();
    skip_space();
    if (pos_ != s_.size()) fail("trailing input");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("query: " + msg + " at offset " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == ';') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool at(char c) {
    skip_space();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  void expect(char c) {
    if (!at(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string word() {
    skip_space();
    const std::size_t b = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
            s_[pos_] == '-')) {
      ++pos_;
    }
    if (b == pos_) fail("expected a name");
    return std::string(s_.substr(b, pos_ - b));
  }

  // Lookahead for `(has` / `(not`.
  bool keyword_group(std::string_view kw) {
    skip_space();
    if (pos_ >= s_.size() || s_[pos_] != '(') return false;
    std::size_t p = pos_ + 1;
    while (p < s_.size() && std::isspace(static_cast<unsigned char>(s_[p]))) ++p;
    if (s_.substr(p, kw.size()) != kw) return false;
    const std::size_t after = p + kw.size();
    if (after < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[after])) ||
                              s_[after] == '_')) {
      return false;
    }
    pos_ = after;
    return true;
  }

  std::regex regex_literal() {
    expect('/');
    std::string body;
    while (pos_ < s_.size() && s_[pos_] != '/') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '/') {
        body += '/';
        pos_ += 2;
        continue;
      }
      body += s_[pos_++];
    }
    if (pos_ >= s_.size()) fail("unterminated regex");
    ++pos_;
    auto flags = std::regex::ECMAScript;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      if (s_[pos_] != 'i') fail(std::string("unknown regex flag '") + s_[pos_] + "'");
      flags |= std::regex::icase;
      ++pos_;
    }
    try {
      return std::regex(body, flags);
    } catch (const std::regex_error& e) {
      fail("bad regex /" + body + "/: " + e.what());
    }
  }

  bool at_suffix() {
    skip_space();
    if (pos_ >= s_.size()) return false;
    const char c = s_[pos_];
    return c == '@' || c == '/' || (c == '!' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '/');
  }

  void suffixes(Pat& p) {
    for (;;) {
      if (at('@')) {
        ++pos_;
        if (!p.capture.empty()) fail("pattern already has a capture");
        p.capture = word();
      } else if (at('/')) {
        if (p.regex) fail("pattern already has a regex");
        p.regex = regex_literal();
      } else if (at('!') && pos_ + 1 < s_.size() && s_[pos_ + 1] == '/') {
        if (p.regex) fail("pattern already has a regex");
        ++pos_;
        p.regex = regex_literal();
        p.regex_negated = true;
      } else {
        return;
      }
    }
  }

  std::shared_ptr<const Pat> pattern() {
    auto p = std::make_shared<Pat>();
    if (at('[')) {
      ++pos_;
      p->alternation = true;
      while (!at(']')) {
        if (pos_ >= s_.size()) fail("unterminated alternation");
        p->alternatives.push_back(pattern());
      }
      ++pos_;
      if (p->alternatives.empty()) fail("empty alternation");
    } else {
      expect('(');
      p->type = word();
      if (p->type != "_" && !grammar_.node_types->count(p->type)) {
        fail("unknown node type '" + p->type + "' for " + std::string(grammar_.language));
      }
      while (!at(')')) {
        if (pos_ >= s_.size()) fail("unterminated pattern");
        if (at_suffix()) {
          suffixes(*p);
          continue;
        }
        p->items.push_back(item());
      }
      ++pos_;
    }
    suffixes(*p);
    return p;
  }

  Item item() {
    Item it;
    if (keyword_group("has")) {
      it.kind = Item::Kind::kHas;
      it.pat = pattern();
      expect(')');
      return it;
    }
    if (keyword_group("not")) {
      it.kind = Item::Kind::kNot;
      it.inner = std::make_shared<Item>(item());
      expect(')');
      return it;
    }
    skip_space();
    if (at('#')) {
      ++pos_;
      const std::size_t b = pos_;
      if (pos_ < s_.size() && s_[pos_] == '-') ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ == b || (pos_ == b + 1 && s_[b] == '-')) fail("expected child index");
      it.kind = Item::Kind::kIndex;
      it.index = std::stoi(std::string(s_.substr(b, pos_ - b)));
      expect(':');
      it.pat = pattern();
      return it;
    }
    if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      it.kind = Item::Kind::kField;
      it.field = word();
      if (!grammar_.fields->count(it.field)) {
        fail("unknown field '" + it.field + "' for " + std::string(grammar_.language));
      }
      expect(':');
      it.pat = pattern();
      return it;
    }
    it.kind = Item::Kind::kChild;
    it.pat = pattern();
    return it;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  const syntax::Grammar& grammar_;
};

class Matcher {
 public:
  explicit Matcher(const Tree& tree) : t_(tree) {}

  bool match(const Pat& p, NodeId n, Captures& caps) const {
    const std::size_t mark = caps.size();
    if (!match_inner(p, n, caps)) {
      caps.resize(mark);
      return false;
    }
    if (!p.capture.empty()) caps.emplace_back(p.capture, n);
    return true;
  }

 private:
  bool match_inner(const Pat& p, NodeId n, Captures& caps) const {
    if (p.alternation) {
      bool any = false;
      for (const auto& alt : p.alternatives) {
        if (match(*alt, n, caps)) {
          any = true;
          break;
        }
      }
      if (!any) return false;
    } else {
      if (p.type != "_" && t_.node(n).type != p.type) return false;
      for (const Item& it : p.items) {
        if (!item(it, n, caps)) return false;
      }
    }
    if (p.regex) {
      const std::string_view text = t_.text(n);
      const bool found = std::regex_search(text.begin(), text.end(), *p.regex);
      if (found == p.regex_negated) return false;
    }
    return true;
  }

  bool item(const Item& it, NodeId n, Captures& caps) const {
    const syntax::Node& node = t_.node(n);
    switch (it.kind) {
      case Item::Kind::kChild:
        for (NodeId c : node.children) {
          if (match(*it.pat, c, caps)) return true;
        }
        return false;
      case Item::Kind::kField:
        for (const auto& [name, c] : node.fields) {
          if (name == it.field && match(*it.pat, c, caps)) return true;
        }
        return false;
      case Item::Kind::kIndex: {
        const auto size = static_cast<int>(node.children.size());
        const int k = it.index < 0 ? size + it.index : it.index;
        if (k < 0 || k >= size) return false;
        return match(*it.pat, node.children[static_cast<std::size_t>(k)], caps);
      }
      case Item::Kind::kHas:
        for (NodeId c : node.children) {
          if (match(*it.pat, c, caps) || item(it, c, caps)) return true;
        }
        return false;
      case Item::Kind::kNot: {
        Captures scratch;
        return !item(*it.inner, n, scratch);
      }
    }
    return false;
  }

  const Tree& t_;
};

}  // namespace

Query Query::compile(std::string_view text, const syntax::Grammar& grammar) {
  Query q;
  q.root_ = Compiler(text, grammar).run();
  q.source_ = std::string(text);
  return q;
}

std::optional<Captures> Query::match(const Tree& tree, NodeId node) const {
  Captures caps;
  if (!Matcher(tree).match(*root_, node, caps)) return std::nullopt;
  return caps;
}

std::string render_message(std::string_view tmpl, const Tree& tree, const Captures& captures) {
  constexpr std::size_t kMaxCapture = 60;
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const std::size_t open = tmpl.find('{', i);
    const std::size_t close = open == std::string_view::npos ? open : tmpl.find('}', open);
    if (open == std::string_view::npos || close == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    out.append(tmpl.substr(i, open - i));
    const std::string_view name = tmpl.substr(open + 1, close - open - 1);
    auto found = std::find_if(captures.begin(), captures.end(),
                              [&](const auto& c) { return c.first == name; });
    if (found == captures.end()) {
      out.append(tmpl.substr(open, close - open + 1));
    } else {
      std::string text;
      bool space = false;
      for (char c : tree.text(found->second)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
          space = !text.empty();
          continue;
        }
        if (space) text += ' ';
        space = false;
        text += c;
      }
      if (text.size() > kMaxCapture) text = text.substr(0, kMaxCapture - 3) + "...";
      out += text;
    }
    i = close + 1;
  }
  return out;
}

}  // namespace forge::oracle
