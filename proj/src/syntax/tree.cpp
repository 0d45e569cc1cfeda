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

#include "forge/syntax/tree.hpp"

#include <algorithm>
#include <array>

namespace forge::syntax {

Tree::Tree(std::string source) : source_(std::move(source)) {
  line_starts_.push_back(0);
  for (std::uint32_t i = 0; i < source_.size(); ++i) {
    if (source_[i] == '\n') line_starts_.push_back(i + 1);
  }
}

std::string_view Tree::text(NodeId id) const {
  const Node& n = nodes_[id];
  return std::string_view(source_).substr(n.begin, n.end - n.begin);
}

NodeId Tree::field(NodeId id, std::string_view name) const {
  for (const auto& [f, child] : nodes_[id].fields) {
    if (f == name) return child;
  }
  return kNoNode;
}

int Tree::line_of(std::uint32_t offset) const {
  auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
  return static_cast<int>(it - line_starts_.begin());
}

NodeId Tree::add(std::string_view type, std::uint32_t begin, std::uint32_t end) {
  Node n;
  n.type = type;
  n.begin = begin;
  n.end = std::max(begin, end);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Tree::attach(NodeId parent, NodeId child, std::string_view field) {
  if (child == kNoNode) return;
  nodes_[parent].children.push_back(child);
  if (!field.empty()) nodes_[parent].fields.emplace_back(field, child);
  nodes_[child].parent = parent;
}

void Tree::set_span(NodeId id, std::uint32_t begin, std::uint32_t end) {
  nodes_[id].begin = begin;
  nodes_[id].end = std::max(begin, end);
}

void Tree::report(std::uint32_t offset, std::string message) {
  offset = std::min<std::uint32_t>(offset, static_cast<std::uint32_t>(source_.size()));
  issues_.push_back({line_of(offset), std::move(message), offset});
}

void Tree::finish() {
  for (auto& n : nodes_) {
    n.start_line = line_of(n.begin);
    n.end_line = n.end > n.begin ? line_of(n.end - 1) : n.start_line;
  }
  std::stable_sort(issues_.begin(), issues_.end(),
                   [](const SyntaxIssue& a, const SyntaxIssue& b) { return a.line < b.line; });
}

std::string Tree::sexp(NodeId id) const {
  std::string out;
  auto rec = [&](auto&& self, NodeId n, std::string_view field, int depth) -> void {
    out.append(static_cast<size_t>(depth) * 2, ' ');
    if (!field.empty()) {
      out += field;
      out += ": ";
    }
    out += '(';
    out += nodes_[n].type;
    if (nodes_[n].children.empty()) {
      out += " \"";
      out += text(n);
      out += '"';
    }
    for (NodeId c : nodes_[n].children) {
      std::string_view f;
      for (const auto& [name, child] : nodes_[n].fields) {
        if (child == c) f = name;
      }
      out += '\n';
      self(self, c, f, depth + 1);
    }
    out += ')';
  };
  if (id != kNoNode) rec(rec, id, {}, 0);
  return out;
}

const Grammar* find_grammar(std::string_view language) {
  static const std::array<Grammar, 2> kGrammars = {{
      {"javascript", &javascript_node_types(), &javascript_fields(), &parse_javascript},
      {"python", &python_node_types(), &python_fields(), &parse_python},
  }};
  for (const auto& g : kGrammars) {
    if (g.language == language) return &g;
  }
  return nullptr;
}

std::vector<std::string_view> registered_languages() {
  return {"javascript", "python"};
}

}  // namespace forge::syntax
