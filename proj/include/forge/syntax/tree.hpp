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

#pragma once

#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace forge::syntax {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

// A concrete syntax tree node. Punctuation is not materialised; operators and
// literal keywords are leaves. `type` always points at a static string.
struct Node {
  std::string_view type;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  int start_line = 1;
  int end_line = 1;
  NodeId parent = kNoNode;
  std::vector<NodeId> children;
  std::vector<std::pair<std::string_view, NodeId>> fields;
};

struct SyntaxIssue {
  int line = 0;
  std::string message;
  std::uint32_t offset = 0;
};

inline constexpr std::string_view kErrorType = "ERROR";

class Tree {
 public:
  explicit Tree(std::string source);

  const std::string& source() const { return source_; }
  NodeId root() const { return root_; }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_[id]; }
  std::string_view text(NodeId id) const;
  // First child bound to `name`, or kNoNode.
  NodeId field(NodeId id, std::string_view name) const;

  bool has_error() const { return !issues_.empty(); }
  const std::vector<SyntaxIssue>& issues() const { return issues_; }
  int line_of(std::uint32_t offset) const;

  // Builder interface used by the parsers.
  NodeId add(std::string_view type, std::uint32_t begin, std::uint32_t end);
  void attach(NodeId parent, NodeId child, std::string_view field = {});
  void set_span(NodeId id, std::uint32_t begin, std::uint32_t end);
  void set_root(NodeId id) { root_ = id; }
  void report(std::uint32_t offset, std::string message);
  // Fills in line numbers once building is done.
  void finish();

  // Indented S-expression, handy in tests and `forge parse`.
  std::string sexp(NodeId id) const;
  std::string sexp() const { return sexp(root_); }

 private:
  std::string source_;
  std::vector<std::uint32_t> line_starts_;
  std::vector<Node> nodes_;
  std::vector<SyntaxIssue> issues_;
  NodeId root_ = kNoNode;
};

// Thrown inside parsers; never escapes `parse`.
struct ParseFailure {
  std::uint32_t offset;
  std::string message;
};

struct Grammar {
  std::string_view language;
  const std::set<std::string_view>* node_types;
  const std::set<std::string_view>* fields;
  Tree (*parse)(std::string source);
};

Tree parse_python(std::string source);
Tree parse_javascript(std::string source);

const std::set<std::string_view>& python_node_types();
const std::set<std::string_view>& python_fields();
const std::set<std::string_view>& javascript_node_types();
const std::set<std::string_view>& javascript_fields();

// nullptr when no grammar is registered for `language`.
const Grammar* find_grammar(std::string_view language);
std::vector<std::string_view> registered_languages();

}  // namespace forge::syntax
