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

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "forge/syntax/tree.hpp"

namespace forge::oracle {

namespace detail {
struct Pat;
}

using Captures = std::vector<std::pair<std::string, syntax::NodeId>>;

// A compiled tree pattern.
//
//   pattern := '(' type (item | suffix)* ')' suffix*  |  '[' pattern+ ']' suffix*
//   item    := field ':' pattern | '#' N ':' pattern | pattern
//            | '(has' pattern ')' | '(not' item ')'
//   suffix  := '@' name | '/' regex '/' flags | '!/' regex '/' flags
//
// `_` matches any node type. A bare pattern item matches when some direct
// child matches; `#N` addresses the N-th child (negative counts from the end);
// `has` searches all descendants. Regexes use ECMAScript syntax, search the
// node text, and accept the `i` flag. `;` starts a comment.
//
//   (call function: (attribute attribute: (identifier)/^system$/) @fn
//         arguments: (argument_list #0: (_) (not #0: (string))))
class Query {
 public:
  // Throws ConfigError when the text is malformed or names a node type or
  // field the grammar does not define.
  static Query compile(std::string_view text, const syntax::Grammar& grammar);

  // Captures of a match rooted at `node`, or nullopt.
  std::optional<Captures> match(const syntax::Tree& tree, syntax::NodeId node) const;

  const std::string& source() const { return source_; }

 private:
  std::shared_ptr<const detail::Pat> root_;
  std::string source_;
};

// Replaces each `{name}` with the captured node's text, whitespace-collapsed
// and shortened. Unknown names are left as written.
std::string render_message(std::string_view tmpl, const syntax::Tree& tree,
                           const Captures& captures);

}  // namespace forge::oracle
