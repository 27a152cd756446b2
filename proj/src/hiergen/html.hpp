// Copyright 2026 The HierGen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Tolerant HTML tokenizer, tree builder and serializer.
//
// The tree builder covers the subset of the HTML5 insertion rules that
// generated pages exercise: implied html/head/body, void elements, raw-text
// elements, implicit closing of p/li/dt/dd/option/tr/td/th and recovery from
// stray end tags. It never fails on malformed input.

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace hiergen::html {

struct Attribute {
  std::string name;
  std::string value;
};

enum class TokenKind { kDoctype, kStartTag, kEndTag, kText, kComment };

struct Token {
  TokenKind kind = TokenKind::kText;
  std::string name;  // lowercase tag name for tags
  std::vector<Attribute> attrs;
  bool self_closing = false;
  std::string text;  // decoded text, comment body or doctype body
  std::size_t begin = 0;  // source byte range [begin, end)
  std::size_t end = 0;
};

std::vector<Token> tokenize(std::string_view source);

std::string decode_entities(std::string_view text);
std::string escape_text(std::string_view text);
std::string escape_attribute(std::string_view text);

bool is_void_element(std::string_view tag);
bool is_raw_text_element(std::string_view tag);

struct Node {
  enum class Kind { kDocument, kElement, kText, kComment };

  Kind kind = Kind::kElement;
  std::string tag;
  std::vector<Attribute> attrs;
  std::string text;
  std::vector<std::unique_ptr<Node>> children;
  Node* parent = nullptr;

  bool is_element() const { return kind == Kind::kElement; }
  bool is_element(std::string_view name) const { return kind == Kind::kElement && tag == name; }
  const std::string* attr(std::string_view name) const;
  void set_attr(std::string_view name, std::string value);
  bool remove_attr(std::string_view name);

  Node* append(std::unique_ptr<Node> child);
  std::vector<const Node*> element_children() const;
};

using NodePtr = std::unique_ptr<Node>;

/// Full document; the result always has html > (head, body). With
/// `implied_end_tags` false, only explicit end tags close elements.
NodePtr parse_document(std::string_view source, bool implied_end_tags = true);

/// Fragment parse: no implied structure, html/head/body are ordinary tags.
NodePtr parse_fragment(std::string_view source);

std::string outer_html(const Node& node);
std::string inner_html(const Node& node);

/// First element with `tag` in pre-order, or nullptr.
const Node* find_first(const Node& root, std::string_view tag);
Node* find_first(Node& root, std::string_view tag);

void collect_elements(const Node& root, std::string_view tag, std::vector<const Node*>& out);

/// Concatenated text of direct text children.
std::string own_text(const Node& element);

}  // namespace hiergen::html
