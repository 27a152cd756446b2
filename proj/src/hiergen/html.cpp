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

#include "hiergen/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <functional>

namespace hiergen::html {
namespace {

char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (ascii_lower(s[pos + i]) != ascii_lower(prefix[i])) return false;
  }
  return true;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

struct NamedEntity {
  std::string_view name;
  std::uint32_t cp;
};

constexpr std::array<NamedEntity, 14> kEntities{{
    {"amp", '&'}, {"lt", '<'}, {"gt", '>'}, {"quot", '"'}, {"apos", '\''},
    {"nbsp", 0xA0}, {"copy", 0xA9}, {"reg", 0xAE}, {"hellip", 0x2026},
    {"mdash", 0x2014}, {"ndash", 0x2013}, {"middot", 0xB7}, {"laquo", 0xAB},
    {"raquo", 0xBB},
}};

}  // namespace

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '&') {
      out += text[i];
      continue;
    }
    const auto semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out += '&';
      continue;
    }
    const auto name = text.substr(i + 1, semi - i - 1);
    bool decoded = false;
    if (!name.empty() && name[0] == '#') {
      std::uint32_t cp = 0;
      bool ok = name.size() > 1;
      const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
      for (std::size_t k = hex ? 2 : 1; ok && k < name.size(); ++k) {
        const char c = name[k];
        int digit = -1;
        if (c >= '0' && c <= '9') digit = c - '0';
        else if (hex && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') digit = c - 'A' + 10;
        if (digit < 0) ok = false;
        else cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(digit);
        if (cp > 0x10FFFF) ok = false;
      }
      if (ok && name.size() > (hex ? 2u : 1u)) {
        append_utf8(out, cp);
        decoded = true;
      }
    } else {
      for (const auto& e : kEntities) {
        if (e.name == name) {
          append_utf8(out, e.cp);
          decoded = true;
          break;
        }
      }
    }
    if (decoded) {
      i = semi;
    } else {
      out += '&';
    }
  }
  return out;
}

std::string escape_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string escape_attribute(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      case '<': out += "&lt;"; break;
      default: out += c;
    }
  }
  return out;
}

bool is_void_element(std::string_view tag) {
  static constexpr std::array<std::string_view, 14> kVoid{
      "area", "base", "br", "col", "embed", "hr", "img", "input",
      "link", "meta", "param", "source", "track", "wbr"};
  return std::find(kVoid.begin(), kVoid.end(), tag) != kVoid.end();
}

bool is_raw_text_element(std::string_view tag) {
  return tag == "script" || tag == "style" || tag == "textarea" || tag == "title";
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  std::size_t text_start = 0;

  const auto flush_text = [&](std::size_t upto) {
    if (upto > text_start) {
      Token t;
      t.kind = TokenKind::kText;
      t.text = decode_entities(src.substr(text_start, upto - text_start));
      t.begin = text_start;
      t.end = upto;
      tokens.push_back(std::move(t));
    }
  };

  while (i < src.size()) {
    if (src[i] != '<') {
      ++i;
      continue;
    }
    const std::size_t lt = i;
    if (src.compare(i, 4, "<!--") == 0) {
      flush_text(lt);
      const auto close = src.find("-->", i + 4);
      Token t;
      t.kind = TokenKind::kComment;
      t.begin = lt;
      if (close == std::string_view::npos) {
        t.text = std::string(src.substr(i + 4));
        i = src.size();
      } else {
        t.text = std::string(src.substr(i + 4, close - i - 4));
        i = close + 3;
      }
      t.end = i;
      tokens.push_back(std::move(t));
      text_start = i;
      continue;
    }
    if (i + 1 < src.size() && (src[i + 1] == '!' || src[i + 1] == '?')) {
      flush_text(lt);
      const auto close = src.find('>', i + 2);
      Token t;
      t.kind = src[i + 1] == '!' ? TokenKind::kDoctype : TokenKind::kComment;
      t.begin = lt;
      const auto stop = close == std::string_view::npos ? src.size() : close;
      t.text = std::string(src.substr(i + 2, stop - i - 2));
      i = close == std::string_view::npos ? src.size() : close + 1;
      t.end = i;
      tokens.push_back(std::move(t));
      text_start = i;
      continue;
    }
    const bool is_end = i + 1 < src.size() && src[i + 1] == '/';
    const std::size_t name_start = i + (is_end ? 2 : 1);
    if (name_start >= src.size() || !is_alpha(src[name_start])) {
      ++i;  // literal '<'
      continue;
    }
    flush_text(lt);
    std::size_t j = name_start;
    while (j < src.size() && !is_space(src[j]) && src[j] != '>' && src[j] != '/') ++j;
    Token t;
    t.kind = is_end ? TokenKind::kEndTag : TokenKind::kStartTag;
    t.begin = lt;
    t.name.reserve(j - name_start);
    for (std::size_t k = name_start; k < j; ++k) t.name += ascii_lower(src[k]);

    if (is_end) {
      const auto close = src.find('>', j);
      i = close == std::string_view::npos ? src.size() : close + 1;
    } else {
      // Attributes.
      while (j < src.size()) {
        while (j < src.size() && is_space(src[j])) ++j;
        if (j >= src.size()) break;
        if (src[j] == '>') {
          ++j;
          break;
        }
        if (src[j] == '/') {
          if (j + 1 < src.size() && src[j + 1] == '>') {
            t.self_closing = true;
            j += 2;
            break;
          }
          ++j;
          continue;
        }
        std::size_t an = j;
        while (j < src.size() && !is_space(src[j]) && src[j] != '=' && src[j] != '>' &&
               !(src[j] == '/' && j + 1 < src.size() && src[j + 1] == '>')) {
          ++j;
        }
        Attribute attr;
        for (std::size_t k = an; k < j; ++k) attr.name += ascii_lower(src[k]);
        while (j < src.size() && is_space(src[j])) ++j;
        if (j < src.size() && src[j] == '=') {
          ++j;
          while (j < src.size() && is_space(src[j])) ++j;
          if (j < src.size() && (src[j] == '"' || src[j] == '\'')) {
            const char q = src[j];
            const auto close = src.find(q, j + 1);
            const auto stop = close == std::string_view::npos ? src.size() : close;
            attr.value = decode_entities(src.substr(j + 1, stop - j - 1));
            j = close == std::string_view::npos ? src.size() : close + 1;
          } else {
            const std::size_t vs = j;
            while (j < src.size() && !is_space(src[j]) && src[j] != '>') ++j;
            attr.value = decode_entities(src.substr(vs, j - vs));
          }
        }
        if (!attr.name.empty()) {
          const bool dup = std::any_of(t.attrs.begin(), t.attrs.end(),
                                       [&](const Attribute& a) { return a.name == attr.name; });
          if (!dup) t.attrs.push_back(std::move(attr));
        }
      }
      i = j;
    }
    t.end = i;
    const bool raw = t.kind == TokenKind::kStartTag && !t.self_closing &&
                     is_raw_text_element(t.name);
    const std::string raw_name = t.name;
    tokens.push_back(std::move(t));
    text_start = i;

    if (raw) {
      // Consume until the matching end tag.
      std::size_t k = i;
      std::size_t stop = src.size();
      while (k < src.size()) {
        const auto lt2 = src.find("</", k);
        if (lt2 == std::string_view::npos) break;
        if (starts_with_ci(src, lt2 + 2, raw_name)) {
          const auto after = lt2 + 2 + raw_name.size();
          if (after >= src.size() || is_space(src[after]) || src[after] == '>' ||
              src[after] == '/') {
            stop = lt2;
            break;
          }
        }
        k = lt2 + 2;
      }
      if (stop > i) {
        Token body;
        body.kind = TokenKind::kText;
        const auto content = src.substr(i, stop - i);
        body.text = (raw_name == "script" || raw_name == "style") ? std::string(content)
                                                                  : decode_entities(content);
        body.begin = i;
        body.end = stop;
        tokens.push_back(std::move(body));
      }
      i = stop;
      text_start = stop;
    }
  }
  flush_text(src.size());
  return tokens;
}

const std::string* Node::attr(std::string_view name) const {
  for (const auto& a : attrs) {
    if (a.name == name) return &a.value;
  }
  return nullptr;
}

void Node::set_attr(std::string_view name, std::string value) {
  for (auto& a : attrs) {
    if (a.name == name) {
      a.value = std::move(value);
      return;
    }
  }
  attrs.push_back(Attribute{std::string(name), std::move(value)});
}

bool Node::remove_attr(std::string_view name) {
  const auto it = std::find_if(attrs.begin(), attrs.end(),
                               [&](const Attribute& a) { return a.name == name; });
  if (it == attrs.end()) return false;
  attrs.erase(it);
  return true;
}

Node* Node::append(std::unique_ptr<Node> child) {
  child->parent = this;
  children.push_back(std::move(child));
  return children.back().get();
}

std::vector<const Node*> Node::element_children() const {
  std::vector<const Node*> out;
  for (const auto& c : children) {
    if (c->is_element()) out.push_back(c.get());
  }
  return out;
}

namespace {

NodePtr make_element(const Token& t) {
  auto n = std::make_unique<Node>();
  n->kind = Node::Kind::kElement;
  n->tag = t.name;
  n->attrs = t.attrs;
  return n;
}

NodePtr make_text(std::string text) {
  auto n = std::make_unique<Node>();
  n->kind = Node::Kind::kText;
  n->text = std::move(text);
  return n;
}

bool in_list(std::string_view tag, std::initializer_list<std::string_view> list) {
  return std::find(list.begin(), list.end(), tag) != list.end();
}

bool closes_paragraph(std::string_view tag) {
  return in_list(tag, {"address", "article", "aside", "blockquote", "details", "div", "dl",
                       "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3",
                       "h4", "h5", "h6", "header", "hgroup", "hr", "main", "menu", "nav", "ol",
                       "p", "pre", "section", "table", "ul", "li", "dd", "dt"});
}

bool is_scope_boundary(std::string_view tag) {
  return in_list(tag, {"html", "body", "table", "td", "th", "caption", "button", "template",
                       "object", "marquee", "applet"});
}

bool is_head_element(std::string_view tag) {
  return in_list(tag, {"meta", "link", "title", "style", "script", "base", "noscript"});
}

class TreeBuilder {
 public:
  TreeBuilder(bool document_mode, bool implied_end_tags)
      : document_mode_(document_mode), implied_end_tags_(implied_end_tags) {
    root_ = std::make_unique<Node>();
    root_->kind = Node::Kind::kDocument;
    stack_.push_back(root_.get());
  }

  NodePtr build(std::string_view src) {
    for (const auto& t : tokenize(src)) process(t);
    if (document_mode_) ensure_body();
    return std::move(root_);
  }

 private:
  Node* current() { return stack_.back(); }

  Node* ensure_html() {
    if (!html_) {
      auto n = std::make_unique<Node>();
      n->tag = "html";
      html_ = root_->append(std::move(n));
      stack_.assign({root_.get(), html_});
    }
    return html_;
  }

  Node* ensure_head() {
    ensure_html();
    if (!head_) {
      auto n = std::make_unique<Node>();
      n->tag = "head";
      head_ = html_->append(std::move(n));
    }
    return head_;
  }

  Node* ensure_body() {
    ensure_head();
    if (!body_) {
      auto n = std::make_unique<Node>();
      n->tag = "body";
      body_ = html_->append(std::move(n));
      stack_.assign({root_.get(), html_, body_});
    }
    return body_;
  }

  static void merge_attrs(Node* target, const Token& t) {
    for (const auto& a : t.attrs) {
      if (!target->attr(a.name)) target->attrs.push_back(a);
    }
  }

  // Index in stack_ of the nearest open `tag` not crossing a boundary, or -1.
  int find_in_scope(std::string_view tag,
                    const std::function<bool(std::string_view)>& boundary) const {
    for (int k = static_cast<int>(stack_.size()) - 1; k >= 1; --k) {
      const Node* n = stack_[static_cast<std::size_t>(k)];
      if (n->tag == tag) return k;
      if (boundary(n->tag) || n == body_ || n == head_) return -1;
    }
    return -1;
  }

  void pop_to(int index) { stack_.resize(static_cast<std::size_t>(index)); }

  void insert_element(const Token& t) {
    const auto& tag = t.name;
    if (!implied_end_tags_) {
      Node* n = current()->append(make_element(t));
      if (!is_void_element(tag) && !t.self_closing) stack_.push_back(n);
      return;
    }
    if (closes_paragraph(tag)) {
      const int p = find_in_scope("p", is_scope_boundary);
      if (p > 0) pop_to(p);
    }
    if (tag == "li") {
      const int li = find_in_scope("li", [](std::string_view n) {
        return is_scope_boundary(n) || n == "ul" || n == "ol";
      });
      if (li > 0) pop_to(li);
    } else if (tag == "dt" || tag == "dd") {
      for (const auto* name : {"dt", "dd"}) {
        const int k = find_in_scope(name, [](std::string_view n) {
          return is_scope_boundary(n) || n == "dl";
        });
        if (k > 0) pop_to(k);
      }
    } else if (tag == "option") {
      if (current()->tag == "option") stack_.pop_back();
    } else if (tag == "tr") {
      const int k = find_in_scope("tr", [](std::string_view n) { return n == "table"; });
      if (k > 0) pop_to(k);
    } else if (tag == "td" || tag == "th") {
      for (const auto* name : {"td", "th"}) {
        const int k = find_in_scope(name, [](std::string_view n) {
          return n == "tr" || n == "table";
        });
        if (k > 0) pop_to(k);
      }
    }
    Node* n = current()->append(make_element(t));
    if (!is_void_element(tag) && !t.self_closing) stack_.push_back(n);
  }

  void process(const Token& t) {
    switch (t.kind) {
      case TokenKind::kDoctype:
        return;
      case TokenKind::kComment: {
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::kComment;
        n->text = t.text;
        if (document_mode_ && !html_) {
          root_->append(std::move(n));
        } else {
          current()->append(std::move(n));
        }
        return;
      }
      case TokenKind::kText:
        process_text(t);
        return;
      case TokenKind::kStartTag:
        process_start(t);
        return;
      case TokenKind::kEndTag:
        process_end(t);
        return;
    }
  }

  void process_text(const Token& t) {
    if (!document_mode_) {
      append_text(t.text);
      return;
    }
    const bool blank = std::all_of(t.text.begin(), t.text.end(),
                                   [](char c) { return is_space(c); });
    const bool in_head_raw = !stack_.empty() && current()->parent == head_ && head_ &&
                             is_raw_text_element(current()->tag);
    if (in_head_raw) {
      append_text(t.text);
      return;
    }
    if (!body_) {
      if (blank) return;
      ensure_body();
    }
    append_text(t.text);
  }

  void append_text(const std::string& text) {
    Node* parent = current();
    if (!parent->children.empty() && parent->children.back()->kind == Node::Kind::kText) {
      parent->children.back()->text += text;
      return;
    }
    parent->append(make_text(text));
  }

  void process_start(const Token& t) {
    if (!document_mode_) {
      insert_element(t);
      return;
    }
    const auto& tag = t.name;
    if (tag == "html") {
      merge_attrs(ensure_html(), t);
      return;
    }
    if (tag == "head") {
      if (!body_) {
        ensure_head();
        stack_.assign({root_.get(), html_, head_});
      }
      return;
    }
    if (tag == "body") {
      if (!body_) {
        ensure_body();
      }
      merge_attrs(body_, t);
      return;
    }
    if (!body_ && is_head_element(tag)) {
      ensure_head();
      if (current() != head_) stack_.assign({root_.get(), html_, head_});
      Node* n = head_->append(make_element(t));
      if (!is_void_element(tag) && !t.self_closing) stack_.push_back(n);
      return;
    }
    ensure_body();
    insert_element(t);
  }

  void process_end(const Token& t) {
    const auto& tag = t.name;
    if (document_mode_) {
      if (tag == "head") {
        if (head_ && !body_) stack_.assign({root_.get(), html_});
        return;
      }
      if (tag == "body" || tag == "html") {
        if (body_) stack_.assign({root_.get(), html_, body_});
        return;
      }
      if (tag == "br") {
        Token br = t;
        br.kind = TokenKind::kStartTag;
        ensure_body();
        insert_element(br);
        return;
      }
    }
    for (int k = static_cast<int>(stack_.size()) - 1; k >= 1; --k) {
      const Node* n = stack_[static_cast<std::size_t>(k)];
      if (n->tag == tag) {
        pop_to(k);
        return;
      }
      if (document_mode_ && (n == body_ || n == head_)) return;
    }
  }

  bool document_mode_;
  bool implied_end_tags_;
  NodePtr root_;
  std::vector<Node*> stack_;
  Node* html_ = nullptr;
  Node* head_ = nullptr;
  Node* body_ = nullptr;
};

void serialize(const Node& node, std::string& out);

void serialize_children(const Node& node, std::string& out) {
  const bool raw = node.is_element() && is_raw_text_element(node.tag) &&
                   (node.tag == "script" || node.tag == "style");
  for (const auto& c : node.children) {
    if (raw && c->kind == Node::Kind::kText) {
      out += c->text;
    } else {
      serialize(*c, out);
    }
  }
}

void serialize(const Node& node, std::string& out) {
  switch (node.kind) {
    case Node::Kind::kDocument:
      serialize_children(node, out);
      return;
    case Node::Kind::kText:
      out += escape_text(node.text);
      return;
    case Node::Kind::kComment:
      out += "<!--";
      out += node.text;
      out += "-->";
      return;
    case Node::Kind::kElement:
      out += '<';
      out += node.tag;
      for (const auto& a : node.attrs) {
        out += ' ';
        out += a.name;
        out += "=\"";
        out += escape_attribute(a.value);
        out += '"';
      }
      out += '>';
      if (is_void_element(node.tag)) return;
      serialize_children(node, out);
      out += "</";
      out += node.tag;
      out += '>';
      return;
  }
}

}  // namespace

NodePtr parse_document(std::string_view source, bool implied_end_tags) {
  return TreeBuilder(true, implied_end_tags).build(source);
}

NodePtr parse_fragment(std::string_view source) { return TreeBuilder(false, true).build(source); }

std::string outer_html(const Node& node) {
  std::string out;
  serialize(node, out);
  return out;
}

std::string inner_html(const Node& node) {
  std::string out;
  serialize_children(node, out);
  return out;
}

const Node* find_first(const Node& root, std::string_view tag) {
  if (root.is_element(tag)) return &root;
  for (const auto& c : root.children) {
    if (const Node* hit = find_first(*c, tag)) return hit;
  }
  return nullptr;
}

Node* find_first(Node& root, std::string_view tag) {
  return const_cast<Node*>(find_first(static_cast<const Node&>(root), tag));
}

void collect_elements(const Node& root, std::string_view tag, std::vector<const Node*>& out) {
  if (root.is_element(tag)) out.push_back(&root);
  for (const auto& c : root.children) collect_elements(*c, tag, out);
}

std::string own_text(const Node& element) {
  std::string out;
  for (const auto& c : element.children) {
    if (c->kind == Node::Kind::kText) out += c->text;
  }
  return out;
}

}  // namespace hiergen::html
