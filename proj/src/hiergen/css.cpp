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

#include "hiergen/css.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace hiergen::css {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\f");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\f");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '/' && i + 1 < text.size() && text[i + 1] == '*') {
      const auto end = text.find("*/", i + 2);
      if (end == std::string_view::npos) break;
      i = end + 1;
      continue;
    }
    out += text[i];
  }
  return out;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

struct NamedColor {
  std::string_view name;
  Rgb rgb;
};

constexpr std::array<NamedColor, 26> kNamedColors{{
    {"black", {0, 0, 0}},        {"white", {255, 255, 255}},  {"red", {255, 0, 0}},
    {"green", {0, 128, 0}},      {"blue", {0, 0, 255}},       {"yellow", {255, 255, 0}},
    {"gray", {128, 128, 128}},   {"grey", {128, 128, 128}},   {"silver", {192, 192, 192}},
    {"maroon", {128, 0, 0}},     {"navy", {0, 0, 128}},       {"purple", {128, 0, 128}},
    {"teal", {0, 128, 128}},     {"olive", {128, 128, 0}},    {"lime", {0, 255, 0}},
    {"aqua", {0, 255, 255}},     {"cyan", {0, 255, 255}},     {"fuchsia", {255, 0, 255}},
    {"magenta", {255, 0, 255}},  {"orange", {255, 165, 0}},   {"pink", {255, 192, 203}},
    {"brown", {165, 42, 42}},    {"gold", {255, 215, 0}},     {"lightgray", {211, 211, 211}},
    {"darkgray", {169, 169, 169}}, {"whitesmoke", {245, 245, 245}},
}};

std::uint8_t clamp_channel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

std::optional<Color> parse_color(std::string_view text) {
  const std::string s = lower(trim(text));
  if (s.empty()) return std::nullopt;
  if (s == "transparent") return Color{{0, 0, 0}, true};
  if (s[0] == '#') {
    const auto hex = std::string_view(s).substr(1);
    for (const char c : hex) {
      if (hex_value(c) < 0) return std::nullopt;
    }
    if (hex.size() == 3 || hex.size() == 4) {
      Color c;
      c.rgb = Rgb{static_cast<std::uint8_t>(hex_value(hex[0]) * 17),
                  static_cast<std::uint8_t>(hex_value(hex[1]) * 17),
                  static_cast<std::uint8_t>(hex_value(hex[2]) * 17)};
      if (hex.size() == 4) c.transparent = hex_value(hex[3]) * 17 < 128;
      return c;
    }
    if (hex.size() == 6 || hex.size() == 8) {
      Color c;
      c.rgb = Rgb{static_cast<std::uint8_t>(hex_value(hex[0]) * 16 + hex_value(hex[1])),
                  static_cast<std::uint8_t>(hex_value(hex[2]) * 16 + hex_value(hex[3])),
                  static_cast<std::uint8_t>(hex_value(hex[4]) * 16 + hex_value(hex[5]))};
      if (hex.size() == 8) c.transparent = hex_value(hex[6]) * 16 + hex_value(hex[7]) < 128;
      return c;
    }
    return std::nullopt;
  }
  if (s.rfind("rgb", 0) == 0) {
    const auto open = s.find('(');
    const auto close = s.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open) return std::nullopt;
    std::string inner = s.substr(open + 1, close - open - 1);
    std::replace(inner.begin(), inner.end(), ',', ' ');
    std::replace(inner.begin(), inner.end(), '/', ' ');
    std::istringstream in(inner);
    std::vector<double> values;
    std::string part;
    while (in >> part) {
      const bool pct = part.back() == '%';
      if (pct) part.pop_back();
      char* end = nullptr;
      const double v = std::strtod(part.c_str(), &end);
      if (end == part.c_str() || *end != '\0') return std::nullopt;
      values.push_back(pct ? (values.size() < 3 ? v * 2.55 : v / 100.0) : v);
    }
    if (values.size() != 3 && values.size() != 4) return std::nullopt;
    Color c;
    c.rgb = Rgb{clamp_channel(values[0]), clamp_channel(values[1]), clamp_channel(values[2])};
    if (values.size() == 4) c.transparent = values[3] < 0.5;
    return c;
  }
  for (const auto& named : kNamedColors) {
    if (named.name == s) return Color{named.rgb, false};
  }
  return std::nullopt;
}

std::vector<Declaration> parse_declarations(std::string_view text) {
  std::vector<Declaration> out;
  const std::string clean = strip_comments(text);
  std::size_t start = 0;
  while (start < clean.size()) {
    // Split on ';' outside parentheses.
    std::size_t end = start;
    int depth = 0;
    while (end < clean.size() && !(clean[end] == ';' && depth == 0)) {
      if (clean[end] == '(') ++depth;
      if (clean[end] == ')') depth = std::max(0, depth - 1);
      ++end;
    }
    const std::string item = clean.substr(start, end - start);
    start = end + 1;
    const auto colon = item.find(':');
    if (colon == std::string::npos) continue;
    Declaration d;
    d.property = lower(trim(std::string_view(item).substr(0, colon)));
    std::string value = trim(std::string_view(item).substr(colon + 1));
    const auto bang = lower(value).rfind("!important");
    if (bang != std::string::npos) {
      d.important = true;
      value = trim(std::string_view(value).substr(0, bang));
    }
    d.value = value;
    if (!d.property.empty() && !d.value.empty()) out.push_back(std::move(d));
  }
  return out;
}

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
}

// Parses one compound selector starting at `i`; returns false if unsupported.
bool parse_compound(const std::string& s, std::size_t& i, Compound& out, int& spec) {
  bool any = false;
  if (i < s.size() && s[i] == '*') {
    ++i;
    any = true;
  } else if (i < s.size() && is_ident_char(s[i])) {
    const auto b = i;
    while (i < s.size() && is_ident_char(s[i])) ++i;
    out.tag = lower(std::string_view(s).substr(b, i - b));
    spec += 1;
    any = true;
  }
  while (i < s.size()) {
    const char c = s[i];
    if (c == '.' || c == '#') {
      ++i;
      const auto b = i;
      while (i < s.size() && is_ident_char(s[i])) ++i;
      if (i == b) return false;
      const auto name = s.substr(b, i - b);
      if (c == '.') {
        out.classes.push_back(name);
        spec += 100;
      } else {
        out.id = name;
        spec += 10000;
      }
      any = true;
    } else if (c == '[') {
      const auto close = s.find(']', i);
      if (close == std::string::npos) return false;
      const std::string body = s.substr(i + 1, close - i - 1);
      const auto eq = body.find('=');
      if (eq == std::string::npos) {
        out.attributes.emplace_back(lower(trim(body)), std::nullopt);
      } else {
        if (eq > 0 && (body[eq - 1] == '~' || body[eq - 1] == '^' || body[eq - 1] == '$' ||
                       body[eq - 1] == '*' || body[eq - 1] == '|')) {
          return false;
        }
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'')) {
          value = value.substr(1, value.size() - 2);
        }
        out.attributes.emplace_back(lower(trim(std::string_view(body).substr(0, eq))), value);
      }
      spec += 100;
      i = close + 1;
      any = true;
    } else if (c == ':') {
      return false;
    } else {
      break;
    }
  }
  return any;
}

std::optional<Selector> parse_selector(const std::string& text) {
  Selector sel;
  std::size_t i = 0;
  const std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  while (i < s.size()) {
    Compound compound;
    if (!parse_compound(s, i, compound, sel.specificity)) return std::nullopt;
    sel.parts.push_back(std::move(compound));
    bool saw_space = false;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
      ++i;
      saw_space = true;
    }
    if (i >= s.size()) break;
    if (s[i] == '>') {
      ++i;
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      sel.combinators.push_back(Selector::Combinator::kChild);
    } else if (s[i] == '+' || s[i] == '~') {
      return std::nullopt;
    } else if (saw_space) {
      sel.combinators.push_back(Selector::Combinator::kDescendant);
    } else {
      return std::nullopt;
    }
  }
  if (sel.combinators.size() + 1 != sel.parts.size()) return std::nullopt;
  return sel;
}

bool matches_compound(const Compound& c, const html::Node& el) {
  if (!el.is_element()) return false;
  if (!c.tag.empty() && c.tag != el.tag) return false;
  if (!c.id.empty()) {
    const auto* id = el.attr("id");
    if (!id || *id != c.id) return false;
  }
  if (!c.classes.empty()) {
    const auto* cls = el.attr("class");
    if (!cls) return false;
    std::istringstream in(*cls);
    std::vector<std::string> have;
    std::string w;
    while (in >> w) have.push_back(w);
    for (const auto& want : c.classes) {
      if (std::find(have.begin(), have.end(), want) == have.end()) return false;
    }
  }
  for (const auto& [name, value] : c.attributes) {
    const auto* v = el.attr(name);
    if (!v) return false;
    if (value && *v != *value) return false;
  }
  return true;
}

bool matches_from(const Selector& sel, int part, const html::Node& el) {
  if (!matches_compound(sel.parts[static_cast<std::size_t>(part)], el)) return false;
  if (part == 0) return true;
  const auto comb = sel.combinators[static_cast<std::size_t>(part - 1)];
  const html::Node* p = el.parent;
  if (comb == Selector::Combinator::kChild) {
    return p && p->is_element() && matches_from(sel, part - 1, *p);
  }
  for (; p && p->is_element(); p = p->parent) {
    if (matches_from(sel, part - 1, *p)) return true;
  }
  return false;
}

}  // namespace

std::vector<Rule> parse_stylesheet(std::string_view text) {
  std::vector<Rule> rules;
  const std::string s = strip_comments(text);
  std::size_t i = 0;
  while (i < s.size()) {
    const auto open = s.find('{', i);
    if (open == std::string::npos) break;
    const std::string prelude = trim(std::string_view(s).substr(i, open - i));
    // Matching close brace (at-rules may nest).
    int depth = 0;
    std::size_t close = open;
    for (; close < s.size(); ++close) {
      if (s[close] == '{') ++depth;
      if (s[close] == '}' && --depth == 0) break;
    }
    const std::string body = s.substr(open + 1, std::min(close, s.size()) - open - 1);
    i = close < s.size() ? close + 1 : s.size();
    if (prelude.empty() || prelude[0] == '@') continue;
    Rule rule;
    std::size_t start = 0;
    while (start <= prelude.size()) {
      auto comma = prelude.find(',', start);
      if (comma == std::string::npos) comma = prelude.size();
      auto sel = parse_selector(prelude.substr(start, comma - start));
      if (sel) rule.selectors.push_back(std::move(*sel));
      start = comma + 1;
    }
    rule.declarations = parse_declarations(body);
    if (!rule.selectors.empty() && !rule.declarations.empty()) rules.push_back(std::move(rule));
  }
  return rules;
}

bool matches(const Selector& selector, const html::Node& element) {
  if (selector.parts.empty()) return false;
  return matches_from(selector, static_cast<int>(selector.parts.size()) - 1, element);
}

}  // namespace hiergen::css
