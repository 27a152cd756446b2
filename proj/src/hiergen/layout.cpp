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

// In-process reference renderer. Layout runs in double precision on CSS
// pixels; geometry is rounded to integer pixels only when emitted.
// Vertical margins do not collapse.

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>

#include "hiergen/css.hpp"
#include "hiergen/error.hpp"
#include "hiergen/render.hpp"
#include "hiergen/util.hpp"

namespace hiergen {
namespace {

enum class Display { kNone, kInline, kBlock, kInlineBlock, kFlex, kInlineFlex };
enum class TextAlign { kLeft, kCenter, kRight };
enum class Justify { kStart, kCenter, kEnd, kSpaceBetween };
enum class AlignItems { kStretch, kStart, kCenter, kEnd };

struct Length {
  enum class Unit { kAuto, kPx, kPercent };
  Unit unit = Unit::kAuto;
  double value = 0.0;

  bool is_auto() const { return unit == Unit::kAuto; }
  static Length px(double v) { return Length{Unit::kPx, v}; }
  double resolve(double reference) const {
    if (unit == Unit::kPx) return value;
    if (unit == Unit::kPercent) return reference * value / 100.0;
    return 0.0;
  }
};

struct Style {
  Display display = Display::kInline;
  Length width, height, min_height, max_width;
  Length margin[4] = {Length::px(0), Length::px(0), Length::px(0), Length::px(0)};  // trbl
  double padding[4] = {0, 0, 0, 0};
  double border[4] = {0, 0, 0, 0};
  Rgb border_color{0, 0, 0};
  std::optional<Rgb> background;
  Rgb color{0, 0, 0};
  double font_size = 16.0;
  bool bold = false;
  double line_height = -1.0;  // px; negative = normal
  TextAlign text_align = TextAlign::kLeft;
  bool visible = true;
  bool border_box = false;
  bool flex_column = false;
  double gap = 0.0;
  double flex_grow = 0.0;
  bool flex_basis_zero = false;
  Justify justify = Justify::kStart;
  AlignItems align_items = AlignItems::kStretch;

  double advance() const { return std::max(1.0, std::round(font_size * 0.6)); }
  double computed_line_height() const {
    return line_height > 0 ? line_height : std::round(font_size * 1.2);
  }
  double horizontal_extras() const {
    return padding[1] + padding[3] + border[1] + border[3];
  }
  double vertical_extras() const { return padding[0] + padding[2] + border[0] + border[2]; }
};

constexpr std::string_view kUserAgentSheet = R"css(
html, body, address, article, aside, blockquote, center, dd, details, dialog, div, dl, dt,
fieldset, figcaption, figure, footer, form, h1, h2, h3, h4, h5, h6, header, hgroup, hr,
legend, li, main, menu, nav, ol, p, pre, section, summary, table, tbody, thead, tfoot, ul,
caption, option, optgroup, select { display: block }
head, script, style, title, meta, link, template, noscript, base, datalist, param { display: none }
body { margin: 8px }
p, dl, figure, blockquote { margin: 1em 0 }
blockquote, figure { margin-left: 40px; margin-right: 40px }
h1 { font-size: 2em; font-weight: bold; margin: 0.67em 0 }
h2 { font-size: 1.5em; font-weight: bold; margin: 0.83em 0 }
h3 { font-size: 1.17em; font-weight: bold; margin: 1em 0 }
h4 { font-size: 1em; font-weight: bold; margin: 1.33em 0 }
h5 { font-size: 0.83em; font-weight: bold; margin: 1.67em 0 }
h6 { font-size: 0.67em; font-weight: bold; margin: 2.33em 0 }
ul, ol, menu { margin: 1em 0; padding-left: 40px }
dd { margin-left: 40px }
b, strong, th, dt, legend { font-weight: bold }
a { color: #0000ee }
center, th { text-align: center }
tr { display: flex }
td, th { display: block; flex-grow: 1; padding: 1px }
hr { border: 1px solid #808080; margin: 0.5em 0 }
fieldset { margin: 0 2px; padding: 0.35em 0.75em 0.625em; border: 2px solid #c0c0c0 }
img, button, input, textarea, select, svg, video, canvas, iframe { display: inline-block }
button { padding: 1px 6px; border: 2px solid #767676; background-color: #efefef }
input { width: 150px; height: 18px; border: 2px solid #767676 }
textarea { width: 180px; height: 36px; border: 1px solid #767676 }
small { font-size: 0.83em }
pre, code, kbd, samp { font-size: 0.8125em }
)css";

const std::vector<css::Rule>& user_agent_rules() {
  static const std::vector<css::Rule> rules = css::parse_stylesheet(kUserAgentSheet);
  return rules;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> parts;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) parts.push_back(w);
  return parts;
}

std::optional<Length> parse_length(std::string_view text, double font_size) {
  const std::string s = lower(text);
  if (s == "auto") return Length{};
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) return std::nullopt;
  const std::string unit(end);
  if (unit.empty() || unit == "px") {
    if (unit.empty() && v != 0.0) return std::nullopt;
    return Length::px(v);
  }
  if (unit == "%") return Length{Length::Unit::kPercent, v};
  if (unit == "em") return Length::px(v * font_size);
  if (unit == "rem") return Length::px(v * 16.0);
  if (unit == "pt") return Length::px(v * 4.0 / 3.0);
  if (unit == "vw") return Length{Length::Unit::kPercent, v};
  return std::nullopt;
}

double parse_px(std::string_view text, double font_size, double fallback) {
  const auto len = parse_length(text, font_size);
  if (!len || len->unit != Length::Unit::kPx) return fallback;
  return std::max(0.0, len->value);
}

void apply_box_shorthand(const std::string& value, double font_size, Length out[4]) {
  const auto parts = split_ws(value);
  std::vector<Length> vals;
  for (const auto& p : parts) {
    const auto len = parse_length(p, font_size);
    if (!len) return;
    vals.push_back(*len);
  }
  if (vals.empty() || vals.size() > 4) return;
  const std::size_t n = vals.size();
  out[0] = vals[0];
  out[1] = n > 1 ? vals[1] : vals[0];
  out[2] = n > 2 ? vals[2] : vals[0];
  out[3] = n > 3 ? vals[3] : out[1];
}

void apply_padding_shorthand(const std::string& value, double font_size, double out[4]) {
  Length tmp[4] = {Length::px(out[0]), Length::px(out[1]), Length::px(out[2]), Length::px(out[3])};
  apply_box_shorthand(value, font_size, tmp);
  for (int i = 0; i < 4; ++i) {
    out[i] = tmp[i].unit == Length::Unit::kPx ? std::max(0.0, tmp[i].value) : out[i];
  }
}

int side_index(std::string_view side) {
  if (side == "top") return 0;
  if (side == "right") return 1;
  if (side == "bottom") return 2;
  if (side == "left") return 3;
  return -1;
}

// border shorthand: width, style and color in any order.
void apply_border(const std::string& value, double font_size, Style& st, int only_side) {
  double width = 3.0;  // "medium"
  bool none = false;
  std::optional<Rgb> color;
  bool has_style = false;
  for (const auto& p : split_ws(value)) {
    const auto lp = lower(p);
    if (lp == "none" || lp == "hidden") {
      none = true;
      has_style = true;
    } else if (lp == "solid" || lp == "dashed" || lp == "dotted" || lp == "double" ||
               lp == "groove" || lp == "ridge" || lp == "inset" || lp == "outset") {
      has_style = true;
    } else if (lp == "thin") {
      width = 1;
    } else if (lp == "medium") {
      width = 3;
    } else if (lp == "thick") {
      width = 5;
    } else if (const auto len = parse_length(lp, font_size); len && len->unit == Length::Unit::kPx) {
      width = std::max(0.0, len->value);
    } else if (const auto c = css::parse_color(p)) {
      if (!c->transparent) color = c->rgb;
    }
  }
  if (!has_style || none) width = 0;
  for (int i = 0; i < 4; ++i) {
    if (only_side >= 0 && i != only_side) continue;
    st.border[i] = width;
  }
  if (color) st.border_color = *color;
}

class StyleResolver {
 public:
  explicit StyleResolver(const html::Node& document) {
    std::vector<const html::Node*> styles;
    html::collect_elements(document, "style", styles);
    for (const auto* s : styles) {
      for (auto& r : css::parse_stylesheet(html::own_text(*s))) author_.push_back(std::move(r));
    }
  }

  Style compute(const html::Node& el, const Style* parent) const {
    Style st;
    if (parent) {
      st.color = parent->color;
      st.font_size = parent->font_size;
      st.bold = parent->bold;
      st.line_height = parent->line_height;
      st.text_align = parent->text_align;
      st.visible = parent->visible;
    }
    // Ordered declarations: UA, author by specificity, inline, !important.
    std::vector<const css::Declaration*> decls;
    append_matching(user_agent_rules(), el, decls, false);
    append_matching(author_, el, decls, false);
    std::vector<css::Declaration> inline_decls;
    if (const auto* style_attr = el.attr("style")) inline_decls = css::parse_declarations(*style_attr);
    for (const auto& d : inline_decls) {
      if (!d.important) decls.push_back(&d);
    }
    append_matching(author_, el, decls, true);
    for (const auto& d : inline_decls) {
      if (d.important) decls.push_back(&d);
    }

    const double parent_font = parent ? parent->font_size : 16.0;
    for (const auto* d : decls) {
      if (d->property == "font-size") apply_font_size(d->value, parent_font, st);
      if (d->property == "font") apply_font_shorthand(d->value, parent_font, st);
    }
    for (const auto* d : decls) apply(*d, st, parent);

    // Presentational attributes for replaced elements.
    if (el.tag == "img" || el.tag == "canvas" || el.tag == "video" || el.tag == "iframe" ||
        el.tag == "svg") {
      if (st.width.is_auto()) {
        if (const auto* w = el.attr("width")) {
          if (const auto len = parse_length(*w + (std::isdigit(static_cast<unsigned char>(w->back())) ? "px" : ""), st.font_size)) st.width = *len;
        }
      }
      if (st.height.is_auto()) {
        if (const auto* h = el.attr("height")) {
          if (const auto len = parse_length(*h + (std::isdigit(static_cast<unsigned char>(h->back())) ? "px" : ""), st.font_size)) st.height = *len;
        }
      }
    }
    if (el.tag == "font") {
      if (const auto* c = el.attr("color")) {
        if (const auto col = css::parse_color(*c); col && !col->transparent) st.color = col->rgb;
      }
    }
    if (const auto* bg = el.attr("bgcolor")) {
      if (!st.background) {
        if (const auto col = css::parse_color(*bg); col && !col->transparent) st.background = col->rgb;
      }
    }
    if (el.attr("hidden")) st.display = Display::kNone;
    return st;
  }

 private:
  static void append_matching(const std::vector<css::Rule>& rules, const html::Node& el,
                              std::vector<const css::Declaration*>& out, bool important) {
    struct Hit {
      int specificity;
      std::size_t order;
      const css::Rule* rule;
    };
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      int best = -1;
      for (const auto& sel : rules[i].selectors) {
        if (css::matches(sel, el)) best = std::max(best, sel.specificity);
      }
      if (best >= 0) hits.push_back(Hit{best, i, &rules[i]});
    }
    std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
      return a.specificity < b.specificity;
    });
    for (const auto& h : hits) {
      for (const auto& d : h.rule->declarations) {
        if (d.important == important) out.push_back(&d);
      }
    }
  }

  static void apply_font_size(const std::string& value, double parent_font, Style& st) {
    const auto v = lower(value);
    static const std::map<std::string, double> kKeywords{
        {"xx-small", 9},  {"x-small", 10}, {"small", 13},   {"medium", 16},
        {"large", 18},    {"x-large", 24}, {"xx-large", 32}, {"smaller", -0.83},
        {"larger", -1.2}};
    if (const auto it = kKeywords.find(v); it != kKeywords.end()) {
      st.font_size = it->second < 0 ? parent_font * -it->second : it->second;
      return;
    }
    const auto len = parse_length(v, parent_font);
    if (!len) return;
    if (len->unit == Length::Unit::kPercent) st.font_size = parent_font * len->value / 100.0;
    else if (len->unit == Length::Unit::kPx && len->value > 0) st.font_size = len->value;
  }

  static void apply_font_shorthand(const std::string& value, double parent_font, Style& st) {
    for (const auto& p : split_ws(value)) {
      const auto token = p.substr(0, p.find('/'));
      if (lower(token) == "bold") st.bold = true;
      const auto len = parse_length(token, parent_font);
      if (len && len->unit != Length::Unit::kAuto && len->value > 0 &&
          !std::isdigit(static_cast<unsigned char>(token.back()))) {
        apply_font_size(token, parent_font, st);
      }
    }
  }

  static void apply(const css::Declaration& d, Style& st, const Style* parent) {
    const auto& p = d.property;
    const auto v = lower(d.value);
    const double fs = st.font_size;
    if (p == "display") {
      if (v == "none") st.display = Display::kNone;
      else if (v == "block" || v == "list-item" || v == "table" || v == "table-row-group" ||
               v == "flow-root" || v == "table-caption" || v == "table-header-group" ||
               v == "table-footer-group")
        st.display = Display::kBlock;
      else if (v == "inline") st.display = Display::kInline;
      else if (v == "inline-block" || v == "inline-table") st.display = Display::kInlineBlock;
      else if (v == "flex" || v == "table-row" || v == "grid") st.display = Display::kFlex;
      else if (v == "inline-flex" || v == "inline-grid") st.display = Display::kInlineFlex;
      else if (v == "table-cell") {
        st.display = Display::kBlock;
        st.flex_grow = 1;
      }
    } else if (p == "visibility") {
      st.visible = !(v == "hidden" || v == "collapse");
    } else if (p == "width") {
      if (auto len = parse_length(v, fs)) st.width = *len;
    } else if (p == "height") {
      if (auto len = parse_length(v, fs)) st.height = *len;
    } else if (p == "min-height") {
      if (auto len = parse_length(v, fs)) st.min_height = *len;
    } else if (p == "max-width") {
      if (v == "none") st.max_width = Length{};
      else if (auto len = parse_length(v, fs)) st.max_width = *len;
    } else if (p == "margin") {
      apply_box_shorthand(v, fs, st.margin);
    } else if (p.rfind("margin-", 0) == 0) {
      const int side = side_index(std::string_view(p).substr(7));
      if (side >= 0) {
        if (auto len = parse_length(v, fs)) st.margin[side] = *len;
      }
    } else if (p == "padding") {
      apply_padding_shorthand(v, fs, st.padding);
    } else if (p.rfind("padding-", 0) == 0) {
      const int side = side_index(std::string_view(p).substr(8));
      if (side >= 0) st.padding[side] = parse_px(v, fs, st.padding[side]);
    } else if (p == "border") {
      apply_border(d.value, fs, st, -1);
    } else if (p == "border-width") {
      Length tmp[4];
      apply_box_shorthand(v, fs, tmp);
      for (int i = 0; i < 4; ++i) {
        if (tmp[i].unit == Length::Unit::kPx) st.border[i] = std::max(0.0, tmp[i].value);
      }
    } else if (p == "border-color") {
      if (const auto c = css::parse_color(d.value); c && !c->transparent) st.border_color = c->rgb;
    } else if (p == "border-style") {
      if (v == "none" || v == "hidden") {
        for (auto& b : st.border) b = 0;
      }
    } else if (p.rfind("border-", 0) == 0 && side_index(std::string_view(p).substr(7)) >= 0) {
      apply_border(d.value, fs, st, side_index(std::string_view(p).substr(7)));
    } else if (p == "background-color" || p == "background") {
      if (v == "none" || v == "transparent") {
        st.background.reset();
        return;
      }
      for (const auto& part : split_ws(d.value)) {
        if (const auto c = css::parse_color(part)) {
          if (c->transparent) st.background.reset();
          else st.background = c->rgb;
          return;
        }
      }
      if (const auto c = css::parse_color(d.value); c) {
        if (c->transparent) st.background.reset();
        else st.background = c->rgb;
      }
    } else if (p == "color") {
      if (v == "inherit") {
        if (parent) st.color = parent->color;
      } else if (const auto c = css::parse_color(d.value); c && !c->transparent) {
        st.color = c->rgb;
      }
    } else if (p == "font-weight") {
      if (v == "bold" || v == "bolder") st.bold = true;
      else if (v == "normal" || v == "lighter") st.bold = false;
      else {
        char* end = nullptr;
        const double w = std::strtod(v.c_str(), &end);
        if (end != v.c_str()) st.bold = w >= 600;
      }
    } else if (p == "line-height") {
      if (v == "normal") {
        st.line_height = -1;
      } else {
        char* end = nullptr;
        const double num = std::strtod(v.c_str(), &end);
        if (end != v.c_str() && *end == '\0') {
          st.line_height = std::round(num * fs);
        } else if (const auto len = parse_length(v, fs)) {
          st.line_height = std::round(len->unit == Length::Unit::kPercent ? fs * len->value / 100.0
                                                                          : len->value);
        }
      }
    } else if (p == "text-align") {
      if (v == "center") st.text_align = TextAlign::kCenter;
      else if (v == "right" || v == "end") st.text_align = TextAlign::kRight;
      else st.text_align = TextAlign::kLeft;
    } else if (p == "box-sizing") {
      st.border_box = v == "border-box";
    } else if (p == "flex-direction") {
      st.flex_column = v.rfind("column", 0) == 0;
    } else if (p == "gap" || p == "column-gap" || p == "grid-gap") {
      const auto parts = split_ws(v);
      if (!parts.empty()) st.gap = parse_px(parts.back(), fs, st.gap);
    } else if (p == "flex-grow") {
      st.flex_grow = std::max(0.0, std::strtod(v.c_str(), nullptr));
    } else if (p == "flex") {
      const auto parts = split_ws(v);
      if (v == "none") {
        st.flex_grow = 0;
      } else if (v == "auto") {
        st.flex_grow = 1;
      } else if (!parts.empty()) {
        char* end = nullptr;
        const double g = std::strtod(parts[0].c_str(), &end);
        if (end != parts[0].c_str() && *end == '\0') {
          st.flex_grow = std::max(0.0, g);
          st.flex_basis_zero = parts.size() < 3 || parts[2] == "0" || parts[2] == "0%" ||
                               parts[2] == "0px";
        }
      }
    } else if (p == "justify-content") {
      if (v == "center") st.justify = Justify::kCenter;
      else if (v == "flex-end" || v == "end" || v == "right") st.justify = Justify::kEnd;
      else if (v == "space-between" || v == "space-around" || v == "space-evenly")
        st.justify = Justify::kSpaceBetween;
      else st.justify = Justify::kStart;
    } else if (p == "align-items") {
      if (v == "center") st.align_items = AlignItems::kCenter;
      else if (v == "flex-start" || v == "start" || v == "baseline") st.align_items = AlignItems::kStart;
      else if (v == "flex-end" || v == "end") st.align_items = AlignItems::kEnd;
      else st.align_items = AlignItems::kStretch;
    }
  }

  std::vector<css::Rule> author_;
};

// ---------------------------------------------------------------------------
// Box tree

struct Rect {
  double x = 0, y = 0, w = 0, h = 0;
  double right() const { return x + w; }
  double bottom() const { return y + h; }
};

Rect unite(const Rect& a, const Rect& b) {
  const double x0 = std::min(a.x, b.x);
  const double y0 = std::min(a.y, b.y);
  const double x1 = std::max(a.right(), b.right());
  const double y1 = std::max(a.bottom(), b.bottom());
  return Rect{x0, y0, x1 - x0, y1 - y0};
}

enum class BoxKind { kBlock, kInline, kAtomic, kText, kBreak, kAnonymous };

struct Box {
  BoxKind kind = BoxKind::kBlock;
  const html::Node* node = nullptr;  // element, text node, or null (anonymous)
  Style style;
  bool flex = false;
  bool replaced = false;
  std::vector<std::unique_ptr<Box>> children;
  Box* parent = nullptr;

  // Layout results (border box).
  Rect rect;
  double margin[4] = {0, 0, 0, 0};
  std::optional<Rect> inline_extent;  // union of inline fragments

  bool block_level() const { return kind == BoxKind::kBlock || kind == BoxKind::kAnonymous; }
  bool inline_level() const {
    return kind == BoxKind::kInline || kind == BoxKind::kAtomic || kind == BoxKind::kText ||
           kind == BoxKind::kBreak;
  }
  Box* add(std::unique_ptr<Box> child) {
    child->parent = this;
    children.push_back(std::move(child));
    return children.back().get();
  }
};

struct TextRun {
  std::string text;
  Rect rect;
  const Style* style = nullptr;
  const html::Node* owner = nullptr;  // element owning the text node
  const Box* box = nullptr;           // the text box
};

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
  });
}

class BoxBuilder {
 public:
  explicit BoxBuilder(const StyleResolver& resolver) : resolver_(resolver) {}

  std::unique_ptr<Box> build(const html::Node& element, const Style* parent_style) {
    Style st = resolver_.compute(element, parent_style);
    if (st.display == Display::kNone) return nullptr;
    auto box = std::make_unique<Box>();
    box->node = &element;
    box->style = st;
    if (element.tag == "br") {
      box->kind = BoxKind::kBreak;
      return box;
    }
    const bool replaced = element.tag == "img" || element.tag == "input" ||
                          element.tag == "canvas" || element.tag == "video" ||
                          element.tag == "iframe" || element.tag == "svg";
    box->replaced = replaced;
    switch (st.display) {
      case Display::kBlock: box->kind = BoxKind::kBlock; break;
      case Display::kFlex:
        box->kind = BoxKind::kBlock;
        box->flex = true;
        break;
      case Display::kInlineBlock: box->kind = BoxKind::kAtomic; break;
      case Display::kInlineFlex:
        box->kind = BoxKind::kAtomic;
        box->flex = true;
        break;
      default: box->kind = replaced ? BoxKind::kAtomic : BoxKind::kInline; break;
    }
    if (replaced) return box;  // no rendered children
    for (const auto& child : element.children) {
      if (child->kind == html::Node::Kind::kText) {
        if (child->text.empty()) continue;
        auto text = std::make_unique<Box>();
        text->kind = BoxKind::kText;
        text->node = child.get();
        text->style = box->style;
        box->add(std::move(text));
      } else if (child->is_element()) {
        if (auto c = build(*child, &box->style)) box->add(std::move(c));
      }
    }
    // An inline element that contains blocks is promoted to a block.
    if (box->kind == BoxKind::kInline) {
      const bool has_block = std::any_of(box->children.begin(), box->children.end(),
                                         [](const auto& c) { return c->block_level(); });
      if (has_block) box->kind = BoxKind::kBlock;
    }
    if (box->kind != BoxKind::kInline) normalize_container(*box);
    return box;
  }

 private:
  static Style anonymous_style(const Style& parent) {
    Style st;
    st.display = Display::kBlock;
    st.color = parent.color;
    st.font_size = parent.font_size;
    st.bold = parent.bold;
    st.line_height = parent.line_height;
    st.text_align = parent.text_align;
    st.visible = parent.visible;
    return st;
  }

  static bool run_is_blank(const std::vector<std::unique_ptr<Box>>& run) {
    return std::all_of(run.begin(), run.end(), [](const auto& b) {
      return b->kind == BoxKind::kText && is_blank(b->node->text);
    });
  }

  void normalize_container(Box& box) {
    if (box.flex) {
      // Every in-flow child becomes a flex item; text runs get anonymous blocks.
      std::vector<std::unique_ptr<Box>> items;
      std::vector<std::unique_ptr<Box>> run;
      const auto flush = [&] {
        if (!run.empty() && !run_is_blank(run)) {
          auto anon = std::make_unique<Box>();
          anon->kind = BoxKind::kAnonymous;
          anon->style = anonymous_style(box.style);
          for (auto& r : run) anon->add(std::move(r));
          items.push_back(std::move(anon));
        }
        run.clear();
      };
      for (auto& c : box.children) {
        if (c->kind == BoxKind::kText || c->kind == BoxKind::kBreak) {
          run.push_back(std::move(c));
          continue;
        }
        flush();
        if (c->kind == BoxKind::kInline) {
          c->kind = BoxKind::kBlock;
          normalize_container(*c);
        }
        items.push_back(std::move(c));
      }
      flush();
      box.children.clear();
      for (auto& i : items) box.add(std::move(i));
      return;
    }
    const bool any_block = std::any_of(box.children.begin(), box.children.end(),
                                       [](const auto& c) { return c->block_level(); });
    if (!any_block) return;
    std::vector<std::unique_ptr<Box>> out;
    std::vector<std::unique_ptr<Box>> run;
    const auto flush = [&] {
      if (!run.empty() && !run_is_blank(run)) {
        auto anon = std::make_unique<Box>();
        anon->kind = BoxKind::kAnonymous;
        anon->style = anonymous_style(box.style);
        for (auto& r : run) anon->add(std::move(r));
        out.push_back(std::move(anon));
      }
      run.clear();
    };
    for (auto& c : box.children) {
      if (c->block_level()) {
        flush();
        out.push_back(std::move(c));
      } else {
        run.push_back(std::move(c));
      }
    }
    flush();
    box.children.clear();
    for (auto& o : out) box.add(std::move(o));
  }

  const StyleResolver& resolver_;
};

// ---------------------------------------------------------------------------
// Layout

int utf8_length(std::string_view s) {
  int n = 0;
  for (const char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

struct Atom {
  enum class Kind { kWord, kSpace, kAtomic, kBreak, kMarker };
  Kind kind = Kind::kWord;
  std::string text;
  Box* box = nullptr;  // text box, atomic box, break box, or inline box (marker)
  std::vector<Box*> chain;  // enclosing inline boxes, outermost first
  double width = 0;
  double height = 0;
};

class LayoutEngine {
 public:
  std::vector<TextRun> runs;

  void layout_block(Box& b, double x, double y, double avail,
                    std::optional<double> forced_width = std::nullopt) {
    const Style& st = b.style;
    for (int i = 0; i < 4; ++i) b.margin[i] = st.margin[i].is_auto() ? 0.0 : st.margin[i].resolve(avail);
    const double extras = st.horizontal_extras();
    double content_w = 0;
    if (forced_width) {
      content_w = std::max(0.0, *forced_width - extras);
    } else if (!st.width.is_auto()) {
      content_w = st.width.resolve(avail);
      if (st.border_box) content_w -= extras;
      content_w = std::max(0.0, content_w);
      if (!st.max_width.is_auto()) content_w = std::min(content_w, max_content_width_limit(b, avail));
      apply_auto_margins(b, avail, content_w + extras);
    } else {
      content_w = std::max(0.0, avail - b.margin[1] - b.margin[3] - extras);
      if (!st.max_width.is_auto()) {
        content_w = std::min(content_w, max_content_width_limit(b, avail));
        apply_auto_margins(b, avail, content_w + extras);
      }
    }
    b.rect.x = x + b.margin[3];
    b.rect.y = y + b.margin[0];
    b.rect.w = content_w + extras;
    const double cx = b.rect.x + st.border[3] + st.padding[3];
    const double cy = b.rect.y + st.border[0] + st.padding[0];

    double content_h = 0;
    const std::optional<double> definite_h =
        st.height.unit == Length::Unit::kPx ? std::optional<double>(st.height.value) : std::nullopt;
    if (b.replaced) {
      content_h = replaced_height(b);
    } else if (b.flex) {
      std::optional<double> inner_h;
      if (definite_h) inner_h = std::max(0.0, *definite_h - (st.border_box ? st.vertical_extras() : 0.0));
      content_h = layout_flex(b, cx, cy, content_w, inner_h);
    } else if (!b.children.empty() && b.children.front()->block_level()) {
      double cursor = cy;
      for (auto& c : b.children) {
        layout_block(*c, cx, cursor, content_w);
        cursor = c->rect.bottom() + c->margin[2];
      }
      content_h = cursor - cy;
    } else {
      content_h = layout_inline(b, cx, cy, content_w);
    }
    if (definite_h) {
      content_h = *definite_h - (st.border_box ? st.vertical_extras() : 0.0);
    }
    if (st.min_height.unit == Length::Unit::kPx) {
      content_h = std::max(content_h, st.min_height.value - (st.border_box ? st.vertical_extras() : 0.0));
    }
    b.rect.h = std::max(0.0, content_h) + st.vertical_extras();
  }

  double max_content(const Box& b) const {
    const Style& st = b.style;
    if (b.kind == BoxKind::kText) return 0;
    if (!st.width.is_auto() && st.width.unit == Length::Unit::kPx) {
      return st.width.value + (st.border_box ? 0.0 : st.horizontal_extras());
    }
    if (b.replaced) return st.horizontal_extras();
    double inner = 0;
    if (b.flex && !st.flex_column) {
      for (std::size_t i = 0; i < b.children.size(); ++i) {
        inner += max_content(*b.children[i]) + margin_h(*b.children[i]);
        if (i) inner += st.gap;
      }
    } else if (!b.children.empty() && (b.children.front()->block_level() || b.flex)) {
      for (const auto& c : b.children) inner = std::max(inner, max_content(*c) + margin_h(*c));
    } else {
      inner = inline_max_content(b);
    }
    return inner + st.horizontal_extras();
  }

 private:
  static double margin_h(const Box& b) {
    double m = 0;
    if (b.style.margin[1].unit == Length::Unit::kPx) m += b.style.margin[1].value;
    if (b.style.margin[3].unit == Length::Unit::kPx) m += b.style.margin[3].value;
    return m;
  }

  static double max_content_width_limit(const Box& b, double avail) {
    double limit = b.style.max_width.resolve(avail);
    if (b.style.border_box) limit -= b.style.horizontal_extras();
    return std::max(0.0, limit);
  }

  static void apply_auto_margins(Box& b, double avail, double border_w) {
    const bool left_auto = is_auto_margin(b, 3);
    const bool right_auto = is_auto_margin(b, 1);
    const double free = std::max(0.0, avail - border_w - (left_auto ? 0 : b.margin[3]) -
                                          (right_auto ? 0 : b.margin[1]));
    if (left_auto && right_auto) {
      b.margin[3] = b.margin[1] = free / 2.0;
    } else if (left_auto) {
      b.margin[3] = free;
    }
  }

  static bool is_auto_margin(const Box& b, int side) { return b.style.margin[side].is_auto(); }

  double replaced_height(const Box& b) const {
    const Style& st = b.style;
    if (st.height.unit == Length::Unit::kPx) {
      return std::max(0.0, st.height.value - (st.border_box ? st.vertical_extras() : 0.0));
    }
    if (st.width.unit == Length::Unit::kPx) return st.width.value;  // square fallback
    return 0.0;
  }

  double layout_flex(Box& b, double cx, double cy, double content_w, std::optional<double> inner_h) {
    const Style& st = b.style;
    auto& items = b.children;
    if (items.empty()) return 0;
    if (st.flex_column) {
      double cursor = cy;
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) cursor += st.gap;
        layout_block(*items[i], cx, cursor, content_w);
        cursor = items[i]->rect.bottom() + items[i]->margin[2];
      }
      return cursor - cy;
    }
    const std::size_t n = items.size();
    std::vector<double> basis(n), margins(n);
    double grow_total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Box& item = *items[i];
      const Style& is = item.style;
      margins[i] = margin_h(item);
      if (!is.width.is_auto()) {
        double w = is.width.resolve(content_w);
        if (!is.border_box) w += is.horizontal_extras();
        basis[i] = w;
      } else if (is.flex_grow > 0 && is.flex_basis_zero) {
        basis[i] = is.horizontal_extras();
      } else {
        basis[i] = std::min(max_content(item), std::max(0.0, content_w - margins[i]));
      }
      grow_total += is.flex_grow;
    }
    double used = st.gap * static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) used += basis[i] + margins[i];
    double free = content_w - used;
    std::vector<double> widths = basis;
    if (free > 0 && grow_total > 0) {
      for (std::size_t i = 0; i < n; ++i) {
        widths[i] += free * items[i]->style.flex_grow / grow_total;
      }
      free = 0;
    } else if (free < 0) {
      double total_basis = 0;
      for (const double w : basis) total_basis += w;
      if (total_basis > 0) {
        for (std::size_t i = 0; i < n; ++i) {
          widths[i] = std::max(0.0, basis[i] + free * basis[i] / total_basis);
        }
      }
      free = 0;
    }
    double x = cx;
    double spacing = st.gap;
    if (free > 0) {
      if (st.justify == Justify::kCenter) x += free / 2;
      else if (st.justify == Justify::kEnd) x += free;
      else if (st.justify == Justify::kSpaceBetween && n > 1) spacing += free / static_cast<double>(n - 1);
    }
    double line_h = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Box& item = *items[i];
      layout_block(item, x, cy, widths[i] + margins[i], widths[i]);
      x = item.rect.right() + item.margin[1] + spacing;
      line_h = std::max(line_h, item.rect.h + item.margin[0] + item.margin[2]);
    }
    if (inner_h) line_h = *inner_h;
    for (auto& ip : items) {
      Box& item = *ip;
      const double slot = line_h - item.margin[0] - item.margin[2];
      if (st.align_items == AlignItems::kStretch && item.style.height.is_auto()) {
        item.rect.h = std::max(item.rect.h, slot);
      } else if (st.align_items == AlignItems::kCenter) {
        translate(item, 0, std::max(0.0, (slot - item.rect.h) / 2));
      } else if (st.align_items == AlignItems::kEnd) {
        translate(item, 0, std::max(0.0, slot - item.rect.h));
      }
    }
    return line_h;
  }

  void translate(Box& b, double dx, double dy) {
    b.rect.x += dx;
    b.rect.y += dy;
    if (b.inline_extent) {
      b.inline_extent->x += dx;
      b.inline_extent->y += dy;
    }
    for (auto& r : runs) {
      if (is_descendant(r.box, &b)) {
        r.rect.x += dx;
        r.rect.y += dy;
      }
    }
    translate_children(b, dx, dy);
  }

  void translate_children(Box& b, double dx, double dy) {
    for (auto& c : b.children) {
      c->rect.x += dx;
      c->rect.y += dy;
      if (c->inline_extent) {
        c->inline_extent->x += dx;
        c->inline_extent->y += dy;
      }
      translate_children(*c, dx, dy);
    }
  }

  static bool is_descendant(const Box* b, const Box* ancestor) {
    for (; b; b = b->parent) {
      if (b == ancestor) return true;
    }
    return false;
  }

  void collect_atoms(Box& b, std::vector<Box*>& chain, std::vector<Atom>& atoms) {
    for (auto& cp : b.children) {
      Box& c = *cp;
      switch (c.kind) {
        case BoxKind::kText: {
          const std::string& text = c.node->text;
          std::size_t i = 0;
          while (i < text.size()) {
            if (is_blank(std::string_view(&text[i], 1))) {
              Atom a;
              a.kind = Atom::Kind::kSpace;
              a.box = &c;
              a.chain = chain;
              a.width = c.style.advance();
              a.height = 0;
              atoms.push_back(std::move(a));
              while (i < text.size() && is_blank(std::string_view(&text[i], 1))) ++i;
              continue;
            }
            const std::size_t start = i;
            while (i < text.size() && !is_blank(std::string_view(&text[i], 1))) ++i;
            Atom a;
            a.kind = Atom::Kind::kWord;
            a.text = text.substr(start, i - start);
            a.box = &c;
            a.chain = chain;
            a.width = c.style.advance() * utf8_length(a.text);
            a.height = c.style.computed_line_height();
            atoms.push_back(std::move(a));
          }
          break;
        }
        case BoxKind::kBreak: {
          Atom a;
          a.kind = Atom::Kind::kBreak;
          a.box = &c;
          a.chain = chain;
          a.height = c.style.computed_line_height();
          atoms.push_back(std::move(a));
          break;
        }
        case BoxKind::kAtomic: {
          Atom a;
          a.kind = Atom::Kind::kAtomic;
          a.box = &c;
          a.chain = chain;
          atoms.push_back(std::move(a));
          break;
        }
        case BoxKind::kInline: {
          Atom marker;
          marker.kind = Atom::Kind::kMarker;
          marker.box = &c;
          marker.chain = chain;
          atoms.push_back(std::move(marker));
          chain.push_back(&c);
          collect_atoms(c, chain, atoms);
          chain.pop_back();
          break;
        }
        default:
          break;
      }
    }
  }

  double inline_max_content(const Box& b) const {
    std::vector<Atom> atoms;
    std::vector<Box*> chain;
    const_cast<LayoutEngine*>(this)->collect_atoms(const_cast<Box&>(b), chain, atoms);
    double best = 0, line = 0;
    bool pending_space = false;
    double space_w = 0;
    for (const auto& a : atoms) {
      switch (a.kind) {
        case Atom::Kind::kSpace:
          if (line > 0) {
            pending_space = true;
            space_w = a.width;
          }
          break;
        case Atom::Kind::kBreak:
          best = std::max(best, line);
          line = 0;
          pending_space = false;
          break;
        case Atom::Kind::kWord:
        case Atom::Kind::kAtomic: {
          const double w = a.kind == Atom::Kind::kWord ? a.width : max_content(*a.box) + margin_h(*a.box);
          if (pending_space) line += space_w;
          line += w;
          pending_space = false;
          break;
        }
        case Atom::Kind::kMarker:
          break;
      }
    }
    return std::max(best, line);
  }

  struct Placed {
    std::size_t atom;
    double x;
    double w;
    double h;
  };

  double layout_inline(Box& container, double cx, double cy, double avail) {
    std::vector<Atom> atoms;
    std::vector<Box*> chain;
    collect_atoms(container, chain, atoms);
    if (atoms.empty()) return 0;

    // Atomic boxes are laid out up front to know their size.
    for (auto& a : atoms) {
      if (a.kind != Atom::Kind::kAtomic) continue;
      Box& box = *a.box;
      double w;
      const Style& s = box.style;
      if (!s.width.is_auto()) {
        w = s.width.resolve(avail) + (s.border_box ? 0.0 : s.horizontal_extras());
      } else if (box.replaced) {
        w = s.horizontal_extras();
      } else {
        w = std::min(max_content(box), std::max(0.0, avail - margin_h(box)));
      }
      layout_block(box, 0, 0, w + margin_h(box), w);
      a.width = box.rect.w + box.margin[1] + box.margin[3];
      a.height = box.rect.h + box.margin[0] + box.margin[2];
    }

    std::vector<std::vector<Placed>> lines(1);
    std::vector<double> line_widths(1, 0.0);
    double x = 0;
    double pending = 0;
    bool has_content = false;
    const auto new_line = [&] {
      lines.emplace_back();
      line_widths.push_back(0);
      x = 0;
      pending = 0;
    };
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const Atom& a = atoms[i];
      switch (a.kind) {
        case Atom::Kind::kSpace:
          if (!lines.back().empty() && x > 0) pending = a.width;
          break;
        case Atom::Kind::kBreak:
          lines.back().push_back(Placed{i, x, 0, a.height});
          has_content = true;
          new_line();
          break;
        case Atom::Kind::kMarker:
          lines.back().push_back(Placed{i, x + pending, 0, 0});
          break;
        case Atom::Kind::kWord:
        case Atom::Kind::kAtomic: {
          if (x > 0 && x + pending + a.width > avail + 1e-9) new_line();
          x += pending;
          pending = 0;
          lines.back().push_back(Placed{i, x, a.width, a.height});
          x += a.width;
          line_widths.back() = x;
          has_content = true;
          break;
        }
      }
    }
    if (!has_content) {
      // Only markers: position empty inline boxes at the line start.
      for (const auto& p : lines.front()) {
        Box* box = atoms[p.atom].box;
        box->inline_extent = Rect{cx, cy, 0, 0};
      }
      return 0;
    }
    if (lines.back().empty()) {
      lines.pop_back();
      line_widths.pop_back();
    }

    const TextAlign align = container.style.text_align;
    double y = cy;
    for (std::size_t li = 0; li < lines.size(); ++li) {
      double line_h = 0;
      for (const auto& p : lines[li]) line_h = std::max(line_h, p.h);
      double shift = 0;
      if (align == TextAlign::kCenter) shift = std::max(0.0, (avail - line_widths[li]) / 2);
      if (align == TextAlign::kRight) shift = std::max(0.0, avail - line_widths[li]);
      for (const auto& p : lines[li]) {
        const Atom& a = atoms[p.atom];
        const Rect r{cx + shift + p.x, y + line_h - p.h, p.w, p.h};
        if (a.kind == Atom::Kind::kWord) {
          runs.push_back(TextRun{a.text, r, &a.box->style, a.box->node->parent, a.box});
        } else if (a.kind == Atom::Kind::kAtomic) {
          Box& box = *a.box;
          translate(box, r.x - (box.rect.x - box.margin[3]), r.y - (box.rect.y - box.margin[0]));
        } else {
          a.box->inline_extent = extend(a.box->inline_extent, Rect{r.x, y, 0, a.kind == Atom::Kind::kBreak ? p.h : 0});
        }
        // Grow every enclosing inline box's fragment.
        if (a.kind != Atom::Kind::kMarker) {
          Rect frag = r;
          if (a.kind == Atom::Kind::kAtomic) {
            frag = a.box->rect;
          }
          for (Box* inl : a.chain) inl->inline_extent = extend(inl->inline_extent, frag);
        }
      }
      y += line_h;
    }
    return y - cy;
  }

  static std::optional<Rect> extend(const std::optional<Rect>& a, const Rect& b) {
    if (!a) return b;
    // A zero-size marker rect is replaced by real content.
    if (a->w == 0 && a->h == 0) return b.w == 0 && b.h == 0 ? *a : b;
    if (b.w == 0 && b.h == 0) return a;
    return unite(*a, b);
  }
};

// ---------------------------------------------------------------------------
// Paint

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::uint32_t> code_points(std::string_view s) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::uint32_t cp = c;
    std::size_t len = 1;
    if (c >= 0xF0) { cp = c & 0x07; len = 4; }
    else if (c >= 0xE0) { cp = c & 0x0F; len = 3; }
    else if (c >= 0xC0) { cp = c & 0x1F; len = 2; }
    for (std::size_t k = 1; k < len && i + k < s.size(); ++k) {
      cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

BBox to_pixels(const Rect& r) {
  const long x0 = std::lround(r.x);
  const long y0 = std::lround(r.y);
  const long x1 = std::lround(r.right());
  const long y1 = std::lround(r.bottom());
  return BBox{static_cast<int>(x0), static_cast<int>(y0), static_cast<int>(std::max(0L, x1 - x0)),
              static_cast<int>(std::max(0L, y1 - y0))};
}

void paint_glyphs(Image& img, const TextRun& run) {
  const Style& st = *run.style;
  const double adv = st.advance();
  const double fs = st.font_size;
  const double text_top = run.rect.y + (run.rect.h - fs) / 2.0;
  const double gy = text_top + fs * 0.15;
  const double gh = fs * 0.75;
  double x = run.rect.x;
  for (const auto cp : code_points(run.text)) {
    std::uint64_t bits = mix64(cp) & ((1ULL << 35) - 1);
    if (__builtin_popcountll(bits) < 8) bits |= 0x1FULL << 15;
    const double gx = x + adv * 0.1;
    const double gw = adv * 0.8;
    for (int row = 0; row < 7; ++row) {
      for (int col = 0; col < 5; ++col) {
        if (!((bits >> (row * 5 + col)) & 1ULL)) continue;
        const long x0 = std::lround(gx + gw * col / 5.0);
        long x1 = std::lround(gx + gw * (col + 1) / 5.0);
        const long y0 = std::lround(gy + gh * row / 7.0);
        long y1 = std::lround(gy + gh * (row + 1) / 7.0);
        if (x1 <= x0) x1 = x0 + 1;
        if (y1 <= y0) y1 = y0 + 1;
        if (st.bold) ++x1;
        img.fill_rect(BBox{static_cast<int>(x0), static_cast<int>(y0), static_cast<int>(x1 - x0),
                           static_cast<int>(y1 - y0)},
                      st.color);
      }
    }
    x += adv;
  }
}

void paint_replaced(Image& img, const Box& b) {
  const BBox r = to_pixels(b.rect);
  const std::string* src = b.node->attr("src");
  const std::uint64_t h = mix64(std::hash<std::string>{}(src ? *src : b.node->tag));
  const Rgb base{static_cast<std::uint8_t>(96 + (h & 0x7F)),
                 static_cast<std::uint8_t>(96 + ((h >> 8) & 0x7F)),
                 static_cast<std::uint8_t>(96 + ((h >> 16) & 0x7F))};
  const Rgb light{static_cast<std::uint8_t>(std::min(255, base.r + 48)),
                  static_cast<std::uint8_t>(std::min(255, base.g + 48)),
                  static_cast<std::uint8_t>(std::min(255, base.b + 48))};
  const BBox c = r.clamped(img.width(), img.height());
  for (int y = c.y; y < c.y + c.h; ++y) {
    for (int x = c.x; x < c.x + c.w; ++x) {
      img.set(x, y, (((x - r.x) + (y - r.y)) / 8) % 2 ? light : base);
    }
  }
}

void paint_borders(Image& img, const Box& b) {
  const Style& st = b.style;
  const Rect& r = b.rect;
  const Rgb c = st.border_color;
  if (st.border[0] > 0) img.fill_rect(to_pixels(Rect{r.x, r.y, r.w, st.border[0]}), c);
  if (st.border[2] > 0) img.fill_rect(to_pixels(Rect{r.x, r.bottom() - st.border[2], r.w, st.border[2]}), c);
  if (st.border[3] > 0) img.fill_rect(to_pixels(Rect{r.x, r.y, st.border[3], r.h}), c);
  if (st.border[1] > 0) img.fill_rect(to_pixels(Rect{r.right() - st.border[1], r.y, st.border[1], r.h}), c);
}

void paint_backgrounds(Image& img, const Box& b, const Box* canvas_source) {
  if (b.style.visible) {
    if (b.kind == BoxKind::kInline) {
      if (b.style.background && b.inline_extent) img.fill_rect(to_pixels(*b.inline_extent), *b.style.background);
    } else if (b.kind != BoxKind::kText && b.kind != BoxKind::kBreak) {
      if (b.style.background && &b != canvas_source) img.fill_rect(to_pixels(b.rect), *b.style.background);
      paint_borders(img, b);
      if (b.replaced) paint_replaced(img, b);
    }
  }
  for (const auto& c : b.children) paint_backgrounds(img, *c, canvas_source);
}

void for_each_box(const Box& b, const std::function<void(const Box&)>& fn) {
  fn(b);
  for (const auto& c : b.children) for_each_box(*c, fn);
}

Rect box_extent(const Box& b) {
  if (b.kind == BoxKind::kInline || b.kind == BoxKind::kBreak) {
    return b.inline_extent.value_or(Rect{});
  }
  return b.rect;
}

std::string sanitize_tag(std::string_view tag) {
  std::string out;
  for (const char c : tag) {
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) out += c;
  }
  if (out.empty() || !(out[0] >= 'a' && out[0] <= 'z')) out = "x" + out;
  return out;
}

void mirror(const Box& b, CoarseNode& out, std::vector<const html::Node*>& order) {
  for (const auto& c : b.children) {
    if (c->kind == BoxKind::kText) continue;
    if (c->kind == BoxKind::kAnonymous) {
      mirror(*c, out, order);
      continue;
    }
    CoarseNode child;
    child.tag = sanitize_tag(c->node->tag);
    child.bbox = to_pixels(box_extent(*c));
    out.children.push_back(std::move(child));
    // Pre-order: record this element, then descend.
    order.push_back(c->node);
    mirror(*c, out.children.back(), order);
  }
}

const Box* find_box(const Box& b, const html::Node* node) {
  if (b.node == node) return &b;
  for (const auto& c : b.children) {
    if (const Box* hit = find_box(*c, node)) return hit;
  }
  return nullptr;
}

}  // namespace

LaidOutPage layout_page(std::string_view html_text, int viewport_width) {
  if (viewport_width <= 0) fail(ErrorCode::kInvalidArgument, "viewport width must be positive");
  LaidOutPage page;
  page.document = html::parse_document(html_text);
  const html::Node* html_el = html::find_first(*page.document, "html");
  const StyleResolver resolver(*page.document);
  BoxBuilder builder(resolver);
  auto root = builder.build(*html_el, nullptr);
  if (!root) {
    // <html style="display:none">: an empty white page with a bare body.
    page.result.screenshot = Image(viewport_width, 1);
    page.result.element_tree = CoarseDomTree{CoarseNode{"body", {0, 0, viewport_width, 0}, {}},
                                             viewport_width, 1};
    page.result.viewport_width = viewport_width;
    page.result.blocks = std::vector<Block>{};
    page.tree_elements.push_back(html::find_first(*page.document, "body"));
    return page;
  }
  root->kind = BoxKind::kBlock;
  LayoutEngine engine;
  engine.layout_block(*root, 0, 0, viewport_width);

  double bottom = root->rect.bottom();
  for_each_box(*root, [&](const Box& b) { bottom = std::max(bottom, box_extent(b).bottom()); });
  for (const auto& r : engine.runs) bottom = std::max(bottom, r.rect.bottom());
  const int page_h = std::max(1, static_cast<int>(std::ceil(bottom - 1e-9)));

  const html::Node* body_el = html::find_first(*page.document, "body");
  const Box* body_box = find_box(*root, body_el);

  // Canvas background propagates from html, else body.
  const Box* canvas_source = nullptr;
  Rgb canvas{255, 255, 255};
  if (root->style.background) {
    canvas = *root->style.background;
    canvas_source = root.get();
  } else if (body_box && body_box->style.background) {
    canvas = *body_box->style.background;
    canvas_source = body_box;
  }

  Image img(viewport_width, page_h, canvas);
  paint_backgrounds(img, *root, canvas_source);
  for (const auto& run : engine.runs) {
    if (run.style->visible) paint_glyphs(img, run);
  }

  CoarseDomTree tree;
  tree.page_width = viewport_width;
  tree.page_height = page_h;
  if (body_box) {
    tree.root.tag = "body";
    tree.root.bbox = to_pixels(body_box->rect);
    page.tree_elements.push_back(body_el);
    mirror(*body_box, tree.root, page.tree_elements);
  } else {
    // body hidden via display:none: the page renders empty.
    tree.root = CoarseNode{"body", {0, 0, viewport_width, 0}, {}};
    page.tree_elements.push_back(body_el);
  }

  // Blocks: one per element with visible own text.
  std::vector<Block> blocks;
  std::map<const html::Node*, std::size_t> index;
  std::vector<std::pair<const html::Node*, Rect>> order;
  for (const auto& run : engine.runs) {
    if (!run.style->visible) continue;
    const auto it = index.find(run.owner);
    if (it == index.end()) {
      index.emplace(run.owner, order.size());
      order.emplace_back(run.owner, run.rect);
    } else {
      order[it->second].second = unite(order[it->second].second, run.rect);
    }
  }
  // Document order of owners.
  std::vector<const html::Node*> doc_order;
  std::function<void(const html::Node&)> walk = [&](const html::Node& n) {
    if (n.is_element()) doc_order.push_back(&n);
    for (const auto& c : n.children) walk(*c);
  };
  walk(*page.document);
  for (const html::Node* el : doc_order) {
    const auto it = index.find(el);
    if (it == index.end()) continue;
    const std::string text = normalize_whitespace(html::own_text(*el));
    if (text.empty()) continue;
    const Box* box = find_box(*root, el);
    Block blk;
    blk.text = text;
    blk.bbox = to_pixels(order[it->second].second).clamped(viewport_width, page_h);
    blk.fg = box ? box->style.color : Rgb{0, 0, 0};
    blk.bg = canvas;
    for (const Box* b = box; b; b = b->parent) {
      if (b->style.background) {
        blk.bg = *b->style.background;
        break;
      }
    }
    blocks.push_back(std::move(blk));
  }

  page.result.screenshot = std::move(img);
  page.result.element_tree = std::move(tree);
  page.result.viewport_width = viewport_width;
  page.result.blocks = std::move(blocks);
  normalize_render_result(page.result, viewport_width);
  return page;
}

RenderResult BuiltinRenderer::render(std::string_view html_text, int viewport_width) {
  return layout_page(html_text, viewport_width).result;
}

std::string BuiltinRenderer::identifier() const { return "builtin-layout/1"; }

}  // namespace hiergen
