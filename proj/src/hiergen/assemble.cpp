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


#include "hiergen/assemble.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <functional>
#include <map>
#include <set>

#include "hiergen/error.hpp"
#include "hiergen/html.hpp"

namespace hiergen {

LeafFragment LeafFragment::from(const GeneratedFragment& fragment) {
  LeafFragment f;
  f.path = fragment.leaf_path;
  f.html = fragment.html;
  return f;
}

LeafFragment LeafFragment::failure(NodePath path, std::string reason) {
  LeafFragment f;
  f.path = std::move(path);
  f.failed = true;
  f.reason = std::move(reason);
  return f;
}

bool is_contentless_tag(std::string_view tag) {
  return html::is_void_element(tag) || html::is_raw_text_element(tag);
}

namespace {

std::string bbox_attr(const BBox& b) {
  return std::to_string(b.x) + "," + std::to_string(b.y) + "," + std::to_string(b.w) + "," +
         std::to_string(b.h);
}

void strip_markers(html::Node& node) {
  if (node.is_element()) {
    node.remove_attr(kPathAttr);
    node.remove_attr(kBoxAttr);
  }
  for (auto& c : node.children) strip_markers(*c);
}

// Balanced re-serialization so fragment markup cannot close or swallow its
// surrounding marked elements.
std::string normalize_fragment(std::string_view fragment) {
  auto root = html::parse_fragment(fragment);
  strip_markers(*root);
  return html::inner_html(*root);
}

std::string comment_safe(std::string text) {
  for (auto p = text.find("--"); p != std::string::npos; p = text.find("--")) text.replace(p, 2, "- ");
  if (!text.empty() && (text.back() == '-')) text += ' ';
  return text;
}

void emit(const CoarseNode& node, NodePath& path, const std::map<NodePath, const LeafFragment*>& by_path,
          std::string& out) {
  const bool is_void = html::is_void_element(node.tag);
  if (!node.children.empty() && is_contentless_tag(node.tag)) {
    fail(ErrorCode::kInvariantViolation, "<" + node.tag + "> cannot have child nodes in HTML");
  }
  out += "<" + node.tag + " " + std::string(kPathAttr) + "=\"" + path_to_string(path) + "\" " +
         std::string(kBoxAttr) + "=\"" + bbox_attr(node.bbox) + "\">";
  if (is_void) return;
  if (node.children.empty()) {
    if (!is_contentless_tag(node.tag)) {
      const LeafFragment* f = by_path.at(path);
      if (f->failed) {
        out += "<!-- " + std::string(kFailureMarker) + " " + path_to_string(path);
        if (!f->reason.empty()) out += " " + comment_safe(f->reason);
        out += " -->";
      } else {
        out += normalize_fragment(f->html);
      }
    }
  } else {
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      path.push_back(static_cast<int>(i));
      emit(node.children[i], path, by_path, out);
      path.pop_back();
    }
  }
  out += "</" + node.tag + ">";
}

}  // namespace

std::string assemble(const CoarseDomTree& tree, const std::vector<LeafFragment>& fragments) {
  validate_tree(tree);
  std::map<NodePath, const LeafFragment*> by_path;
  for (const auto& f : fragments) {
    if (!by_path.emplace(f.path, &f).second) {
      fail(ErrorCode::kDuplicateLeafPath, "duplicate fragment for leaf " + path_to_string(f.path));
    }
  }
  for (const auto& [path, leaf] : collect_leaves(tree.root)) {
    if (!is_contentless_tag(leaf->tag) && !by_path.count(path)) {
      fail(ErrorCode::kMissingFragment, "no fragment for leaf \"" + path_to_string(path) + "\"");
    }
  }
  std::string out =
      "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<meta name=\"" +
      std::string(kPageMetaName) + "\" content=\"" + std::to_string(tree.page_width) + "," +
      std::to_string(tree.page_height) + "\">\n<style></style>\n</head>\n";
  NodePath path;
  if (tree.root.tag == "body") {
    emit(tree.root, path, by_path, out);
  } else {
    out += "<body>";
    emit(tree.root, path, by_path, out);
    out += "</body>";
  }
  out += "\n</html>\n";
  return out;
}

namespace {

BBox parse_bbox_attr(const std::string& value) {
  BBox b;
  int* fields[4] = {&b.x, &b.y, &b.w, &b.h};
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    const auto comma = value.find(',', pos);
    if ((i < 3) == (comma == std::string::npos)) {
      fail(ErrorCode::kMarkerCorruption, "malformed " + std::string(kBoxAttr) + "=\"" + value + "\"");
    }
    std::string part = value.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const auto b0 = part.find_first_not_of(' ');
    const auto e0 = part.find_last_not_of(' ');
    part = b0 == std::string::npos ? "" : part.substr(b0, e0 - b0 + 1);
    const auto res = std::from_chars(part.data(), part.data() + part.size(), *fields[i]);
    if (part.empty() || res.ec != std::errc() || res.ptr != part.data() + part.size()) {
      fail(ErrorCode::kMarkerCorruption, "malformed " + std::string(kBoxAttr) + "=\"" + value + "\"");
    }
    pos = comma == std::string::npos ? value.size() : comma + 1;
  }
  if (b.w < 0 || b.h < 0) {
    fail(ErrorCode::kMarkerCorruption, "negative size in " + std::string(kBoxAttr) + "=\"" + value + "\"");
  }
  return b;
}

struct Marked {
  std::string tag;
  std::string label;
  std::vector<Marked> children;
};

void collect_marked(const html::Node& node, std::vector<Marked>& out) {
  for (const auto& c : node.children) {
    if (!c->is_element()) continue;
    if (const std::string* label = c->attr(kPathAttr)) {
      Marked m;
      m.tag = c->tag;
      m.label = *label;
      collect_marked(*c, m.children);
      out.push_back(std::move(m));
    } else {
      collect_marked(*c, out);
    }
  }
}

std::vector<Marked> marked_forest(std::string_view document) {
  const auto doc = html::parse_document(document, false);
  std::vector<Marked> roots;
  collect_marked(*doc, roots);
  return roots;
}

}  // namespace

CoarseDomTree extract_coarse(std::string_view document) {
  const auto doc = html::parse_document(document, false);
  std::function<void(const html::Node&, std::vector<CoarseNode>&)> walk =
      [&](const html::Node& node, std::vector<CoarseNode>& out) {
        for (const auto& c : node.children) {
          if (!c->is_element()) continue;
          if (c->attr(kPathAttr)) {
            const std::string* bb = c->attr(kBoxAttr);
            if (!bb) fail(ErrorCode::kMarkerCorruption, "marked <" + c->tag + "> lacks " + std::string(kBoxAttr));
            CoarseNode n;
            n.tag = c->tag;
            n.bbox = parse_bbox_attr(*bb);
            walk(*c, n.children);
            out.push_back(std::move(n));
          } else {
            walk(*c, out);
          }
        }
      };
  std::vector<CoarseNode> roots;
  walk(*doc, roots);
  if (roots.empty()) fail(ErrorCode::kMarkerCorruption, "document has no marked elements");
  if (roots.size() > 1) fail(ErrorCode::kMarkerCorruption, "document has several marked roots");
  CoarseDomTree tree;
  tree.root = std::move(roots.front());
  bool have_page = false;
  std::vector<const html::Node*> metas;
  html::collect_elements(*doc, "meta", metas);
  for (const auto* m : metas) {
    const std::string* name = m->attr("name");
    const std::string* content = m->attr("content");
    if (!name || *name != kPageMetaName || !content) continue;
    const auto comma = content->find(',');
    int w = 0, h = 0;
    if (comma == std::string::npos ||
        std::from_chars(content->data(), content->data() + comma, w).ec != std::errc() ||
        std::from_chars(content->data() + comma + 1, content->data() + content->size(), h).ec != std::errc() ||
        w <= 0 || h <= 0) {
      fail(ErrorCode::kMarkerCorruption, "malformed page meta \"" + *content + "\"");
    }
    tree.page_width = w;
    tree.page_height = h;
    have_page = true;
    break;
  }
  if (!have_page) {
    tree.page_width = std::max(1, tree.root.bbox.x + tree.root.bbox.w);
    tree.page_height = std::max(1, tree.root.bbox.y + tree.root.bbox.h);
  }
  return tree;
}

namespace {

void expected_forest(const CoarseNode& node, NodePath& path, Marked& out) {
  out.tag = node.tag;
  out.label = path_to_string(path);
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    path.push_back(static_cast<int>(i));
    out.children.emplace_back();
    expected_forest(node.children[i], path, out.children.back());
    path.pop_back();
  }
}

bool same_structure(const Marked& a, const Marked& b) {
  if (a.tag != b.tag || a.label != b.label || a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!same_structure(a.children[i], b.children[i])) return false;
  }
  return true;
}

// (label, tag, parent label) triples.
void placements(const Marked& m, const std::string& parent, std::set<std::array<std::string, 3>>& out) {
  out.insert({m.label, m.tag, parent});
  for (const auto& c : m.children) placements(c, m.label, out);
}

}  // namespace

PreservationReport validate_preservation(const CoarseDomTree& before, std::string_view refined) {
  Marked expected;
  NodePath path;
  expected_forest(before.root, path, expected);
  const std::vector<Marked> actual = marked_forest(refined);

  PreservationReport report;
  report.preserved = actual.size() == 1 && same_structure(expected, actual.front());
  if (report.preserved) return report;

  std::set<std::array<std::string, 3>> want, have;
  placements(expected, "^", want);
  for (const auto& r : actual) placements(r, "^", have);
  for (const auto& p : want) {
    if (!have.count(p)) report.missing.push_back(p[0]);
  }
  for (const auto& p : have) {
    if (!want.count(p)) report.extra_marked.push_back(p[0]);
  }
  return report;
}

int count_failure_markers(std::string_view document) {
  int n = 0;
  const std::string needle = "<!-- " + std::string(kFailureMarker);
  for (auto p = document.find(needle); p != std::string_view::npos; p = document.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace hiergen
