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

#include "hiergen/tree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "hiergen/error.hpp"

namespace hiergen {

BBox BBox::clamped(int width, int height) const {
  const long long x0 = std::clamp<long long>(x, 0, width);
  const long long y0 = std::clamp<long long>(y, 0, height);
  const long long x1 = std::clamp<long long>(static_cast<long long>(x) + w, 0, width);
  const long long y1 = std::clamp<long long>(static_cast<long long>(y) + h, 0, height);
  return BBox{static_cast<int>(x0), static_cast<int>(y0),
              static_cast<int>(std::max(0LL, x1 - x0)),
              static_cast<int>(std::max(0LL, y1 - y0))};
}

std::string path_to_string(const NodePath& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(path[i]);
  }
  return out;
}

NodePath path_from_string(std::string_view text) {
  NodePath path;
  if (text.empty()) return path;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto dot = text.find('.', start);
    const auto part = text.substr(start, dot == std::string_view::npos
                                             ? std::string_view::npos
                                             : dot - start);
    int value = 0;
    const auto [ptr, ec] =
        std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || ptr != part.data() + part.size() || value < 0 ||
        part.empty()) {
      fail(ErrorCode::kInvalidArgument,
           "malformed node path '" + std::string(text) + "'");
    }
    path.push_back(value);
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return path;
}

bool is_valid_tag(std::string_view tag) {
  if (tag.empty() || tag.front() < 'a' || tag.front() > 'z') return false;
  return std::all_of(tag.begin(), tag.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
  });
}

namespace {

void validate_node(const CoarseNode& node, const NodePath& path) {
  if (!is_valid_tag(node.tag)) {
    fail(ErrorCode::kInvariantViolation,
         "invalid tag '" + node.tag + "' at node [" + path_to_string(path) + "]");
  }
  if (node.bbox.w < 0 || node.bbox.h < 0) {
    fail(ErrorCode::kSchemaViolation,
         "negative bbox size at node [" + path_to_string(path) + "]");
  }
  NodePath child_path = path;
  child_path.push_back(0);
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    child_path.back() = static_cast<int>(i);
    validate_node(node.children[i], child_path);
  }
}

void append_escaped(std::string& out, std::string_view s) {
  out += '"';
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void write_node(std::string& out, const CoarseNode& node) {
  out += "{\"t\":";
  append_escaped(out, node.tag);
  out += ",\"b\":[";
  out += std::to_string(node.bbox.x);
  out += ',';
  out += std::to_string(node.bbox.y);
  out += ',';
  out += std::to_string(node.bbox.w);
  out += ',';
  out += std::to_string(node.bbox.h);
  out += "],\"c\":[";
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    if (i) out += ',';
    write_node(out, node.children[i]);
  }
  out += "]}";
}

int json_int(const nlohmann::json& v, const char* what) {
  if (v.is_number_integer()) {
    const auto n = v.get<long long>();
    if (n < INT32_MIN || n > INT32_MAX) {
      fail(ErrorCode::kSchemaViolation, std::string(what) + " out of range");
    }
    return static_cast<int>(n);
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (!std::isfinite(d) || std::abs(d) > 2e9) {
      fail(ErrorCode::kSchemaViolation, std::string(what) + " out of range");
    }
    return static_cast<int>(std::lround(d));
  }
  fail(ErrorCode::kSchemaViolation, std::string(what) + " must be a number");
}

CoarseNode node_from_json(const nlohmann::json& j, int depth) {
  if (depth > 4096) fail(ErrorCode::kSchemaViolation, "tree nesting too deep");
  if (!j.is_object()) fail(ErrorCode::kSchemaViolation, "node must be an object");
  const auto t = j.find("t");
  const auto b = j.find("b");
  const auto c = j.find("c");
  if (t == j.end() || b == j.end() || c == j.end()) {
    fail(ErrorCode::kSchemaViolation, "node requires keys t, b and c");
  }
  if (!t->is_string()) fail(ErrorCode::kSchemaViolation, "t must be a string");
  if (!b->is_array() || b->size() != 4) {
    fail(ErrorCode::kSchemaViolation, "b must be an array of 4 numbers");
  }
  if (!c->is_array()) fail(ErrorCode::kSchemaViolation, "c must be an array");

  CoarseNode node;
  node.tag = t->get<std::string>();
  std::transform(node.tag.begin(), node.tag.end(), node.tag.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  node.bbox = BBox{json_int((*b)[0], "b[0]"), json_int((*b)[1], "b[1]"),
                   json_int((*b)[2], "b[2]"), json_int((*b)[3], "b[3]")};
  if (node.bbox.w < 0 || node.bbox.h < 0) {
    fail(ErrorCode::kSchemaViolation, "bbox width and height must be non-negative");
  }
  if (!is_valid_tag(node.tag)) {
    fail(ErrorCode::kInvariantViolation, "invalid tag '" + node.tag + "'");
  }
  node.children.reserve(c->size());
  for (const auto& child : *c) node.children.push_back(node_from_json(child, depth + 1));
  return node;
}

}  // namespace

void validate_tree(const CoarseDomTree& tree) {
  if (tree.page_width <= 0 || tree.page_height <= 0) {
    fail(ErrorCode::kInvariantViolation, "page dimensions must be positive");
  }
  validate_node(tree.root, {});
}

std::string serialize_node(const CoarseNode& node) {
  std::string out;
  write_node(out, node);
  return out;
}

std::string serialize_tree(const CoarseDomTree& tree) {
  std::string out = "{\"w\":" + std::to_string(tree.page_width) +
                    ",\"h\":" + std::to_string(tree.page_height) + ",\"root\":";
  write_node(out, tree.root);
  out += '}';
  return out;
}

CoarseDomTree parse_tree(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kMalformedJson, e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::kSchemaViolation, "tree must be an object");
  const auto w = doc.find("w");
  const auto h = doc.find("h");
  const auto root = doc.find("root");
  if (w == doc.end() || h == doc.end() || root == doc.end()) {
    fail(ErrorCode::kSchemaViolation, "tree requires keys w, h and root");
  }
  CoarseDomTree tree;
  tree.page_width = json_int(*w, "w");
  tree.page_height = json_int(*h, "h");
  tree.root = node_from_json(*root, 0);
  validate_tree(tree);
  return tree;
}

void visit_nodes(const CoarseNode& root,
                 const std::function<void(const CoarseNode&, int, const NodePath&)>& fn) {
  NodePath path;
  const std::function<void(const CoarseNode&, int)> walk = [&](const CoarseNode& n,
                                                                int depth) {
    fn(n, depth, path);
    path.push_back(0);
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      path.back() = static_cast<int>(i);
      walk(n.children[i], depth + 1);
    }
    path.pop_back();
  };
  walk(root, 1);
}

TreeStats tree_stats(const CoarseDomTree& tree) {
  TreeStats stats;
  std::set<std::string> tags;
  visit_nodes(tree.root, [&](const CoarseNode& n, int depth, const NodePath&) {
    ++stats.node_count;
    stats.max_depth = std::max(stats.max_depth, depth);
    if (n.is_leaf()) ++stats.leaf_count;
    tags.insert(n.tag);
  });
  stats.unique_tags = static_cast<int>(tags.size());
  return stats;
}

std::vector<std::pair<NodePath, const CoarseNode*>> collect_leaves(const CoarseNode& root) {
  std::vector<std::pair<NodePath, const CoarseNode*>> leaves;
  visit_nodes(root, [&](const CoarseNode& n, int, const NodePath& path) {
    if (n.is_leaf()) leaves.emplace_back(path, &n);
  });
  return leaves;
}

const CoarseNode* find_node(const CoarseNode& root, const NodePath& path) {
  const CoarseNode* node = &root;
  for (const int index : path) {
    if (index < 0 || static_cast<std::size_t>(index) >= node->children.size()) {
      return nullptr;
    }
    node = &node->children[static_cast<std::size_t>(index)];
  }
  return node;
}

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedJson: return "MalformedJson";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kImageDecodeError: return "ImageDecodeError";
    case ErrorCode::kRendererUnavailable: return "RendererUnavailable";
    case ErrorCode::kRenderTimeout: return "RenderTimeout";
    case ErrorCode::kNavigationError: return "NavigationError";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyRegion: return "EmptyRegion";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kPredictionUnparseable: return "PredictionUnparseable";
    case ErrorCode::kUnrepairable: return "Unrepairable";
    case ErrorCode::kEndpointError: return "EndpointError";
    case ErrorCode::kEmptyCompletion: return "EmptyCompletion";
    case ErrorCode::kNoCodeFound: return "NoCodeFound";
    case ErrorCode::kDocumentTooLarge: return "DocumentTooLarge";
    case ErrorCode::kMissingFragment: return "MissingFragment";
    case ErrorCode::kDuplicateLeafPath: return "DuplicateLeafPath";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kMarkerCorruption: return "MarkerCorruption";
    case ErrorCode::kTooSmall: return "TooSmall";
    case ErrorCode::kEmbedderUnavailable: return "EmbedderUnavailable";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace hiergen
