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

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace hiergen {

/// Rectangle in page pixels. Position may be negative (predicted boxes can
/// overhang the page); size never is.
struct BBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  std::int64_t area() const { return static_cast<std::int64_t>(w) * h; }
  bool empty() const { return w == 0 || h == 0; }

  /// Intersection with [0, width] x [0, height]; zero-sized when disjoint.
  BBox clamped(int width, int height) const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Root-to-node child index sequence. The root's path is empty.
using NodePath = std::vector<int>;

/// Dot-joined form used in markers and file names ("" for the root).
std::string path_to_string(const NodePath& path);
NodePath path_from_string(std::string_view text);

struct CoarseNode {
  std::string tag;
  BBox bbox;
  std::vector<CoarseNode> children;

  bool is_leaf() const { return children.empty(); }

  friend bool operator==(const CoarseNode&, const CoarseNode&) = default;
};

struct CoarseDomTree {
  CoarseNode root;
  int page_width = 0;
  int page_height = 0;

  std::int64_t page_area() const {
    return static_cast<std::int64_t>(page_width) * page_height;
  }

  friend bool operator==(const CoarseDomTree&, const CoarseDomTree&) = default;
};

struct TreeStats {
  int node_count = 0;
  int max_depth = 0;
  int unique_tags = 0;
  int leaf_count = 0;

  friend bool operator==(const TreeStats&, const TreeStats&) = default;
};

bool is_valid_tag(std::string_view tag);

/// Throws InvariantViolation / SchemaViolation when the tree is not valid.
void validate_tree(const CoarseDomTree& tree);

/// Canonical wire form: {"w":W,"h":H,"root":{"t":..,"b":[x,y,w,h],"c":[..]}}
std::string serialize_tree(const CoarseDomTree& tree);
std::string serialize_node(const CoarseNode& node);

CoarseDomTree parse_tree(std::string_view text);

TreeStats tree_stats(const CoarseDomTree& tree);

/// Pre-order visit with depth (root = 1) and path.
void visit_nodes(const CoarseNode& root,
                 const std::function<void(const CoarseNode&, int depth,
                                          const NodePath&)>& fn);

/// Leaves in document order, paired with their paths.
std::vector<std::pair<NodePath, const CoarseNode*>> collect_leaves(
    const CoarseNode& root);

const CoarseNode* find_node(const CoarseNode& root, const NodePath& path);

}  // namespace hiergen
