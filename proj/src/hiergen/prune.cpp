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


#include "hiergen/prune.hpp"

#include <cstdlib>
#include <functional>

#include "hiergen/error.hpp"

namespace hiergen {

namespace {

enum class Verdict { kKeep, kSmall, kSolid, kDepth };

int subtree_size(const CoarseNode& node) {
  int n = 1;
  for (const auto& c : node.children) n += subtree_size(c);
  return n;
}

using Rule = std::function<Verdict(const CoarseNode&, int depth, bool is_root)>;

// Applies `rule` top-down; a removed node takes its subtree with it and every
// removed node is attributed to the verdict of the topmost removed ancestor.
void filter(const CoarseNode& in, int depth, NodePath& path, const Rule& rule, CoarseNode& out,
            std::vector<NodePath>& origins, const std::vector<NodePath>& in_origins,
            std::size_t& in_index, PruneReport& report) {
  out.tag = in.tag;
  out.bbox = in.bbox;
  origins.push_back(in_origins.empty() ? path : in_origins[in_index]);
  ++in_index;
  ++report.kept;
  for (std::size_t i = 0; i < in.children.size(); ++i) {
    const CoarseNode& child = in.children[i];
    const Verdict v = rule(child, depth + 1, false);
    if (v != Verdict::kKeep) {
      const int n = subtree_size(child);
      in_index += static_cast<std::size_t>(n);
      switch (v) {
        case Verdict::kSmall: report.removed_small += n; break;
        case Verdict::kSolid: report.removed_solid += n; break;
        case Verdict::kDepth: report.truncated_depth += n; break;
        case Verdict::kKeep: break;
      }
      continue;
    }
    path.push_back(static_cast<int>(i));
    out.children.emplace_back();
    filter(child, depth + 1, path, rule, out.children.back(), origins, in_origins, in_index, report);
    path.pop_back();
  }
}

struct Pass {
  CoarseDomTree tree;
  PruneReport report;
  std::vector<NodePath> origins;
};

Pass apply_rule(const CoarseDomTree& tree, const std::vector<NodePath>& in_origins, const Rule& rule) {
  Pass pass;
  pass.tree.page_width = tree.page_width;
  pass.tree.page_height = tree.page_height;
  NodePath path;
  std::size_t index = 0;
  filter(tree.root, 1, path, rule, pass.tree.root, pass.origins, in_origins, index, pass.report);
  return pass;
}

}  // namespace

PruneReport& PruneReport::operator+=(const PruneReport& other) {
  removed_small += other.removed_small;
  removed_solid += other.removed_solid;
  truncated_depth += other.truncated_depth;
  kept += other.kept;
  discarded_sample = discarded_sample || other.discarded_sample;
  return *this;
}

bool is_solid(const Image& region) {
  if (region.empty()) fail(ErrorCode::kEmptyRegion, "is_solid on an empty region");
  const auto px = region.bytes();
  const int r0 = px[0], g0 = px[1], b0 = px[2];
  for (std::size_t i = 0; i < px.size(); i += 3) {
    if (std::abs(px[i] - r0) > kSolidTolerance || std::abs(px[i + 1] - g0) > kSolidTolerance ||
        std::abs(px[i + 2] - b0) > kSolidTolerance) {
      return false;
    }
  }
  return true;
}

double area_fraction(const BBox& bbox, const CoarseDomTree& tree) {
  return static_cast<double>(bbox.area()) / static_cast<double>(tree.page_area());
}

TrainingPrune prune_training(const CoarseDomTree& tree, const Image& screenshot) {
  if (screenshot.width() != tree.page_width || screenshot.height() != tree.page_height) {
    fail(ErrorCode::kDimensionMismatch, "screenshot and tree page dimensions differ");
  }
  const std::int64_t page_area = tree.page_area();
  Pass small = apply_rule(tree, {}, [&](const CoarseNode& n, int, bool) {
    return n.bbox.area() * 100 < kMinTrainingAreaPercent * page_area ? Verdict::kSmall
                                                                      : Verdict::kKeep;
  });
  Pass solid = apply_rule(small.tree, small.origins, [&](const CoarseNode& n, int, bool) {
    const BBox clamped = n.bbox.clamped(screenshot.width(), screenshot.height());
    if (clamped.empty()) return Verdict::kSolid;
    return is_solid(screenshot.crop(clamped)) ? Verdict::kSolid : Verdict::kKeep;
  });
  TrainingPrune out;
  out.tree = std::move(solid.tree);
  out.origins = std::move(solid.origins);
  out.report.removed_small = small.report.removed_small;
  out.report.removed_solid = solid.report.removed_solid;
  out.report.kept = solid.report.kept;
  out.discarded = out.report.kept < kMinTrainingNodes;
  out.report.discarded_sample = out.discarded;
  return out;
}

TrainingPrune prune_training(const DatasetRecord& record) {
  return prune_training(record.bboxes, record.screenshot);
}

InferencePrune prune_inference_traced(const CoarseDomTree& tree, const MinArea& min_area,
                                      const MaxDepth& max_depth) {
  Pass depth = apply_rule(tree, {}, [&](const CoarseNode&, int d, bool) {
    return max_depth.depth && d > *max_depth.depth ? Verdict::kDepth : Verdict::kKeep;
  });
  Pass area = apply_rule(depth.tree, depth.origins, [&](const CoarseNode& n, int, bool) {
    return min_area.fraction && area_fraction(n.bbox, tree) < *min_area.fraction ? Verdict::kSmall
                                                                                : Verdict::kKeep;
  });
  InferencePrune out;
  out.tree = std::move(area.tree);
  out.origins = std::move(area.origins);
  out.report.truncated_depth = depth.report.truncated_depth;
  out.report.removed_small = area.report.removed_small;
  out.report.kept = area.report.kept;
  return out;
}

CoarseDomTree prune_inference(const CoarseDomTree& tree, const PipelineConfig& config) {
  return prune_inference_traced(tree, config.min_area, config.max_depth).tree;
}

}  // namespace hiergen
