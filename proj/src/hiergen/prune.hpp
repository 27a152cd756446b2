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

#include <vector>

#include "hiergen/config.hpp"
#include "hiergen/dataset.hpp"
#include "hiergen/image.hpp"
#include "hiergen/tree.hpp"

namespace hiergen {

/// Node attribution for one pruning pass. Area-rule removals from either
/// regime count as removed_small.
struct PruneReport {
  int removed_small = 0;
  int removed_solid = 0;
  int truncated_depth = 0;
  int kept = 0;
  bool discarded_sample = false;

  int total() const { return removed_small + removed_solid + truncated_depth + kept; }
  PruneReport& operator+=(const PruneReport& other);

  friend bool operator==(const PruneReport&, const PruneReport&) = default;
};

inline constexpr int kMinTrainingAreaPercent = 3;
inline constexpr int kMinTrainingNodes = 10;
inline constexpr int kSolidTolerance = 2;

/// Every pixel within kSolidTolerance per channel of the first pixel.
bool is_solid(const Image& region);

struct TrainingPrune {
  CoarseDomTree tree;  // the surviving tree, also when discarded
  bool discarded = false;
  PruneReport report;
  /// Origin path (in the input tree) of each surviving node, pre-order.
  std::vector<NodePath> origins;
};

TrainingPrune prune_training(const CoarseDomTree& tree, const Image& screenshot);
TrainingPrune prune_training(const DatasetRecord& record);

struct InferencePrune {
  CoarseDomTree tree;
  PruneReport report;
  std::vector<NodePath> origins;
};

InferencePrune prune_inference_traced(const CoarseDomTree& tree, const MinArea& min_area,
                                      const MaxDepth& max_depth);
CoarseDomTree prune_inference(const CoarseDomTree& tree, const PipelineConfig& config);

/// Area fraction used by the min_area rule.
double area_fraction(const BBox& bbox, const CoarseDomTree& tree);

}  // namespace hiergen
