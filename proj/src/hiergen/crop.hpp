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

#include <optional>
#include <string>
#include <vector>

#include "hiergen/image.hpp"
#include "hiergen/tree.hpp"

namespace hiergen {

struct LeafCrop {
  NodePath path;
  std::string tag;
  BBox bbox;                    // clamped to the screenshot
  std::optional<Image> region;  // absent when the clamped box is empty
  std::string error;            // set when region is absent
};

/// One entry per leaf in document order.
std::vector<LeafCrop> crop_leaves(const Image& screenshot, const CoarseDomTree& tree);

/// File stem for a leaf path ("root" for the root leaf).
std::string leaf_file_stem(const NodePath& path);

/// Writes `{dir}/{leaf_file_stem}.png` for each successful crop.
void write_crops(const std::string& dir, const std::vector<LeafCrop>& crops);

}  // namespace hiergen
