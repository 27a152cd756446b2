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


#include "hiergen/crop.hpp"

#include <filesystem>

#include "hiergen/error.hpp"

namespace hiergen {

std::vector<LeafCrop> crop_leaves(const Image& screenshot, const CoarseDomTree& tree) {
  if (screenshot.width() != tree.page_width || screenshot.height() != tree.page_height) {
    fail(ErrorCode::kDimensionMismatch, "screenshot and tree page dimensions differ");
  }
  std::vector<LeafCrop> out;
  for (const auto& [path, node] : collect_leaves(tree.root)) {
    LeafCrop c;
    c.path = path;
    c.tag = node->tag;
    c.bbox = node->bbox.clamped(screenshot.width(), screenshot.height());
    if (c.bbox.empty()) {
      c.error = std::string(error_code_name(ErrorCode::kEmptyRegion)) + ": leaf " +
                leaf_file_stem(path) + " has no area inside the screenshot";
    } else {
      c.region = screenshot.crop(c.bbox);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string leaf_file_stem(const NodePath& path) {
  return path.empty() ? "root" : path_to_string(path);
}

void write_crops(const std::string& dir, const std::vector<LeafCrop>& crops) {
  std::filesystem::create_directories(dir);
  for (const auto& c : crops) {
    if (c.region) {
      write_png_file((std::filesystem::path(dir) / (leaf_file_stem(c.path) + ".png")).string(), *c.region);
    }
  }
}

}  // namespace hiergen
