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


#include "hiergen/dataset.hpp"

#include <algorithm>
#include <filesystem>

#include "hiergen/error.hpp"
#include "hiergen/util.hpp"

namespace hiergen {

namespace fs = std::filesystem;

void check_record(const DatasetRecord& record) {
  if (record.html.empty()) fail(ErrorCode::kInvariantViolation, record.id + ": html is empty");
  if (record.screenshot.width() != record.bboxes.page_width ||
      record.screenshot.height() != record.bboxes.page_height) {
    fail(ErrorCode::kInvariantViolation,
         record.id + ": screenshot is " + std::to_string(record.screenshot.width()) + "x" +
             std::to_string(record.screenshot.height()) + " but bboxes declare " +
             std::to_string(record.bboxes.page_width) + "x" +
             std::to_string(record.bboxes.page_height));
  }
}

DatasetRecord load_record(const std::string& dir, Renderer* renderer, int viewport_width) {
  const fs::path root(dir);
  const fs::path html_path = root / "page.html";
  const fs::path png_path = root / "screenshot.png";
  const fs::path tree_path = root / "bboxes.json";
  if (!fs::is_regular_file(html_path)) fail(ErrorCode::kMissingFile, "missing " + html_path.string());
  DatasetRecord rec;
  rec.id = root.filename().string();
  if (rec.id.empty()) rec.id = root.parent_path().filename().string();
  rec.html = read_text_file(html_path.string());
  const bool has_tree = fs::is_regular_file(tree_path);
  if (has_tree) {
    if (!fs::is_regular_file(png_path)) fail(ErrorCode::kMissingFile, "missing " + png_path.string());
    rec.screenshot = read_png_file(png_path.string());
    rec.bboxes = parse_tree(read_text_file(tree_path.string()));
    rec.source = RecordSource::kProvided;
    check_record(rec);
    return rec;
  }
  rec.source = RecordSource::kRendered;
  if (renderer) {
    auto result = render_page(rec.html, viewport_width, *renderer);
    rec.screenshot = std::move(result.screenshot);
    rec.bboxes = std::move(result.element_tree);
    check_record(rec);
  } else {
    if (!fs::is_regular_file(png_path)) fail(ErrorCode::kMissingFile, "missing " + png_path.string());
    rec.screenshot = read_png_file(png_path.string());
  }
  return rec;
}

RenderResult render_page(std::string_view html_text, int viewport_width, Renderer& renderer) {
  if (viewport_width <= 0) fail(ErrorCode::kInvalidArgument, "viewport width must be positive");
  RenderResult result = renderer.render(html_text, viewport_width);
  normalize_render_result(result, viewport_width);
  return result;
}

MeanStd mean_std(const std::vector<double>& values) {
  return MeanStd{mean_of(values), pstddev_of(values)};
}

CorpusStats corpus_stats(const std::vector<DatasetRecord>& records) {
  if (records.empty()) fail(ErrorCode::kEmptyCorpus, "corpus is empty");
  std::vector<double> len, tags, depth, unique;
  for (const auto& r : records) {
    const TreeStats s = tree_stats(r.bboxes);
    len.push_back(static_cast<double>(count_words(r.html)));
    tags.push_back(s.node_count);
    depth.push_back(s.max_depth);
    unique.push_back(s.unique_tags);
  }
  CorpusStats out;
  out.records = records.size();
  out.len_tokens = mean_std(len);
  out.tags = mean_std(tags);
  out.depth = mean_std(depth);
  out.unique_tags = mean_std(unique);
  return out;
}

std::vector<std::string> list_record_dirs(const std::string& root) {
  if (!fs::is_directory(root)) fail(ErrorCode::kMissingFile, "not a directory: " + root);
  std::vector<std::string> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) dirs.push_back(entry.path().string());
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

}  // namespace hiergen
