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

#include <string>
#include <vector>

#include "hiergen/image.hpp"
#include "hiergen/render.hpp"
#include "hiergen/tree.hpp"

namespace hiergen {

enum class RecordSource { kProvided, kRendered };

struct DatasetRecord {
  std::string id;
  Image screenshot;
  std::string html;
  CoarseDomTree bboxes;  // unpruned element tree
  RecordSource source = RecordSource::kProvided;
};

/// Reads `page.html`, `screenshot.png` and optional `bboxes.json`. When the
/// tree is absent and `renderer` is given, the page is rendered to fill it
/// (and the screenshot is replaced by the render).
DatasetRecord load_record(const std::string& dir, Renderer* renderer = nullptr,
                          int viewport_width = 1280);

/// Throws InvariantViolation on a screenshot/tree size mismatch or empty html.
void check_record(const DatasetRecord& record);

RenderResult render_page(std::string_view html, int viewport_width, Renderer& renderer);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

struct CorpusStats {
  std::size_t records = 0;
  MeanStd len_tokens;
  MeanStd tags;
  MeanStd depth;
  MeanStd unique_tags;
};

CorpusStats corpus_stats(const std::vector<DatasetRecord>& records);

MeanStd mean_std(const std::vector<double>& values);

/// Record directories directly under `root`, sorted by name.
std::vector<std::string> list_record_dirs(const std::string& root);

}  // namespace hiergen
