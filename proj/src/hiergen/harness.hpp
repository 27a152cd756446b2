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

#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hiergen/agent.hpp"
#include "hiergen/assemble.hpp"
#include "hiergen/config.hpp"
#include "hiergen/dataset.hpp"
#include "hiergen/embed.hpp"
#include "hiergen/metrics.hpp"
#include "hiergen/prune.hpp"
#include "hiergen/structure.hpp"

namespace hiergen {

/// Counting limiter shared by everything that calls the agent.
class ConcurrencyLimit {
 public:
  explicit ConcurrencyLimit(int slots);
  void acquire();
  void release();
  int slots() const { return slots_; }

 private:
  int slots_;
  int used_ = 0;
  std::mutex mu_;
  std::condition_variable cv_;
};

struct PipelineBackends {
  StructureBackend* structure = nullptr;
  ChatEndpoint* agent = nullptr;
  const FragmentCache* cache = nullptr;
  ConcurrencyLimit* agent_limit = nullptr;  // defaults to config.agent_concurrency per run
  AgentOptions agent_options;
  bool refine = true;
};

enum class RunStatus { kSuccess = 0, kPartial = 1, kFailure = 2 };

std::string_view run_status_name(RunStatus status);

struct LeafOutcome {
  NodePath path;
  std::string tag;
  BBox bbox;
  bool ok = false;
  bool skipped = false;  // contentless tag, no agent call
  bool cache_hit = false;
  int attempts = 0;
  int prompt_tokens = 0;
  int completion_tokens = 0;
  std::string error;
};

struct StageTiming {
  std::string stage;
  double ms = 0;
};

struct PipelineResult {
  RunStatus status = RunStatus::kFailure;
  std::string record_id;
  std::string html;  // final document
  std::string pre_refine_html;
  CoarseDomTree tree;
  std::vector<LeafOutcome> leaves;
  bool refined = false;
  std::optional<PreservationReport> preservation;
  std::string failed_stage;
  std::string error;
  std::vector<StageTiming> timings;
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

/// Runs structure -> prune -> crop -> leaves -> assemble -> refine ->
/// validate. When `out_dir` is non-empty the audit bundle is written there
/// (also after a failure). Crops also go to `{cache_dir}/{record_id}/`.
PipelineResult run_pipeline(const Image& screenshot, const PipelineConfig& config,
                            const PipelineBackends& backends, const std::string& record_id,
                            const std::string& out_dir = "");

/// Creates the structure backend for one record and grid cell.
using StructureFactory =
    std::function<std::unique_ptr<StructureBackend>(const DatasetRecord&, const PipelineConfig&)>;

StructureFactory oracle_factory();

struct GridCell {
  MinArea min_area;
  MaxDepth max_depth;
  bool is_default = false;
  std::size_t records = 0;
  std::size_t failed = 0;
  std::optional<VisualScore> mean;  // absent when every record failed
};

std::vector<MinArea> default_min_area_set();
std::vector<MaxDepth> default_max_depth_set();

struct GridOptions {
  std::vector<MinArea> min_area_set = default_min_area_set();
  std::vector<MaxDepth> max_depth_set = default_max_depth_set();
  PipelineConfig base;  // thresholds are overridden per cell
  std::string out_dir;  // per-run bundles under {out_dir}/{cell}/{record}
  int workers = 1;      // records run concurrently within a cell
};

std::vector<GridCell> grid_search(const std::vector<DatasetRecord>& records, const GridOptions& options,
                                  const StructureFactory& structure, PipelineBackends backends,
                                  Renderer& renderer, Embedder* embedder);

std::string grid_csv(const std::vector<GridCell>& cells);
std::string grid_cell_name(const MinArea& min_area, const MaxDepth& max_depth);

struct PrepareSummary {
  std::size_t records = 0;
  std::size_t kept = 0;
  std::size_t discarded = 0;
  std::size_t errors = 0;
  PruneReport totals;
  std::string json;  // summary.json content
};

PrepareSummary prepare_dataset(const std::string& input_dir, const std::string& output_dir,
                               Renderer* renderer = nullptr, int viewport_width = 1280);

struct EvalRow {
  std::string reference;
  std::string candidate;
  bool ok = false;
  std::string error;
  MetricReport report;
};

struct EvalTable {
  std::vector<EvalRow> rows;
  std::size_t failed = 0;
  MeanStd ssim, block_match, color, text, position, text_color, composite;
  std::optional<MeanStd> clip_sim, clip;
};

struct EvalPair {
  std::string reference_html;
  std::string candidate_html;
  std::string reference_name;
  std::string candidate_name;
};

EvalTable evaluate(const std::vector<EvalPair>& pairs, Renderer& renderer, Embedder* embedder,
                   int viewport_width = 1280);
std::string eval_json(const EvalTable& table);
std::string eval_csv(const EvalTable& table);

std::string corpus_stats_json(const CorpusStats& stats);

}  // namespace hiergen
