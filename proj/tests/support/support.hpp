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

#include <atomic>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hiergen/agent.hpp"
#include "hiergen/assemble.hpp"
#include "hiergen/config.hpp"
#include "hiergen/dataset.hpp"
#include "hiergen/http.hpp"
#include "hiergen/image.hpp"
#include "hiergen/render.hpp"
#include "hiergen/structure.hpp"
#include "hiergen/tree.hpp"

namespace hiergen::testing {

std::string fixture_dir();
/// Names of the page fixtures, sorted.
std::vector<std::string> fixture_names();
std::string fixture_path(const std::string& name);
DatasetRecord load_fixture(const std::string& name, Renderer& renderer);
std::vector<DatasetRecord> load_fixtures(Renderer& renderer, std::size_t limit = 0);

/// Fresh empty directory under the system temp dir.
std::string scratch_dir(const std::string& name);

/// Leaf completions are the source inner HTML of each leaf element (fenced);
/// text-only content is wrapped in a span. The refinement completion is the
/// assembled document with the source attributes and style sheets restored.
/// Returns the expected pre-refinement document.
std::string record_ground_truth(const DatasetRecord& record, const PipelineConfig& config,
                                const AgentOptions& options, const ReplayChatEndpoint& store,
                                bool with_refinement = true);

/// Assembled document with every marked element given the attributes of the
/// element it came from, plus the source <style> text.
std::string restore_styles(const DatasetRecord& record, const OracleTree& oracle,
                           std::string_view assembled, int viewport_width);

/// Synthetic training-pruning case on a 1000x1000 page. The screenshot is
/// white except where nodes are painted with a checker texture or a flat
/// color; expectations were computed by hand.
struct PruneFixture {
  std::string name;
  DatasetRecord record;
  int kept = 0;
  int removed_small = 0;
  int removed_solid = 0;
  bool discarded = false;
  /// Topmost removed nodes, as paths into the input tree.
  std::vector<NodePath> removed_roots;
};

std::vector<PruneFixture> pruning_corpus();

/// Page-sized random tree: children tile their parent's box.
CoarseDomTree random_tree(std::mt19937& rng, int max_depth, int max_nodes, int width = 1280,
                          int height = 900);
std::vector<LeafFragment> random_fragments(std::mt19937& rng, const CoarseDomTree& tree);

Image random_image(std::mt19937& rng, int width, int height);
Image solid_image(int width, int height, Rgb color);
GrayImage random_gray(std::mt19937& rng, int width, int height);

/// Image pairs with SSIM values computed by an independent implementation
/// (Gaussian window, sigma 1.5, population covariance, data range 255).
struct SsimCase {
  std::string name;
  GrayImage a;
  GrayImage b;
  double expected = 0;
};

std::vector<SsimCase> ssim_reference_cases();

/// OpenAI-shaped chat completion body.
std::string chat_body(const std::string& content, int prompt_tokens = 11, int completion_tokens = 7);

/// Chat server on an ephemeral port; `handler` sees the request body.
class MockChatServer {
 public:
  explicit MockChatServer(std::function<http::Reply(const std::string&)> handler);
  ~MockChatServer();
  std::string url() const;
  int hits() const { return *hits_; }

 private:
  http::Server server_;
  std::shared_ptr<std::atomic<int>> hits_;
};

}  // namespace hiergen::testing
