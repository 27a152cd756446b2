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
#include <string_view>
#include <vector>

#include "hiergen/embed.hpp"
#include "hiergen/image.hpp"
#include "hiergen/render.hpp"

namespace hiergen {

inline constexpr double kSsimC1 = (0.01 * 255) * (0.01 * 255);
inline constexpr double kSsimC2 = (0.03 * 255) * (0.03 * 255);
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Mean SSIM over all positions where the Gaussian window fits inside the
/// image. Unequal sizes are padded to the larger canvas with white.
double ssim(const GrayImage& a, const GrayImage& b);
double ssim(const Image& a, const Image& b);

/// 1 - levenshtein / max length, over code points.
double edit_similarity(std::string_view a, std::string_view b);

/// CIE76 distance in CIELAB (D65).
double delta_e76(const Rgb& a, const Rgb& b);

std::vector<Block> extract_blocks(std::string_view html, Renderer& renderer);

struct BlockMatch {
  std::size_t ref;
  std::size_t cand;
  double similarity;
};

/// Greedy one-to-one matching by text similarity, highest first; ties go
/// to the lexicographically smaller block.
std::vector<BlockMatch> match_blocks(const std::vector<Block>& ref, const std::vector<Block>& cand,
                                     double threshold = 0.5);

struct VisualScore {
  double block_match = 0;
  double color = 0;
  double text = 0;
  double position = 0;
  double text_color = 0;
  std::optional<double> clip;  // absent without an embedder
  double composite = 0;
  std::size_t ref_blocks = 0;
  std::size_t cand_blocks = 0;
  std::size_t matches = 0;
};

/// Mean of color, text, position and text color, plus clip when present.
void update_composite(VisualScore& score);

struct RenderedPage {
  Image screenshot;
  std::vector<Block> blocks;
};

VisualScore visual_score(const RenderedPage& ref, const RenderedPage& cand, Embedder* embedder);
VisualScore visual_score(std::string_view reference_html, std::string_view candidate_html,
                         Renderer& renderer, Embedder* embedder, int viewport_width = 1280);

struct MetricReport {
  double ssim = 0;
  std::optional<double> clip_sim;
  VisualScore visual;
};

MetricReport evaluate_pair(std::string_view reference_html, std::string_view candidate_html,
                           Renderer& renderer, Embedder* embedder, int viewport_width = 1280);

RenderedPage render_for_metrics(std::string_view html, Renderer& renderer, int viewport_width);

}  // namespace hiergen
