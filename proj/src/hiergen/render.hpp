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

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hiergen/html.hpp"
#include "hiergen/image.hpp"
#include "hiergen/tree.hpp"

namespace hiergen {

/// A visible text-bearing element, as used by the visual score.
struct Block {
  std::string text;  // whitespace-normalized own text
  BBox bbox;         // render pixels
  Rgb fg;            // computed text color
  Rgb bg;            // nearest opaque background (self or ancestor, else canvas)

  friend bool operator==(const Block&, const Block&) = default;
};

struct RenderResult {
  Image screenshot;
  CoarseDomTree element_tree;  // rooted at <body>, border-box rectangles
  int viewport_width = 0;
  /// Present when the renderer supports block extraction.
  std::optional<std::vector<Block>> blocks;
};

/// RendererEndpoint: turns an HTML document into a full-page screenshot and
/// its element geometry.
class Renderer {
 public:
  virtual ~Renderer() = default;
  virtual RenderResult render(std::string_view html, int viewport_width) = 0;
  virtual std::string identifier() const = 0;
};

/// Output of the in-process engine, including the DOM each element-tree
/// node came from (pre-order aligned with `result.element_tree`).
struct LaidOutPage {
  html::NodePtr document;
  RenderResult result;
  std::vector<const html::Node*> tree_elements;
};

/// Deterministic in-process layout and paint of a static-page CSS subset:
/// block flow, inline text with word wrap, inline-block, a single-line
/// flexbox, box model (margin/padding/border/width/height, box-sizing),
/// colors, font-size/weight, line-height, text-align, display and visibility.
/// Glyphs are drawn as fixed-advance bitmap cells (advance = 0.6 em).
LaidOutPage layout_page(std::string_view html, int viewport_width);

class BuiltinRenderer final : public Renderer {
 public:
  RenderResult render(std::string_view html, int viewport_width) override;
  std::string identifier() const override;
};

struct HttpEndpointConfig {
  std::string url;
  std::chrono::milliseconds timeout{30000};
  std::string api_key;
};

/// Client for a remote RendererEndpoint:
/// POST {html, viewport_width} -> {screenshot: base64 PNG, element_tree, blocks?}.
class HttpRenderer final : public Renderer {
 public:
  explicit HttpRenderer(HttpEndpointConfig config);
  RenderResult render(std::string_view html, int viewport_width) override;
  std::string identifier() const override;

 private:
  HttpEndpointConfig config_;
};

std::string render_request_json(std::string_view html, int viewport_width);
std::string render_response_json(const RenderResult& result);
RenderResult parse_render_response(std::string_view body, int viewport_width);

/// Element tree checks shared by all renderers: root tag, page width equals
/// the viewport, every bbox clamped into the page.
void normalize_render_result(RenderResult& result, int viewport_width);

}  // namespace hiergen
