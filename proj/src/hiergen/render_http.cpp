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

#include <nlohmann/json.hpp>

#include "hiergen/error.hpp"
#include "hiergen/http.hpp"
#include "hiergen/render.hpp"
#include "hiergen/util.hpp"

namespace hiergen {

using nlohmann::json;

namespace {

json rgb_json(const Rgb& c) { return json::array({c.r, c.g, c.b}); }

Rgb rgb_from(const json& j) {
  if (!j.is_array() || j.size() != 3) fail(ErrorCode::kSchemaViolation, "color must be [r,g,b]");
  Rgb c;
  const auto channel = [](const json& v) {
    if (!v.is_number()) fail(ErrorCode::kSchemaViolation, "color channel must be a number");
    const double d = v.get<double>();
    if (d < 0 || d > 255) fail(ErrorCode::kSchemaViolation, "color channel out of range");
    return static_cast<std::uint8_t>(std::lround(d));
  };
  c.r = channel(j[0]);
  c.g = channel(j[1]);
  c.b = channel(j[2]);
  return c;
}

void clamp_nodes(CoarseNode& node, int w, int h) {
  node.bbox = node.bbox.clamped(w, h);
  for (auto& c : node.children) clamp_nodes(c, w, h);
}

}  // namespace

void normalize_render_result(RenderResult& result, int viewport_width) {
  if (result.screenshot.empty()) fail(ErrorCode::kNavigationError, "renderer returned an empty screenshot");
  if (result.screenshot.width() != viewport_width) {
    fail(ErrorCode::kDimensionMismatch, "screenshot width " + std::to_string(result.screenshot.width()) +
                                            " differs from viewport " + std::to_string(viewport_width));
  }
  auto& tree = result.element_tree;
  tree.page_width = result.screenshot.width();
  tree.page_height = result.screenshot.height();
  if (tree.root.tag != "body") fail(ErrorCode::kSchemaViolation, "element tree root must be body");
  clamp_nodes(tree.root, tree.page_width, tree.page_height);
  result.viewport_width = viewport_width;
  if (result.blocks) {
    for (auto& b : *result.blocks) b.bbox = b.bbox.clamped(tree.page_width, tree.page_height);
  }
  validate_tree(tree);
}

std::string render_request_json(std::string_view html_text, int viewport_width) {
  json j;
  j["html"] = std::string(html_text);
  j["viewport_width"] = viewport_width;
  return j.dump();
}

std::string render_response_json(const RenderResult& result) {
  const auto png = encode_png(result.screenshot);
  json j;
  j["screenshot"] = base64_encode(png);
  j["element_tree"] = serialize_tree(result.element_tree);
  if (result.blocks) {
    json blocks = json::array();
    for (const auto& b : *result.blocks) {
      blocks.push_back({{"text", b.text},
                        {"bbox", {b.bbox.x, b.bbox.y, b.bbox.w, b.bbox.h}},
                        {"fg", rgb_json(b.fg)},
                        {"bg", rgb_json(b.bg)}});
    }
    j["blocks"] = std::move(blocks);
  }
  return j.dump();
}

RenderResult parse_render_response(std::string_view body, int viewport_width) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kMalformedJson, std::string("render response: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kSchemaViolation, "render response must be an object");
  if (j.contains("error")) {
    fail(ErrorCode::kNavigationError, "renderer error: " + j["error"].dump());
  }
  if (!j.contains("screenshot") || !j["screenshot"].is_string()) {
    fail(ErrorCode::kSchemaViolation, "render response lacks screenshot");
  }
  if (!j.contains("element_tree")) fail(ErrorCode::kSchemaViolation, "render response lacks element_tree");
  RenderResult out;
  const auto png = base64_decode(j["screenshot"].get<std::string>());
  out.screenshot = decode_png(png);
  const auto& tree = j["element_tree"];
  out.element_tree = parse_tree(tree.is_string() ? tree.get<std::string>() : tree.dump());
  if (j.contains("blocks") && j["blocks"].is_array()) {
    std::vector<Block> blocks;
    for (const auto& b : j["blocks"]) {
      if (!b.is_object() || !b.contains("text") || !b.contains("bbox") || !b["bbox"].is_array() ||
          b["bbox"].size() != 4) {
        fail(ErrorCode::kSchemaViolation, "malformed block entry");
      }
      Block blk;
      blk.text = b["text"].get<std::string>();
      blk.bbox = BBox{b["bbox"][0].get<int>(), b["bbox"][1].get<int>(), b["bbox"][2].get<int>(),
                      b["bbox"][3].get<int>()};
      if (blk.bbox.w < 0 || blk.bbox.h < 0) fail(ErrorCode::kSchemaViolation, "negative block size");
      blk.fg = b.contains("fg") ? rgb_from(b["fg"]) : Rgb{0, 0, 0};
      blk.bg = b.contains("bg") ? rgb_from(b["bg"]) : Rgb{255, 255, 255};
      blocks.push_back(std::move(blk));
    }
    out.blocks = std::move(blocks);
  }
  normalize_render_result(out, viewport_width);
  return out;
}

HttpRenderer::HttpRenderer(HttpEndpointConfig config) : config_(std::move(config)) {
  if (config_.url.empty()) fail(ErrorCode::kInvalidArgument, "renderer URL is empty");
  http::parse_url(config_.url);
}

RenderResult HttpRenderer::render(std::string_view html_text, int viewport_width) {
  http::Request req;
  req.url = config_.url;
  req.body = render_request_json(html_text, viewport_width);
  req.timeout = config_.timeout;
  if (!config_.api_key.empty()) req.headers["Authorization"] = "Bearer " + config_.api_key;
  const auto res = http::post_json(req);
  switch (res.outcome) {
    case http::Outcome::kOk: break;
    case http::Outcome::kTimeout:
      fail(ErrorCode::kRenderTimeout, "renderer timed out after " +
                                          std::to_string(config_.timeout.count()) + " ms");
    default: fail(ErrorCode::kRendererUnavailable, "renderer unreachable: " + res.error);
  }
  if (res.status == 422 || res.status == 400) {
    fail(ErrorCode::kNavigationError, "renderer rejected the document: HTTP " + std::to_string(res.status));
  }
  if (res.status != 200) {
    fail(ErrorCode::kRendererUnavailable, "renderer returned HTTP " + std::to_string(res.status));
  }
  return parse_render_response(res.body, viewport_width);
}

std::string HttpRenderer::identifier() const { return "http:" + config_.url; }

}  // namespace hiergen
