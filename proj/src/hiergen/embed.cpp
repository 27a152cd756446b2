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


#include "hiergen/embed.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "hiergen/error.hpp"
#include "hiergen/http.hpp"
#include "hiergen/util.hpp"

namespace hiergen {

using nlohmann::json;

HttpEmbedder::HttpEmbedder(HttpEndpointConfig config) : config_(std::move(config)) {
  while (!config_.url.empty() && config_.url.back() == '/') config_.url.pop_back();
  if (config_.url.size() >= 6 && config_.url.ends_with("/embed")) config_.url.resize(config_.url.size() - 6);
  http::parse_url(config_.url);
}

std::string HttpEmbedder::endpoint(const std::string& route) const { return config_.url + route; }

std::vector<double> HttpEmbedder::embed(const Image& image) {
  http::Request req;
  req.url = endpoint("/embed");
  req.body = json{{"image", base64_encode(encode_png(image))}}.dump();
  req.timeout = config_.timeout;
  if (!config_.api_key.empty()) req.headers["Authorization"] = "Bearer " + config_.api_key;
  const auto res = http::post_json(req);
  if (res.outcome != http::Outcome::kOk) fail(ErrorCode::kEmbedderUnavailable, "embedder unreachable: " + res.error);
  if (res.status != 200) {
    fail(ErrorCode::kEmbedderUnavailable, "embedder returned HTTP " + std::to_string(res.status));
  }
  std::vector<double> out;
  try {
    const auto body = json::parse(res.body);
    out = body.at("embedding").get<std::vector<double>>();
    if (body.contains("dim") && body["dim"].get<std::size_t>() != out.size()) {
      fail(ErrorCode::kDimensionMismatch, "embedding length differs from declared dim");
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kEmbedderUnavailable, std::string("malformed embedding response: ") + e.what());
  }
  if (out.empty()) fail(ErrorCode::kEmbedderUnavailable, "empty embedding");
  return out;
}

std::string HttpEmbedder::identifier() const { return "http:" + config_.url; }

std::string HttpEmbedder::health() const {
  const auto res = http::get(endpoint("/health"), config_.timeout);
  if (res.outcome != http::Outcome::kOk || res.status != 200) {
    fail(ErrorCode::kEmbedderUnavailable, "embedder health check failed");
  }
  try {
    return json::parse(res.body).at("model").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kEmbedderUnavailable, std::string("malformed health response: ") + e.what());
  }
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::kDimensionMismatch, "embedding lengths differ: " + std::to_string(a.size()) + " vs " +
                                            std::to_string(b.size()));
  }
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) fail(ErrorCode::kInvalidArgument, "zero embedding vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double clip_similarity(const Image& a, const Image& b, Embedder& embedder) {
  return cosine_similarity(embedder.embed(a), embedder.embed(b));
}

}  // namespace hiergen
