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

namespace hiergen {

/// EmbedderEndpoint: image -> embedding vector.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(const Image& image) = 0;
  virtual std::string identifier() const = 0;
};

/// POST {image: base64 PNG} -> {embedding, dim, normalized}. `config.url`
/// is the service base; requests go to `/embed` and `/health`.
class HttpEmbedder final : public Embedder {
 public:
  explicit HttpEmbedder(HttpEndpointConfig config);
  std::vector<double> embed(const Image& image) override;
  std::string identifier() const override;

  /// Model identifier reported by GET /health.
  std::string health() const;

 private:
  std::string endpoint(const std::string& route) const;

  HttpEndpointConfig config_;
};

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

double clip_similarity(const Image& a, const Image& b, Embedder& embedder);

}  // namespace hiergen
