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
#include <mutex>
#include <string>
#include <string_view>

#include "hiergen/config.hpp"
#include "hiergen/dataset.hpp"
#include "hiergen/render.hpp"
#include "hiergen/tree.hpp"

namespace hiergen {

/// Produces a coarse tree from a screenshot. Implementations are safe for
/// concurrent predict calls.
class StructureBackend {
 public:
  virtual ~StructureBackend() = default;
  virtual CoarseDomTree predict(const Image& screenshot) = 0;
  virtual std::string identifier() const = 0;
};

/// Calls the backend and checks the result against the screenshot.
CoarseDomTree predict_structure(const Image& screenshot, StructureBackend& backend);

struct OracleTree {
  CoarseDomTree tree;
  std::vector<NodePath> origins;  // path in the record's full tree, pre-order
};

/// Training pruning followed by inference pruning of the record's own tree.
OracleTree oracle_tree(const DatasetRecord& record, const MinArea& min_area,
                       const MaxDepth& max_depth);

class OracleBackend final : public StructureBackend {
 public:
  OracleBackend(DatasetRecord record, PipelineConfig config);
  CoarseDomTree predict(const Image& screenshot) override;
  std::string identifier() const override;

 private:
  DatasetRecord record_;
  PipelineConfig config_;
};

/// Content key of a screenshot: sha256 over "WxH\n" followed by raw RGB bytes.
std::string screenshot_key(const Image& screenshot);

/// Directory of `{screenshot_key}.json` files in canonical schema.
class ReplayBackend final : public StructureBackend {
 public:
  explicit ReplayBackend(std::string dir);
  CoarseDomTree predict(const Image& screenshot) override;
  std::string identifier() const override;

  void store(const Image& screenshot, const CoarseDomTree& tree) const;

 private:
  std::string dir_;
};

/// POST {image: base64 PNG} -> {tree_json: string}.
class RemoteBackend final : public StructureBackend {
 public:
  RemoteBackend(HttpEndpointConfig config, int max_in_flight = 4);
  CoarseDomTree predict(const Image& screenshot) override;
  std::string identifier() const override;

 private:
  HttpEndpointConfig config_;
  int max_in_flight_;
  int in_flight_ = 0;
  std::mutex mu_;
  std::condition_variable cv_;
};

/// Strips non-JSON text around the first JSON value (code fences, prose),
/// drops a trailing partial token and closes unclosed scopes. Throws
/// Unrepairable when the result does not parse.
std::string repair_json(std::string_view text);

}  // namespace hiergen
