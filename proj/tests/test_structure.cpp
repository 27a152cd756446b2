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

#include <functional>
#include <random>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "hiergen/error.hpp"
#include "hiergen/http.hpp"
#include "hiergen/prune.hpp"
#include "hiergen/structure.hpp"
#include "hiergen/util.hpp"
#include "support/support.hpp"

using namespace hiergen;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::kIoError;
}

// True when every node of `sub` (with its tag) sits at an existing path of
// `full` once origins are applied.
void check_no_invention(const OracleTree& o, const CoarseDomTree& full) {
  std::size_t i = 0;
  visit_nodes(o.tree.root, [&](const CoarseNode& n, int, const NodePath&) {
    const CoarseNode* src = find_node(full.root, o.origins.at(i++));
    REQUIRE(src != nullptr);
    CHECK(src->tag == n.tag);
    CHECK(src->bbox == n.bbox);
  });
}

}  // namespace

TEST_CASE("oracle returns the pruned ground truth") {
  BuiltinRenderer r;
  const auto rec = testing::load_fixture("landing", r);
  PipelineConfig cfg;
  OracleBackend oracle(rec, cfg);
  const auto predicted = predict_structure(rec.screenshot, oracle);
  const auto training = prune_training(rec);
  CHECK(predicted == prune_inference(training.tree, cfg));
  CHECK(prune_inference(predicted, cfg) == predicted);
  check_no_invention(oracle_tree(rec, cfg.min_area, cfg.max_depth), rec.bboxes);
  CHECK_THROWS_AS(oracle.predict(Image(10, 10)), Error);
}

TEST_CASE("oracle never invents nodes on any fixture or cell") {
  BuiltinRenderer r;
  for (const auto& rec : testing::load_fixtures(r)) {
    for (const auto& ma : {MinArea::of(0.1), MinArea::unlimited()}) {
      for (const auto& md : {MaxDepth::of(4), MaxDepth::unlimited()}) check_no_invention(oracle_tree(rec, ma, md), rec.bboxes);
    }
  }
}

TEST_CASE("replay backend") {
  const auto dir = testing::scratch_dir("replay-structure");
  ReplayBackend replay(dir);
  std::mt19937 rng(4);
  const Image shot = testing::random_image(rng, 64, 48);
  const auto tree = testing::random_tree(rng, 4, 20, 64, 48);
  CHECK(code_of([&] { replay.predict(shot); }) == ErrorCode::kBackendUnavailable);
  replay.store(shot, tree);
  const auto a = predict_structure(shot, replay);
  const auto b = predict_structure(shot, replay);
  CHECK(serialize_tree(a) == serialize_tree(b));
  CHECK(a == tree);
  CHECK(code_of([&] { predict_structure(Image(32, 48), replay); }) == ErrorCode::kBackendUnavailable);
}

TEST_CASE("predict_structure rejects a tree for another page size") {
  const auto dir = testing::scratch_dir("replay-dims");
  ReplayBackend replay(dir);
  std::mt19937 rng(6);
  const Image shot = testing::random_image(rng, 20, 20);
  replay.store(shot, testing::random_tree(rng, 3, 5, 30, 20));
  CHECK(code_of([&] { predict_structure(shot, replay); }) == ErrorCode::kDimensionMismatch);
}

TEST_CASE("repair_json") {
  const std::string valid = R"({"w":100,"h":50,"root":{"t":"body","b":[0,0,100,50],"c":[]}})";
  CHECK(repair_json(valid) == valid);
  CHECK(repair_json("```json\n" + valid + "\n```") == valid);
  CHECK(repair_json("Here you go: " + valid + " hope it helps") == valid);
  const std::string cut = R"({"w":100,"h":50,"root":{"t":"body","b":[0,0,100,50],"c":[)";
  CHECK(repair_json(cut) == R"({"w":100,"h":50,"root":{"t":"body","b":[0,0,100,50],"c":[]}})");
  CHECK(code_of([] { repair_json("no json here"); }) == ErrorCode::kUnrepairable);
  CHECK(code_of([] { repair_json(""); }) == ErrorCode::kUnrepairable);
}

TEST_CASE("repair of truncated serializations yields a prefix tree") {
  std::mt19937 rng(12);
  int parsed = 0;
  for (int i = 0; i < 60; ++i) {
    const auto t = testing::random_tree(rng, 5, 30);
    const auto text = serialize_tree(t);
    const std::size_t cut = text.size() / 2 + static_cast<std::size_t>(i) * 7 % (text.size() / 2);
    std::string fixed;
    try {
      fixed = repair_json(text.substr(0, cut));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kUnrepairable);
      continue;
    }
    CHECK(repair_json(fixed) == fixed);
    CHECK(nlohmann::json::accept(fixed));
    try {
      const auto p = parse_tree(fixed);
      ++parsed;
      // Every recovered node exists in the original at the same path.
      visit_nodes(p.root, [&](const CoarseNode& n, int, const NodePath& path) {
        const CoarseNode* src = find_node(t.root, path);
        REQUIRE(src != nullptr);
        CHECK(src->tag == n.tag);
      });
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kSchemaViolation);
    }
  }
  CHECK(parsed > 0);
}

TEST_CASE("remote backend repairs truncated predictions") {
  std::mt19937 rng(8);
  const Image shot = testing::random_image(rng, 100, 50);
  CoarseDomTree t{CoarseNode{"body", {0, 0, 100, 50}, {CoarseNode{"div", {0, 0, 100, 20}, {}}}}, 100, 50};
  std::string text = serialize_tree(t);
  text.resize(text.size() - 2);  // drop the two closing braces
  http::Server server;
  std::string seen_image;
  server.post("/predict", [&](const std::string& body) {
    seen_image = nlohmann::json::parse(body).at("image").get<std::string>();
    return http::Reply{200, nlohmann::json{{"tree_json", text}}.dump(), "application/json"};
  });
  server.post("/garbage", [](const std::string&) { return http::Reply{200, R"({"tree_json":"nope"})", "application/json"}; });
  server.post("/down", [](const std::string&) { return http::Reply{503, "{}", "application/json"}; });
  server.start();
  const auto cfg = [&](const std::string& route) {
    return HttpEndpointConfig{server.base_url() + route, std::chrono::milliseconds(5000), ""};
  };
  RemoteBackend remote(cfg("/predict"));
  CHECK(predict_structure(shot, remote) == t);
  CHECK(decode_png(base64_decode(seen_image)) == shot);
  RemoteBackend garbage(cfg("/garbage"));
  CHECK(code_of([&] { garbage.predict(shot); }) == ErrorCode::kPredictionUnparseable);
  RemoteBackend down(cfg("/down"));
  CHECK(code_of([&] { down.predict(shot); }) == ErrorCode::kBackendUnavailable);
  server.stop();
}
