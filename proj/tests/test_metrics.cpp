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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "hiergen/embed.hpp"
#include "hiergen/error.hpp"
#include "hiergen/http.hpp"
#include "hiergen/metrics.hpp"
#include "support/support.hpp"

using namespace hiergen;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

// Direct 2D-window SSIM: weights g(i)g(j) applied at every valid position.
double ssim_oracle(const GrayImage& a, const GrayImage& b) {
  int win = std::min({11, a.width, a.height});
  if (win % 2 == 0) --win;
  const int r = win / 2;
  std::vector<double> g(static_cast<std::size_t>(win));
  double gs = 0;
  for (int i = 0; i < win; ++i) gs += g[static_cast<std::size_t>(i)] = std::exp(-0.5 * (i - r) * (i - r) / 2.25);
  for (auto& v : g) v /= gs;
  const double c1 = 6.5025, c2 = 58.5225;
  double total = 0;
  int count = 0;
  for (int y = 0; y + win <= a.height; ++y) {
    for (int x = 0; x + win <= a.width; ++x) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int j = 0; j < win; ++j) {
        for (int i = 0; i < win; ++i) {
          const double w = g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(j)];
          const double p = a.at(x + i, y + j), q = b.at(x + i, y + j);
          mx += w * p;
          my += w * q;
          sxx += w * p * p;
          syy += w * q * q;
          sxy += w * p * q;
        }
      }
      const double vx = sxx - mx * mx, vy = syy - my * my, vxy = sxy - mx * my;
      total += (2 * mx * my + c1) * (2 * vxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return total / count;
}

GrayImage flat(int w, int h, std::uint8_t v) {
  GrayImage g;
  g.width = w;
  g.height = h;
  g.pixels.assign(static_cast<std::size_t>(w) * h, v);
  return g;
}

class FixedEmbedder final : public Embedder {
 public:
  explicit FixedEmbedder(std::function<std::vector<double>(const Image&)> fn) : fn_(std::move(fn)) {}
  std::vector<double> embed(const Image& image) override { return fn_(image); }
  std::string identifier() const override { return "fixed"; }

 private:
  std::function<std::vector<double>(const Image&)> fn_;
};

RenderedPage page_with(std::vector<Block> blocks, int w = 400, int h = 300) {
  return RenderedPage{Image(w, h), std::move(blocks)};
}

Block block(std::string text, BBox b, Rgb fg = {0, 0, 0}, Rgb bg = {255, 255, 255}) {
  return Block{std::move(text), b, fg, bg};
}

double exhaustive_total(const std::vector<Block>& ref, const std::vector<Block>& cand, double threshold) {
  std::vector<std::size_t> perm(std::max(ref.size(), cand.size()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0;
  do {
    double s = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (perm[i] >= cand.size()) continue;
      const double v = edit_similarity(ref[i].text, cand[perm[i]].text);
      if (v >= threshold) s += v;
    }
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("ssim matches reference values") {
  for (const auto& c : testing::ssim_reference_cases()) {
    CAPTURE(c.name);
    CHECK(std::abs(ssim(c.a, c.b) - c.expected) <= 1e-6);
  }
}

TEST_CASE("ssim agrees with the direct window sum") {
  std::mt19937 rng(31);
  for (int i = 0; i < 12; ++i) {
    const int w = std::uniform_int_distribution<int>(8, 40)(rng);
    const int h = std::uniform_int_distribution<int>(8, 40)(rng);
    const auto a = testing::random_gray(rng, w, h);
    auto b = a;
    for (auto& p : b.pixels) p = static_cast<std::uint8_t>(std::clamp<int>(p + static_cast<int>(rng() % 61) - 30, 0, 255));
    CAPTURE(w);
    CAPTURE(h);
    CHECK(std::abs(ssim(a, b) - ssim_oracle(a, b)) <= 1e-9);
  }
}

TEST_CASE("ssim identities") {
  std::mt19937 rng(32);
  for (int i = 0; i < 10; ++i) {
    const auto a = testing::random_gray(rng, 30 + i, 25);
    CHECK(ssim(a, a) == 1.0);
    const auto b = testing::random_gray(rng, 30 + i, 25);
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
    const double v = ssim(a, b);
    CHECK(v <= 1.0);
    CHECK(v >= -1.0);
  }
  const double closed = kSsimC1 / (65025.0 + kSsimC1);
  CHECK(std::abs(ssim(flat(40, 30, 0), flat(40, 30, 255)) - closed) <= 1e-9);
}

TEST_CASE("ssim pads unequal sizes with white") {
  std::mt19937 rng(33);
  const auto a = testing::random_gray(rng, 20, 20);
  GrayImage padded = flat(26, 24, 255);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 20; ++x) padded.pixels[static_cast<std::size_t>(y) * 26 + x] = a.at(x, y);
  }
  const auto other = testing::random_gray(rng, 26, 24);
  CHECK(ssim(a, other) == ssim(padded, other));
  CHECK(ssim(a, padded) == 1.0);
}

TEST_CASE("ssim rejects tiny images") {
  CHECK(code_of([] { ssim(flat(7, 20, 0), flat(20, 20, 0)); }) == ErrorCode::kTooSmall);
  CHECK(code_of([] { ssim(flat(20, 20, 0), flat(20, 7, 0)); }) == ErrorCode::kTooSmall);
  CHECK_NOTHROW(ssim(flat(8, 8, 0), flat(8, 8, 10)));
}

TEST_CASE("edit similarity") {
  CHECK(edit_similarity("", "") == 1.0);
  CHECK(edit_similarity("abc", "abc") == 1.0);
  CHECK(edit_similarity("kitten", "sitting") == doctest::Approx(1.0 - 3.0 / 7.0));
  CHECK(edit_similarity("abc", "") == 0.0);
  CHECK(edit_similarity("caf\xc3\xa9", "cafe") == doctest::Approx(0.75));
}

TEST_CASE("delta e") {
  CHECK(delta_e76({10, 20, 30}, {10, 20, 30}) == 0.0);
  CHECK(delta_e76({0, 0, 0}, {255, 255, 255}) == doctest::Approx(100.0).epsilon(1e-4));
  // L*a*b* of sRGB red is (53.2408, 80.0925, 67.2032).
  CHECK(delta_e76({255, 0, 0}, {0, 0, 0}) == doctest::Approx(std::sqrt(53.2408 * 53.2408 + 80.0925 * 80.0925 +
                                                                         67.2032 * 67.2032)).epsilon(1e-4));
  CHECK(delta_e76({255, 0, 0}, {0, 0, 255}) == doctest::Approx(delta_e76({0, 0, 255}, {255, 0, 0})));
}

TEST_CASE("identical pages score one") {
  BuiltinRenderer renderer;
  for (const auto& rec : testing::load_fixtures(renderer, 4)) {
    CAPTURE(rec.id);
    const auto v = visual_score(rec.html, rec.html, renderer, nullptr);
    CHECK(v.block_match == 1.0);
    CHECK(v.color == 1.0);
    CHECK(v.text == 1.0);
    CHECK(v.position == 1.0);
    CHECK(v.text_color == 1.0);
    CHECK(v.composite == 1.0);
    CHECK_FALSE(v.clip);
    CHECK(v.ref_blocks > 0);
  }
}

TEST_CASE("position score follows the centre distance") {
  const double diag = std::hypot(400.0, 300.0);
  const int dx = static_cast<int>(std::lround(0.05 * diag));  // 25 px
  const auto ref = page_with({block("hello world", {100, 100, 80, 20})});
  const auto cand = page_with({block("hello world", {100 + dx, 100, 80, 20})});
  const auto v = visual_score(ref, cand, nullptr);
  CHECK(v.position == doctest::Approx(1.0 - dx / diag).epsilon(1e-12));
  CHECK(v.position == doctest::Approx(0.95).epsilon(1e-3));
  CHECK(v.text == 1.0);
  CHECK(v.block_match == 1.0);
}

TEST_CASE("block scores") {
  SUBCASE("disjoint texts") {
    const auto v = visual_score(page_with({block("alpha beta", {0, 0, 10, 10})}),
                                page_with({block("zzzz qqqq xx", {0, 0, 10, 10})}), nullptr);
    CHECK(v.block_match == 0.0);
    CHECK(v.matches == 0);
    CHECK(v.text == 0.0);
    CHECK(v.composite == 0.0);
  }
  SUBCASE("colors") {
    const auto v = visual_score(page_with({block("same", {0, 0, 10, 10}, {0, 0, 0}, {255, 255, 255})}),
                                page_with({block("same", {0, 0, 10, 10}, {255, 255, 255}, {255, 255, 255})}),
                                nullptr);
    CHECK(v.color == 1.0);
    CHECK(v.text_color == doctest::Approx(0.0).epsilon(1e-4));
    CHECK(v.composite == doctest::Approx(0.75).epsilon(1e-4));
  }
  SUBCASE("unmatched blocks lower block_match only") {
    const auto v = visual_score(page_with({block("one", {0, 0, 10, 10}), block("two words", {0, 20, 10, 10})}),
                                page_with({block("one", {0, 0, 10, 10})}), nullptr);
    CHECK(v.block_match == doctest::Approx(2.0 / 3.0));
    CHECK(v.composite == 1.0);
  }
}

TEST_CASE("scores ignore block order") {
  std::mt19937 rng(34);
  const std::vector<std::string> words = {"home", "about us", "pricing plans", "contact", "blog posts",
                                          "sign in", "features", "docs", "careers"};
  for (int t = 0; t < 20; ++t) {
    std::vector<Block> ref, cand;
    for (int i = 0; i < 6; ++i) {
      ref.push_back(block(words[rng() % words.size()], {static_cast<int>(rng() % 300), static_cast<int>(rng() % 200), 40, 20}));
      cand.push_back(block(words[rng() % words.size()], {static_cast<int>(rng() % 300), static_cast<int>(rng() % 200), 40, 20}));
    }
    const auto base = visual_score(page_with(ref), page_with(cand), nullptr);
    std::shuffle(ref.begin(), ref.end(), rng);
    std::shuffle(cand.begin(), cand.end(), rng);
    const auto shuffled = visual_score(page_with(ref), page_with(cand), nullptr);
    CHECK(shuffled.block_match == doctest::Approx(base.block_match));
    CHECK(shuffled.composite == doctest::Approx(base.composite));
  }
}

TEST_CASE("greedy matching against exhaustive assignment") {
  std::mt19937 rng(35);
  const std::vector<std::string> words = {"cart", "card", "care", "core", "cord", "word", "ward", "warm"};
  int equal = 0, total = 0;
  double worst = 1.0;
  for (int t = 0; t < 60; ++t) {
    std::vector<Block> ref, cand;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      ref.push_back(block(words[rng() % words.size()], {0, 0, 1, 1}));
      cand.push_back(block(words[rng() % words.size()], {0, 0, 1, 1}));
    }
    double greedy = 0;
    for (const auto& m : match_blocks(ref, cand)) greedy += m.similarity;
    const double best = exhaustive_total(ref, cand, 0.5);
    CHECK(greedy <= best + 1e-12);
    if (std::abs(greedy - best) < 1e-12) ++equal;
    if (best > 0) worst = std::min(worst, greedy / best);
    ++total;
  }
  MESSAGE("greedy equals exhaustive in " << equal << "/" << total << " cases; worst ratio " << worst);
}

TEST_CASE("clip with an embedder") {
  const Image a(20, 20, {0, 0, 0});
  const Image b(20, 20, {255, 255, 255});
  FixedEmbedder emb([](const Image& img) {
    return img.at(0, 0).r == 0 ? std::vector<double>{1, 0} : std::vector<double>{0, 1};
  });
  CHECK(clip_similarity(a, b, emb) == doctest::Approx(0.0));
  CHECK(clip_similarity(a, a, emb) == doctest::Approx(1.0));
  auto v = visual_score(RenderedPage{a, {}}, RenderedPage{a, {}}, &emb);
  REQUIRE(v.clip);
  CHECK(*v.clip == doctest::Approx(1.0));
  CHECK(v.composite == doctest::Approx(1.0));
  v = visual_score(RenderedPage{a, {}}, RenderedPage{b, {}}, &emb);
  REQUIRE(v.clip);
  CHECK(*v.clip == doctest::Approx(0.5));
  CHECK(v.composite == doctest::Approx(4.5 / 5.0));
  FixedEmbedder mismatch([](const Image& img) {
    return img.at(0, 0).r == 0 ? std::vector<double>{1, 0} : std::vector<double>{0, 1, 0};
  });
  CHECK(code_of([&] { clip_similarity(a, b, mismatch); }) == ErrorCode::kDimensionMismatch);
}

TEST_CASE("http embedder") {
  http::Server server;
  server.post("/embed", [](const std::string& body) {
    const auto png = nlohmann::json::parse(body)["image"].get<std::string>();
    const double v = static_cast<double>(png.size() % 7) + 1.0;
    return http::Reply{200, nlohmann::json{{"embedding", {v, 1.0, 0.0}}, {"dim", 3}, {"normalized", false}}.dump()};
  });
  server.get("/health", [](const std::string&) { return http::Reply{200, R"({"model":"test-clip"})"}; });
  server.start();
  HttpEmbedder emb(HttpEndpointConfig{server.base_url() + "/embed", std::chrono::milliseconds(5000), ""});
  CHECK(emb.health() == "test-clip");
  const Image img(16, 16, {10, 20, 30});
  CHECK(emb.embed(img).size() == 3);
  CHECK(clip_similarity(img, img, emb) == doctest::Approx(1.0));
  BuiltinRenderer renderer;
  const std::string page = "<html><body><p>hello there</p></body></html>";
  const auto report = evaluate_pair(page, page, renderer, &emb);
  REQUIRE(report.clip_sim);
  CHECK(*report.clip_sim == doctest::Approx(1.0));
  CHECK(report.ssim == 1.0);
  server.stop();
}

TEST_CASE("unavailable embedder leaves clip absent") {
  HttpEmbedder dead(HttpEndpointConfig{"http://127.0.0.1:1", std::chrono::milliseconds(2000), ""});
  const Image img(16, 16);
  CHECK(code_of([&] { dead.embed(img); }) == ErrorCode::kEmbedderUnavailable);
  CHECK(code_of([&] { dead.health(); }) == ErrorCode::kEmbedderUnavailable);
  const auto v = visual_score(RenderedPage{img, {}}, RenderedPage{img, {}}, &dead);
  CHECK_FALSE(v.clip);
  CHECK(v.composite == 1.0);
  BuiltinRenderer renderer;
  const auto report = evaluate_pair("<p>a b c</p>", "<p>a b d</p>", renderer, &dead);
  CHECK_FALSE(report.clip_sim);
  CHECK_FALSE(report.visual.clip);
}

TEST_CASE("embedder errors") {
  http::Server server;
  server.post("/embed", [](const std::string&) { return http::Reply{200, R"({"embedding":[1,2],"dim":3})"}; });
  server.start();
  HttpEmbedder emb(HttpEndpointConfig{server.base_url(), std::chrono::milliseconds(5000), ""});
  CHECK(code_of([&] { emb.embed(Image(8, 8)); }) == ErrorCode::kDimensionMismatch);
  server.stop();
  CHECK(code_of([] { cosine_similarity({0, 0}, {1, 0}); }) == ErrorCode::kInvalidArgument);
}
