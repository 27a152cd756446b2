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

#include "support/support.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <nlohmann/json.hpp>
#include <unistd.h>

#include "hiergen/crop.hpp"
#include "hiergen/html.hpp"
#include "hiergen/prune.hpp"
#include "hiergen/util.hpp"

namespace hiergen::testing {

namespace fs = std::filesystem;

std::string fixture_dir() { return HIERGEN_FIXTURE_DIR; }

std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  for (const auto& d : list_record_dirs(fixture_dir() + "/pages")) out.push_back(fs::path(d).filename().string());
  return out;
}

std::string fixture_path(const std::string& name) { return fixture_dir() + "/pages/" + name; }

DatasetRecord load_fixture(const std::string& name, Renderer& renderer) {
  return load_record(fixture_path(name), &renderer, 1280);
}

std::vector<DatasetRecord> load_fixtures(Renderer& renderer, std::size_t limit) {
  std::vector<DatasetRecord> out;
  for (const auto& name : fixture_names()) {
    if (limit && out.size() == limit) break;
    out.push_back(load_fixture(name, renderer));
  }
  return out;
}

std::string scratch_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  const fs::path p = fs::temp_directory_path() /
                     ("hiergen-" + name + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

namespace {

// Source element for each oracle node, keyed by coarse path.
std::map<NodePath, const html::Node*> source_elements(const DatasetRecord& record, const OracleTree& oracle,
                                                     const LaidOutPage& page) {
  std::map<NodePath, std::size_t> index;
  visit_nodes(record.bboxes.root, [&](const CoarseNode&, int, const NodePath& p) { index.emplace(p, index.size()); });
  std::map<NodePath, const html::Node*> out;
  std::size_t i = 0;
  visit_nodes(oracle.tree.root, [&](const CoarseNode&, int, const NodePath& p) {
    out[p] = page.tree_elements.at(index.at(oracle.origins.at(i++)));
  });
  return out;
}

void copy_attributes(html::Node& node, const std::map<NodePath, const html::Node*>& sources) {
  if (node.is_element()) {
    if (const auto* cn = node.attr(kPathAttr)) {
      const auto it = sources.find(path_from_string(*cn));
      if (it != sources.end()) {
        for (const auto& a : it->second->attrs) {
          if (a.name != kPathAttr && a.name != kBoxAttr) node.set_attr(a.name, a.value);
        }
      }
    }
  }
  for (auto& c : node.children) copy_attributes(*c, sources);
}

}  // namespace

std::string restore_styles(const DatasetRecord& record, const OracleTree& oracle, std::string_view assembled,
                           int viewport_width) {
  const LaidOutPage page = layout_page(record.html, viewport_width);
  const auto sources = source_elements(record, oracle, page);
  auto doc = html::parse_document(assembled, false);
  copy_attributes(*doc, sources);
  std::vector<const html::Node*> sheets;
  html::collect_elements(*page.document, "style", sheets);
  std::string css;
  for (const auto* s : sheets) css += html::inner_html(*s);
  if (auto* style = html::find_first(*doc, "style")) {
    style->children.clear();
    auto text = std::make_unique<html::Node>();
    text->kind = html::Node::Kind::kText;
    text->text = css;
    style->append(std::move(text));
  }
  return "<!DOCTYPE html>\n" + html::outer_html(*html::find_first(*doc, "html")) + "\n";
}

std::string record_ground_truth(const DatasetRecord& record, const PipelineConfig& config,
                                const AgentOptions& options, const ReplayChatEndpoint& store,
                                bool with_refinement) {
  const OracleTree oracle = oracle_tree(record, config.min_area, config.max_depth);
  const LaidOutPage page = layout_page(record.html, record.screenshot.width());
  const auto sources = source_elements(record, oracle, page);
  const auto crops = crop_leaves(record.screenshot, oracle.tree);
  std::vector<LeafFragment> fragments;
  for (const auto& c : crops) {
    if (is_contentless_tag(c.tag)) {
      fragments.push_back(LeafFragment{c.path, false, "", ""});
      continue;
    }
    if (!c.region) {
      fragments.push_back(LeafFragment::failure(c.path, c.error));
      continue;
    }
    std::string inner = html::inner_html(*sources.at(c.path));
    if (inner.find('<') == std::string::npos) inner = "<span>" + inner + "</span>";
    const std::string completion = "```html\n" + inner + "\n```\n";
    store.store(leaf_request(*c.region, c.tag, options), completion);
    GeneratedFragment g;
    g.leaf_path = c.path;
    g.html = sanitize_fragment(extract_code(completion));
    fragments.push_back(LeafFragment::from(g));
  }
  const std::string assembled = assemble(oracle.tree, fragments);
  if (with_refinement) {
    const std::string refined = restore_styles(record, oracle, assembled, record.screenshot.width());
    store.store(refine_request(assembled, record.screenshot, options), "```html\n" + refined + "```\n");
  }
  return assembled;
}

namespace {

enum class Paint { kNone, kTexture, kFlat };

struct NodeSpec {
  int parent;  // index into the node list, -1 for children of body
  BBox box;
  Paint paint = Paint::kNone;
  Rgb flat{255, 255, 255};
  std::optional<std::pair<int, Rgb>> speck;  // one pixel at box origin + offset
};

void paint_texture(Image& img, const BBox& b) {
  const BBox c = b.clamped(img.width(), img.height());
  for (int y = c.y; y < c.y + c.h; ++y) {
    for (int x = c.x; x < c.x + c.w; ++x) {
      img.set(x, y, ((x / 2 + y / 2) % 2) ? Rgb{0, 0, 0} : Rgb{255, 255, 255});
    }
  }
}

// Body plus nine 500x100 textured rows down the left half (5% each).
std::vector<NodeSpec> backbone(int rows = 9) {
  std::vector<NodeSpec> out;
  for (int k = 0; k < rows; ++k) out.push_back(NodeSpec{-1, {0, k * 100, 500, 100}, Paint::kTexture});
  return out;
}

DatasetRecord build_record(const std::string& name, const std::vector<NodeSpec>& nodes) {
  DatasetRecord r;
  r.id = name;
  r.html = "<body></body>";
  r.bboxes.page_width = 1000;
  r.bboxes.page_height = 1000;
  r.bboxes.root = CoarseNode{"body", {0, 0, 1000, 1000}, {}};
  r.screenshot = Image(1000, 1000);
  std::vector<NodePath> paths;
  for (const auto& s : nodes) {
    NodePath parent = s.parent < 0 ? NodePath{} : paths.at(static_cast<std::size_t>(s.parent));
    CoarseNode* p = &r.bboxes.root;
    for (int i : parent) p = &p->children[static_cast<std::size_t>(i)];
    p->children.push_back(CoarseNode{"div", s.box, {}});
    parent.push_back(static_cast<int>(p->children.size()) - 1);
    paths.push_back(parent);
    if (s.paint == Paint::kTexture) paint_texture(r.screenshot, s.box);
    if (s.paint == Paint::kFlat) r.screenshot.fill_rect(s.box, s.flat);
    if (s.speck) r.screenshot.set(s.box.x + s.speck->first, s.box.y + s.speck->first, s.speck->second);
  }
  return r;
}

PruneFixture make(const std::string& name, std::vector<NodeSpec> nodes, int kept, int small, int solid, bool discarded,
                  std::vector<NodePath> removed) {
  return PruneFixture{name, build_record(name, nodes), kept, small, solid, discarded, std::move(removed)};
}

}  // namespace

std::vector<PruneFixture> pruning_corpus() {
  std::vector<PruneFixture> out;
  auto b = backbone();
  // 100x100 is 1% of the page.
  auto f = b;
  f.push_back(NodeSpec{0, {0, 0, 100, 100}, Paint::kTexture});
  out.push_back(make("one_percent", f, 10, 1, 0, false, {{0, 0}}));
  // 200x200 (4%) over white.
  f = b;
  f.push_back(NodeSpec{-1, {600, 0, 200, 200}});
  out.push_back(make("white_four_percent", f, 10, 0, 1, false, {{9}}));
  // Eight rows plus body: 9 nodes.
  out.push_back(make("nine_nodes", backbone(8), 9, 0, 0, true, {}));
  out.push_back(make("ten_nodes", b, 10, 0, 0, false, {}));
  // 300x100 is exactly 3%; 299x100 is 2.99%.
  f = b;
  f.push_back(NodeSpec{-1, {600, 300, 300, 100}, Paint::kTexture});
  f.push_back(NodeSpec{-1, {600, 500, 299, 100}, Paint::kTexture});
  out.push_back(make("area_boundary", f, 11, 1, 0, false, {{10}}));
  // A 2% node takes its two page-sized children with it.
  f = b;
  f.push_back(NodeSpec{-1, {600, 700, 200, 100}, Paint::kTexture});
  f.push_back(NodeSpec{9, {0, 0, 1000, 1000}});
  f.push_back(NodeSpec{9, {0, 0, 1000, 1000}});
  out.push_back(make("subtree_attribution", f, 10, 3, 0, false, {{9}}));
  // Deviation 2 is still solid, 3 is not.
  f = b;
  f.push_back(NodeSpec{-1, {600, 0, 200, 200}, Paint::kFlat, Rgb{100, 100, 100}, std::pair{5, Rgb{102, 98, 100}}});
  f.push_back(NodeSpec{-1, {600, 300, 200, 200}, Paint::kFlat, Rgb{100, 100, 100}, std::pair{5, Rgb{103, 100, 100}}});
  out.push_back(make("solid_tolerance", f, 11, 0, 1, false, {{9}}));
  // Area runs before color: the small white child counts as small, its
  // white parent as solid; a small white node counts as small.
  f = b;
  f.push_back(NodeSpec{-1, {700, 700, 100, 100}});
  f.push_back(NodeSpec{-1, {600, 0, 300, 300}});
  f.push_back(NodeSpec{10, {610, 10, 50, 50}});
  out.push_back(make("rule_order", f, 10, 2, 1, false, {{9}, {10}}));
  // Entirely off the page: clamps to nothing.
  f = b;
  f.push_back(NodeSpec{-1, {1200, 0, 300, 300}});
  out.push_back(make("off_page", f, 10, 0, 1, false, {{9}}));
  // Overhangs the page; the visible corner is textured.
  f = b;
  f.push_back(NodeSpec{-1, {900, 900, 300, 300}, Paint::kTexture});
  out.push_back(make("overhang", f, 11, 0, 0, false, {}));
  // Two blank rows leave 8 nodes.
  f = b;
  f[3].paint = Paint::kNone;
  f[6].paint = Paint::kNone;
  out.push_back(make("blank_rows", f, 8, 0, 2, true, {{3}, {6}}));
  // 5% > 4% > 3% survive, 2% does not.
  f = b;
  f.push_back(NodeSpec{0, {0, 0, 400, 100}, Paint::kTexture});
  f.push_back(NodeSpec{9, {0, 0, 300, 100}, Paint::kTexture});
  f.push_back(NodeSpec{10, {0, 0, 200, 100}, Paint::kTexture});
  out.push_back(make("nested_chain", f, 12, 1, 0, false, {{0, 0, 0, 0}}));
  return out;
}

namespace {

const char* const kTags[] = {"div", "section", "p", "span", "ul", "li", "header", "footer", "nav", "article"};

void grow(std::mt19937& rng, CoarseNode& node, int depth, int max_depth, int& budget) {
  if (depth >= max_depth || budget <= 0) return;
  std::uniform_int_distribution<int> fanout(0, 4);
  int n = std::min(fanout(rng), budget);
  if (n == 0) return;
  const bool horizontal = node.bbox.w >= node.bbox.h;
  const int span = horizontal ? node.bbox.w : node.bbox.h;
  if (span < n) n = span;
  if (n == 0) return;
  std::vector<int> cuts{0, span};
  std::uniform_int_distribution<int> cut(1, std::max(1, span - 1));
  while (static_cast<int>(cuts.size()) < n + 1) {
    const int c = cut(rng);
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
    if (span - 1 < n) break;
  }
  std::sort(cuts.begin(), cuts.end());
  std::uniform_int_distribution<int> tag(0, static_cast<int>(std::size(kTags)) - 1);
  for (std::size_t i = 0; i + 1 < cuts.size() && budget > 0; ++i) {
    CoarseNode child;
    child.tag = kTags[tag(rng)];
    const int a = cuts[i], b = cuts[i + 1];
    child.bbox = horizontal ? BBox{node.bbox.x + a, node.bbox.y, b - a, node.bbox.h}
                            : BBox{node.bbox.x, node.bbox.y + a, node.bbox.w, b - a};
    --budget;
    node.children.push_back(std::move(child));
  }
  for (auto& c : node.children) grow(rng, c, depth + 1, max_depth, budget);
}

}  // namespace

CoarseDomTree random_tree(std::mt19937& rng, int max_depth, int max_nodes, int width, int height) {
  CoarseDomTree t;
  t.page_width = width;
  t.page_height = height;
  t.root.tag = "body";
  t.root.bbox = BBox{0, 0, width, height};
  int budget = max_nodes - 1;
  grow(rng, t.root, 1, max_depth, budget);
  return t;
}

std::vector<LeafFragment> random_fragments(std::mt19937& rng, const CoarseDomTree& tree) {
  static const char* const kSnippets[] = {
      "<p>Alpha &amp; beta</p>", "<span style=\"color:#c00\">hot</span> text", "<ul><li>one</li><li>two</li></ul>",
      "<img src=\"a.png\" alt=\"x\">", "<b>bold</b><br><i>it</i>", "<div><p>unclosed", "</div>stray end",
      "<table><tr><td>c</td></tr></table>", "<style>.k{color:red}</style><p class=\"k\">k</p>"};
  std::uniform_int_distribution<int> pick(0, static_cast<int>(std::size(kSnippets)) - 1);
  std::bernoulli_distribution failed(0.1);
  std::vector<LeafFragment> out;
  for (const auto& [path, node] : collect_leaves(tree.root)) {
    if (is_contentless_tag(node->tag)) {
      out.push_back(LeafFragment{path, false, "", ""});
    } else if (failed(rng)) {
      out.push_back(LeafFragment::failure(path, "agent -- timeout"));
    } else {
      out.push_back(LeafFragment{path, false, kSnippets[pick(rng)], ""});
    }
  }
  return out;
}

Image random_image(std::mt19937& rng, int width, int height) {
  Image img(width, height);
  std::uniform_int_distribution<int> v(0, 255);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      img.set(x, y, Rgb{static_cast<std::uint8_t>(v(rng)), static_cast<std::uint8_t>(v(rng)),
                        static_cast<std::uint8_t>(v(rng))});
    }
  }
  return img;
}

Image solid_image(int width, int height, Rgb color) {
  Image img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) img.set(x, y, color);
  }
  return img;
}

GrayImage random_gray(std::mt19937& rng, int width, int height) {
  GrayImage g{width, height, {}};
  std::uniform_int_distribution<int> v(0, 255);
  g.pixels.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (auto& p : g.pixels) p = static_cast<std::uint8_t>(v(rng));
  return g;
}

namespace {

GrayImage gray_from(int w, int h, const std::function<int(int, int)>& fn) {
  GrayImage g;
  g.width = w;
  g.height = h;
  g.pixels.resize(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      g.pixels[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint8_t>(std::clamp(fn(x, y), 0, 255));
    }
  }
  return g;
}

GrayImage lcg_gray(int w, int h, std::uint64_t seed) {
  std::uint64_t s = seed;
  return gray_from(w, h, [&](int, int) {
    s = (1103515245 * s + 12345) % (1ULL << 31);
    return static_cast<int>((s >> 16) & 255);
  });
}

GrayImage map_gray(const GrayImage& a, const std::function<int(int)>& fn) {
  GrayImage out = a;
  for (auto& p : out.pixels) p = static_cast<std::uint8_t>(std::clamp(fn(p), 0, 255));
  return out;
}

}  // namespace

std::vector<SsimCase> ssim_reference_cases() {
  std::vector<SsimCase> out;
  out.push_back({"noise_32", lcg_gray(32, 32, 1), lcg_gray(32, 32, 2), 0.020264499460603474});
  {
    const auto a = lcg_gray(64, 48, 3);
    const auto n = lcg_gray(64, 48, 4);
    GrayImage b = a;
    for (std::size_t i = 0; i < b.pixels.size(); ++i) {
      b.pixels[i] = static_cast<std::uint8_t>(std::clamp(a.pixels[i] + n.pixels[i] % 41 - 20, 0, 255));
    }
    out.push_back({"perturbed", a, b, 0.98698654725503976});
  }
  out.push_back({"gradients", gray_from(40, 40, [](int x, int) { return x * 6; }),
                 gray_from(40, 40, [](int, int y) { return y * 6; }), 0.2176075045433177});
  {
    const auto c = gray_from(50, 30, [](int x, int y) { return ((x / 5 + y / 5) % 2) * 255; });
    out.push_back({"inverted_checker", c, map_gray(c, [](int v) { return 255 - v; }), -0.80599205400393603});
  }
  {
    const auto a = lcg_gray(24, 24, 5);
    out.push_back({"darkened", a, map_gray(a, [](int v) { return v * 3 / 4; }), 0.92075831656772589});
  }
  out.push_back({"noise_16x20", lcg_gray(16, 20, 7), lcg_gray(16, 20, 8), 0.12459112031622881});
  out.push_back({"shifted_pattern", gray_from(100, 80, [](int x, int y) { return (x * x + 3 * y) % 256; }),
                 gray_from(100, 80, [](int x, int y) { return (x * x + 3 * y + 17) % 256; }),
                 0.6683754148377451});
  out.push_back({"flat_vs_noise", gray_from(33, 17, [](int, int) { return 128; }), lcg_gray(33, 17, 9),
                 0.010412134588436763});
  {
    const auto a = lcg_gray(64, 64, 10);
    out.push_back({"contrast", a, map_gray(a, [](int v) { return 2 * (v - 128) + 128; }), 0.91373490746369634});
  }
  out.push_back({"noise_12", lcg_gray(12, 12, 11), lcg_gray(12, 12, 12), -0.067714695424402754});
  return out;
}

std::string chat_body(const std::string& content, int prompt_tokens, int completion_tokens) {
  nlohmann::json j;
  j["choices"] = nlohmann::json::array({{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}});
  j["usage"] = {{"prompt_tokens", prompt_tokens}, {"completion_tokens", completion_tokens}};
  return j.dump();
}

MockChatServer::MockChatServer(std::function<http::Reply(const std::string&)> handler)
    : hits_(std::make_shared<std::atomic<int>>(0)) {
  auto hits = hits_;
  server_.post("/v1/chat/completions", [handler = std::move(handler), hits](const std::string& body) {
    ++*hits;
    return handler(body);
  });
  server_.start();
}

MockChatServer::~MockChatServer() { server_.stop(); }

std::string MockChatServer::url() const { return server_.base_url() + "/v1/chat/completions"; }

}  // namespace hiergen::testing
