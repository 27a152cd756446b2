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

// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "hiergen/assemble.hpp"
#include "hiergen/harness.hpp"
#include "hiergen/html.hpp"
#include "hiergen/metrics.hpp"
#include "hiergen/prune.hpp"
#include "support/support.hpp"

using namespace hiergen;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) {
      ++failures_;
      if (first_.empty()) first_ = what;
    }
  }
  Outcome done(const std::string& summary) const {
    Outcome o;
    o.pass = failures_ == 0;
    o.detail = summary + "; " + std::to_string(checks_) + " checks";
    if (!o.pass) o.detail += ", " + std::to_string(failures_) + " failed, first: " + first_;
    return o;
  }

 private:
  int checks_ = 0;
  int failures_ = 0;
  std::string first_;
};

std::set<NodePath> node_paths(const CoarseNode& root) {
  std::set<NodePath> out;
  visit_nodes(root, [&](const CoarseNode&, int, const NodePath& p) { out.insert(p); });
  return out;
}

bool under(const NodePath& p, const NodePath& root) {
  return p.size() >= root.size() && std::equal(root.begin(), root.end(), p.begin());
}

std::vector<std::pair<MinArea, MaxDepth>> grid_cells() {
  std::vector<std::pair<MinArea, MaxDepth>> out;
  for (const auto& a : default_min_area_set()) {
    for (const auto& d : default_max_depth_set()) out.emplace_back(a, d);
  }
  return out;
}

// a is at least as strict as b in both thresholds.
bool stricter(const std::pair<MinArea, MaxDepth>& a, const std::pair<MinArea, MaxDepth>& b) {
  const double fa = a.first.fraction.value_or(0), fb = b.first.fraction.value_or(0);
  const int da = a.second.depth.value_or(1 << 30), db = b.second.depth.value_or(1 << 30);
  return fa >= fb && da <= db;
}

Outcome pruning_exactness() {
  Checker c;
  const auto corpus = testing::pruning_corpus();
  for (const auto& f : corpus) {
    const auto r = prune_training(f.record);
    const auto in = tree_stats(f.record.bboxes).node_count;
    const auto out = tree_stats(r.tree).node_count;
    c.expect(r.report.kept == f.kept, f.name + " kept");
    c.expect(r.report.removed_small == f.removed_small, f.name + " removed_small");
    c.expect(r.report.removed_solid == f.removed_solid, f.name + " removed_solid");
    c.expect(r.discarded == f.discarded, f.name + " discarded");
    c.expect(r.report.discarded_sample == f.discarded, f.name + " report discarded");
    c.expect(out == r.report.kept, f.name + " kept equals output size");
    c.expect(in - out == r.report.removed_small + r.report.removed_solid, f.name + " removal counts reconcile");
    c.expect(r.report.total() == in, f.name + " total");
    // The surviving origins are exactly the input nodes outside the removed subtrees.
    std::set<NodePath> expected;
    for (const auto& p : node_paths(f.record.bboxes.root)) {
      bool removed = false;
      for (const auto& root : f.removed_roots) removed = removed || under(p, root);
      if (!removed) expected.insert(p);
    }
    const std::set<NodePath> got(r.origins.begin(), r.origins.end());
    c.expect(got == expected, f.name + " surviving nodes");
  }
  return c.done(std::to_string(corpus.size()) + " fixtures");
}

Outcome truncation_invariants() {
  Checker c;
  std::mt19937 rng(20240601);
  const auto cells = grid_cells();
  for (int i = 0; i < 200; ++i) {
    const auto t = testing::random_tree(rng, 10, 100);
    std::vector<std::set<NodePath>> kept(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto& [a, d] = cells[k];
      const std::string tag = "tree " + std::to_string(i) + " cell " + grid_cell_name(a, d);
      const auto r = prune_inference_traced(t, a, d);
      const auto stats = tree_stats(r.tree);
      if (d.depth) c.expect(stats.max_depth <= *d.depth, tag + " depth bound");
      if (a.fraction) {
        bool ok = true;
        visit_nodes(r.tree.root, [&](const CoarseNode& n, int depth, const NodePath&) {
          if (depth > 1 && area_fraction(n.bbox, r.tree) < *a.fraction) ok = false;
        });
        c.expect(ok, tag + " area bound");
      }
      const auto again = prune_inference_traced(r.tree, a, d);
      c.expect(again.tree == r.tree, tag + " idempotence");
      c.expect(r.report.total() == tree_stats(t).node_count, tag + " report total");
      kept[k] = std::set<NodePath>(r.origins.begin(), r.origins.end());
      c.expect(kept[k].count(NodePath{}) == 1, tag + " root kept");
    }
    for (std::size_t x = 0; x < cells.size(); ++x) {
      for (std::size_t y = 0; y < cells.size(); ++y) {
        if (x == y || !stricter(cells[x], cells[y])) continue;
        c.expect(std::includes(kept[y].begin(), kept[y].end(), kept[x].begin(), kept[x].end()),
                 "tree " + std::to_string(i) + " monotonicity " + grid_cell_name(cells[x].first, cells[x].second) +
                     " within " + grid_cell_name(cells[y].first, cells[y].second));
      }
    }
  }
  return c.done("200 trees x 16 cells");
}

Outcome round_trips() {
  Checker c;
  std::mt19937 rng(777);
  for (int i = 0; i < 500; ++i) {
    const auto t = testing::random_tree(rng, 10, 100);
    const auto text = serialize_tree(t);
    const auto back = parse_tree(text);
    c.expect(back == t, "serialize/parse tree " + std::to_string(i));
    c.expect(serialize_tree(back) == text, "canonical text " + std::to_string(i));
  }
  for (int i = 0; i < 100; ++i) {
    const auto t = testing::random_tree(rng, 8, 80);
    const auto frags = testing::random_fragments(rng, t);
    c.expect(extract_coarse(assemble(t, frags)) == t, "assemble/extract " + std::to_string(i));
  }
  return c.done("500 serializations, 100 assemblies");
}

// Marked elements of a parsed document, pre-order.
void marked_elements(html::Node& n, std::vector<html::Node*>& out) {
  if (n.is_element() && n.attr(kPathAttr)) out.push_back(&n);
  for (auto& ch : n.children) marked_elements(*ch, out);
}

std::string serialize_doc(const html::Node& doc) { return "<!DOCTYPE html>\n" + html::inner_html(doc); }

Outcome preservation_mutations() {
  Checker c;
  BuiltinRenderer renderer;
  const auto records = testing::load_fixtures(renderer);
  const std::vector<std::pair<MinArea, MaxDepth>> cells = {
      {MinArea::of(0.1), MaxDepth::of(4)}, {MinArea::of(0.2), MaxDepth::of(5)}, {MinArea::of(0.3), MaxDepth::of(6)},
      {MinArea::unlimited(), MaxDepth::unlimited()}, {MinArea::of(0.1), MaxDepth::unlimited()}};
  std::mt19937 rng(99);
  int documents = 0, deletions = 0, swaps = 0;
  for (const auto& rec : records) {
    for (const auto& [a, d] : cells) {
      const auto tree = oracle_tree(rec, a, d).tree;
      const std::string doc = assemble(tree, testing::random_fragments(rng, tree));
      ++documents;
      const std::string tag = rec.id + " " + grid_cell_name(a, d);
      c.expect(validate_preservation(tree, doc).preserved, tag + " untouched");
      {
        auto parsed = html::parse_document(doc, false);
        c.expect(validate_preservation(tree, serialize_doc(*parsed)).preserved, tag + " reserialized");
      }
      std::size_t count = 0;
      {
        auto parsed = html::parse_document(doc, false);
        std::vector<html::Node*> marked;
        marked_elements(*parsed, marked);
        count = marked.size();
      }
      for (std::size_t k = 0; k < count; ++k) {
        auto parsed = html::parse_document(doc, false);
        std::vector<html::Node*> marked;
        marked_elements(*parsed, marked);
        html::Node* victim = marked[k];
        auto& siblings = victim->parent->children;
        siblings.erase(std::find_if(siblings.begin(), siblings.end(),
                                    [&](const html::NodePtr& p) { return p.get() == victim; }));
        ++deletions;
        c.expect(!validate_preservation(tree, serialize_doc(*parsed)).preserved,
                 tag + " delete " + std::to_string(k));
      }
      for (std::size_t k = 0; k < count; ++k) {
        auto probe = html::parse_document(doc, false);
        std::vector<html::Node*> marked;
        marked_elements(*probe, marked);
        std::vector<std::size_t> idx;
        const auto& kids = marked[k]->children;
        for (std::size_t j = 0; j < kids.size(); ++j) {
          if (kids[j]->is_element() && kids[j]->attr(kPathAttr)) idx.push_back(j);
        }
        for (std::size_t x = 0; x < idx.size(); ++x) {
          for (std::size_t y = x + 1; y < idx.size(); ++y) {
            auto parsed = html::parse_document(doc, false);
            std::vector<html::Node*> m2;
            marked_elements(*parsed, m2);
            std::swap(m2[k]->children[idx[x]], m2[k]->children[idx[y]]);
            ++swaps;
            c.expect(!validate_preservation(tree, serialize_doc(*parsed)).preserved,
                     tag + " swap under " + std::to_string(k));
          }
        }
      }
    }
  }
  return c.done(std::to_string(documents) + " documents, " + std::to_string(deletions) + " deletions, " +
                std::to_string(swaps) + " swaps");
}

GrayImage flat(int w, int h, std::uint8_t v) {
  GrayImage g;
  g.width = w;
  g.height = h;
  g.pixels.assign(static_cast<std::size_t>(w) * h, v);
  return g;
}

Outcome metric_calibration() {
  Checker c;
  double worst = 0;
  for (const auto& s : testing::ssim_reference_cases()) {
    const double v = ssim(s.a, s.b);
    worst = std::max(worst, std::abs(v - s.expected));
    c.expect(std::abs(v - s.expected) <= 1e-6, s.name + " reference value");
    c.expect(ssim(s.a, s.a) == 1.0, s.name + " self similarity");
    c.expect(ssim(s.b, s.b) == 1.0, s.name + " self similarity");
  }
  const double closed = kSsimC1 / (65025.0 + kSsimC1);
  const double uniform = ssim(flat(64, 48, 0), flat(64, 48, 255));
  c.expect(std::abs(uniform - closed) <= 1e-9, "uniform closed form");
  BuiltinRenderer renderer;
  const auto records = testing::load_fixtures(renderer);
  for (const auto& rec : records) {
    const auto v = visual_score(rec.html, rec.html, renderer, nullptr);
    c.expect(v.composite == 1.0, rec.id + " visual_score(x,x)");
    c.expect(!v.clip, rec.id + " clip absent");
  }
  std::ostringstream os;
  os << "10 reference pairs, max deviation " << worst << ", " << records.size() << " fixtures";
  return c.done(os.str());
}

Outcome end_to_end() {
  Checker c;
  BuiltinRenderer renderer;
  const auto records = testing::load_fixtures(renderer, 5);
  double lowest = 1.0;
  for (const auto& rec : records) {
    const PipelineConfig config;
    const AgentOptions options;
    const auto store_dir = testing::scratch_dir("accept-e2e");
    ReplayChatEndpoint store(store_dir);
    testing::record_ground_truth(rec, config, options, store);
    std::string html[2];
    for (auto& h : html) {
      OracleBackend oracle(rec, config);
      ReplayChatEndpoint agent(store_dir);
      PipelineBackends b;
      b.structure = &oracle;
      b.agent = &agent;
      b.agent_options = options;
      const auto r = run_pipeline(rec.screenshot, config, b, rec.id);
      c.expect(r.status == RunStatus::kSuccess, rec.id + " status " + std::string(run_status_name(r.status)));
      h = r.html;
    }
    c.expect(html[0] == html[1], rec.id + " byte-identical");
    const auto v = visual_score(rec.html, html[0], renderer, nullptr);
    lowest = std::min(lowest, v.composite);
    c.expect(v.composite >= 0.9, rec.id + " composite " + std::to_string(v.composite));
    c.expect(!v.clip, rec.id + " clip absent");
  }
  return c.done(std::to_string(records.size()) + " fixtures, lowest composite " + std::to_string(lowest));
}

Outcome grid_shape() {
  Checker c;
  BuiltinRenderer renderer;
  const auto records = testing::load_fixtures(renderer, 3);
  const auto store_dir = testing::scratch_dir("accept-grid");
  const AgentOptions options;
  for (const auto& rec : records) {
    for (const auto& [a, d] : grid_cells()) {
      PipelineConfig cfg;
      cfg.min_area = a;
      cfg.max_depth = d;
      testing::record_ground_truth(rec, cfg, options, ReplayChatEndpoint(store_dir));
    }
  }
  ReplayChatEndpoint agent(store_dir);
  PipelineBackends b;
  b.agent = &agent;
  b.agent_options = options;
  GridOptions g;
  g.workers = 3;
  const auto cells = grid_search(records, g, oracle_factory(), b, renderer, nullptr);
  c.expect(cells.size() == 16, "16 cells, got " + std::to_string(cells.size()));
  const auto expected = grid_cells();
  int defaults = 0;
  for (std::size_t i = 0; i < cells.size() && i < expected.size(); ++i) {
    c.expect(cells[i].min_area == expected[i].first && cells[i].max_depth == expected[i].second,
             "cell order " + std::to_string(i));
    c.expect(cells[i].records == records.size(), "cell record count");
    c.expect(cells[i].mean.has_value(), "cell mean present");
    if (cells[i].is_default) {
      ++defaults;
      c.expect(cells[i].min_area == MinArea::of(0.1) && cells[i].max_depth == MaxDepth::of(4),
               "default cell is (0.1, 4)");
    }
  }
  c.expect(defaults == 1, "exactly one default cell");
  const PipelineConfig fresh;
  c.expect(fresh.min_area == MinArea::of(0.1) && fresh.max_depth == MaxDepth::of(4), "default config");
  const auto csv = grid_csv(cells);
  c.expect(std::count(csv.begin(), csv.end(), '\n') == 17, "csv rows");
  return c.done("16 cells over " + std::to_string(records.size()) + " fixtures");
}

struct Criterion {
  const char* name;
  double budget_s;
  Outcome (*fn)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"pruning-rule exactness", 5, pruning_exactness},
      {"truncation invariants", 30, truncation_invariants},
      {"round trips", 30, round_trips},
      {"preservation mutation", 30, preservation_mutations},
      {"metric calibration", 120, metric_calibration},
      {"end-to-end determinism and fidelity", 180, end_to_end},
      {"grid-search shape", 300, grid_shape},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < cr.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s  %-38s %7.2fs / %.0fs  %s%s\n", pass ? "PASS" : "FAIL", cr.name, secs, cr.budget_s,
                o.detail.c_str(), in_time ? "" : " (over time budget)");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
