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


#include "hiergen/harness.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "hiergen/crop.hpp"
#include "hiergen/error.hpp"
#include "hiergen/util.hpp"

namespace hiergen {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

ConcurrencyLimit::ConcurrencyLimit(int slots) : slots_(slots) {
  if (slots_ < 1) fail(ErrorCode::kInvalidArgument, "concurrency limit must be >= 1");
}

void ConcurrencyLimit::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return used_ < slots_; });
  ++used_;
}

void ConcurrencyLimit::release() {
  {
    std::lock_guard lock(mu_);
    --used_;
  }
  cv_.notify_one();
}

std::string_view run_status_name(RunStatus status) {
  switch (status) {
    case RunStatus::kSuccess: return "success";
    case RunStatus::kPartial: return "partial";
    case RunStatus::kFailure: return "failure";
  }
  return "failure";
}

namespace {

std::string describe(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return std::string(error_code_name(err->code())) + ": " + err->what();
  }
  return e.what();
}

ojson config_json(const PipelineConfig& c) {
  ojson j;
  j["min_area"] = c.min_area.to_string();
  j["max_depth"] = c.max_depth.to_string();
  j["viewport_width"] = c.viewport_width;
  j["agent_concurrency"] = c.agent_concurrency;
  j["cache_dir"] = c.cache_dir;
  return j;
}

ojson bbox_json(const BBox& b) { return ojson::array({b.x, b.y, b.w, b.h}); }

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void write_bundle(const PipelineResult& r, const PipelineConfig& config, const PipelineBackends& b,
                  const Image& screenshot, const std::vector<LeafCrop>& crops,
                  const std::vector<LeafFragment>& fragments, const std::string& out_dir) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  if (!r.html.empty()) write_text_file((dir / "final.html").string(), r.html);
  if (!r.pre_refine_html.empty()) write_text_file((dir / "pre_refine.html").string(), r.pre_refine_html);
  if (r.tree.page_width > 0) write_text_file((dir / "coarse_tree.json").string(), serialize_tree(r.tree));
  if (!crops.empty()) write_crops((dir / "crops").string(), crops);
  for (const auto& f : fragments) {
    if (!f.failed) {
      write_text_file((dir / "fragments" / (leaf_file_stem(f.path) + ".html")).string(), f.html);
    }
  }

  ojson manifest;
  manifest["record_id"] = r.record_id;
  manifest["screenshot"] = {{"width", screenshot.width()},
                            {"height", screenshot.height()},
                            {"sha256", image_digest(screenshot)}};
  manifest["config"] = config_json(config);
  manifest["templates"] = {
      {"leaf", {{"name", b.agent_options.leaf_template.name}, {"sha256", b.agent_options.leaf_template.hash}}},
      {"refine",
       {{"name", b.agent_options.refine_template.name}, {"sha256", b.agent_options.refine_template.hash}}}};
  manifest["agent"] = {{"temperature", b.agent_options.temperature},
                       {"max_tokens", b.agent_options.max_tokens},
                       {"document_budget", b.agent_options.document_budget},
                       {"refine", b.refine}};
  manifest["backends"] = {{"structure", b.structure ? b.structure->identifier() : ""},
                          {"agent", b.agent ? b.agent->identifier() : ""}};
  write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");

  ojson status;
  status["status"] = run_status_name(r.status);
  status["failed_stage"] = r.failed_stage;
  status["error"] = r.error;
  status["refined"] = r.refined;
  if (r.preservation) {
    status["preservation"] = {{"preserved", r.preservation->preserved},
                              {"missing", r.preservation->missing},
                              {"extra_marked", r.preservation->extra_marked}};
  }
  ojson leaves = ojson::array();
  for (const auto& l : r.leaves) {
    leaves.push_back({{"path", path_to_string(l.path)},
                      {"tag", l.tag},
                      {"bbox", bbox_json(l.bbox)},
                      {"ok", l.ok},
                      {"skipped", l.skipped},
                      {"error", l.error}});
  }
  status["leaves"] = std::move(leaves);
  write_text_file((dir / "status.json").string(), status.dump(2) + "\n");

  ojson log;
  ojson timings = ojson::array();
  for (const auto& t : r.timings) timings.push_back({{"stage", t.stage}, {"ms", t.ms}});
  log["timings"] = std::move(timings);
  log["prompt_tokens"] = r.prompt_tokens;
  log["completion_tokens"] = r.completion_tokens;
  ojson leaf_log = ojson::array();
  for (const auto& l : r.leaves) {
    leaf_log.push_back({{"path", path_to_string(l.path)},
                        {"cache_hit", l.cache_hit},
                        {"attempts", l.attempts},
                        {"prompt_tokens", l.prompt_tokens},
                        {"completion_tokens", l.completion_tokens}});
  }
  log["leaves"] = std::move(leaf_log);
  write_text_file((dir / "log.json").string(), log.dump(2) + "\n");
}

}  // namespace

PipelineResult run_pipeline(const Image& screenshot, const PipelineConfig& config,
                            const PipelineBackends& backends, const std::string& record_id,
                            const std::string& out_dir) {
  config.validate();
  if (!backends.structure) fail(ErrorCode::kInvalidArgument, "no structure backend configured");
  if (!backends.agent) fail(ErrorCode::kInvalidArgument, "no agent endpoint configured");
  PipelineResult r;
  r.record_id = record_id;
  std::vector<LeafCrop> crops;
  std::vector<LeafFragment> fragments;
  std::string stage;
  const auto timed = [&](const std::string& name, const auto& fn) {
    stage = name;
    Stopwatch sw;
    fn();
    r.timings.push_back(StageTiming{name, sw.ms()});
  };
  try {
    CoarseDomTree predicted;
    timed("structure", [&] { predicted = predict_structure(screenshot, *backends.structure); });
    timed("prune", [&] { r.tree = prune_inference(predicted, config); });
    timed("crop", [&] {
      crops = crop_leaves(screenshot, r.tree);
      if (!config.cache_dir.empty()) write_crops((fs::path(config.cache_dir) / record_id).string(), crops);
    });
    timed("leaves", [&] {
      r.leaves.resize(crops.size());
      fragments.resize(crops.size());
      std::unique_ptr<ConcurrencyLimit> own_limit;
      ConcurrencyLimit* limit = backends.agent_limit;
      if (!limit) {
        own_limit = std::make_unique<ConcurrencyLimit>(config.agent_concurrency);
        limit = own_limit.get();
      }
      const auto work = [&](std::size_t i) {
        const LeafCrop& c = crops[i];
        LeafOutcome& out = r.leaves[i];
        out.path = c.path;
        out.tag = c.tag;
        out.bbox = c.bbox;
        if (is_contentless_tag(c.tag)) {
          out.ok = true;
          out.skipped = true;
          fragments[i] = LeafFragment{c.path, false, "", ""};
          return;
        }
        if (!c.region) {
          out.error = c.error;
          fragments[i] = LeafFragment::failure(c.path, c.error);
          return;
        }
        limit->acquire();
        try {
          const auto g = generate_leaf(*c.region, c.tag, *backends.agent, backends.agent_options,
                                       backends.cache, c.path);
          limit->release();
          out.ok = true;
          out.cache_hit = g.cache_hit;
          out.attempts = g.attempts;
          out.prompt_tokens = g.prompt_tokens;
          out.completion_tokens = g.completion_tokens;
          fragments[i] = LeafFragment::from(g);
        } catch (const std::exception& e) {
          limit->release();
          out.error = describe(e);
          fragments[i] = LeafFragment::failure(c.path, out.error);
        }
      };
      const std::size_t workers =
          std::min<std::size_t>(crops.size(), static_cast<std::size_t>(limit->slots()));
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < crops.size(); i = next++) work(i);
        });
      }
      for (auto& t : pool) t.join();
      for (const auto& l : r.leaves) {
        r.prompt_tokens += l.prompt_tokens;
        r.completion_tokens += l.completion_tokens;
      }
    });
    timed("assemble", [&] { r.pre_refine_html = assemble(r.tree, fragments); });
    r.html = r.pre_refine_html;
    const bool any_leaf_failed =
        std::any_of(r.leaves.begin(), r.leaves.end(), [](const LeafOutcome& l) { return !l.ok; });
    r.status = any_leaf_failed ? RunStatus::kPartial : RunStatus::kSuccess;
    if (backends.refine) {
      try {
        timed("refine", [&] {
          ConcurrencyLimit* limit = backends.agent_limit;
          if (limit) limit->acquire();
          try {
            const RefineOutcome refined =
                refine_global(r.pre_refine_html, screenshot, *backends.agent, backends.agent_options);
            if (limit) limit->release();
            r.prompt_tokens += refined.prompt_tokens;
            r.completion_tokens += refined.completion_tokens;
            r.preservation = validate_preservation(r.tree, refined.html);
            if (r.preservation->preserved) {
              r.html = refined.html;
              r.refined = true;
            }
          } catch (...) {
            if (limit) limit->release();
            throw;
          }
        });
      } catch (const std::exception& e) {
        // The assembled document stands in for a failed refinement.
        r.status = RunStatus::kPartial;
        r.failed_stage = "refine";
        r.error = describe(e);
      }
    }
  } catch (const std::exception& e) {
    r.status = RunStatus::kFailure;
    r.failed_stage = stage;
    r.error = describe(e);
  }
  if (!out_dir.empty()) write_bundle(r, config, backends, screenshot, crops, fragments, out_dir);
  return r;
}

StructureFactory oracle_factory() {
  return [](const DatasetRecord& record, const PipelineConfig& config) {
    return std::make_unique<OracleBackend>(record, config);
  };
}

std::vector<MinArea> default_min_area_set() {
  return {MinArea::of(0.10), MinArea::of(0.20), MinArea::of(0.30), MinArea::unlimited()};
}

std::vector<MaxDepth> default_max_depth_set() {
  return {MaxDepth::of(4), MaxDepth::of(5), MaxDepth::of(6), MaxDepth::unlimited()};
}

std::string grid_cell_name(const MinArea& min_area, const MaxDepth& max_depth) {
  return "min_area-" + min_area.to_string() + "_max_depth-" + max_depth.to_string();
}

std::vector<GridCell> grid_search(const std::vector<DatasetRecord>& records, const GridOptions& options,
                                  const StructureFactory& structure, PipelineBackends backends,
                                  Renderer& renderer, Embedder* embedder) {
  if (records.empty()) fail(ErrorCode::kEmptyCorpus, "grid search needs at least one record");
  if (options.min_area_set.empty() || options.max_depth_set.empty()) {
    fail(ErrorCode::kInvalidArgument, "grid sets must be non-empty");
  }
  if (options.workers < 1) fail(ErrorCode::kInvalidArgument, "grid workers must be >= 1");
  const PipelineConfig defaults;
  std::unique_ptr<ConcurrencyLimit> shared_limit;
  if (!backends.agent_limit) {
    shared_limit = std::make_unique<ConcurrencyLimit>(options.base.agent_concurrency);
    backends.agent_limit = shared_limit.get();
  }
  std::vector<RenderedPage> references;
  references.reserve(records.size());
  for (const auto& rec : records) {
    references.push_back(render_for_metrics(rec.html, renderer, options.base.viewport_width));
  }
  std::vector<GridCell> cells;
  for (const auto& ma : options.min_area_set) {
    for (const auto& md : options.max_depth_set) {
      GridCell cell;
      cell.min_area = ma;
      cell.max_depth = md;
      cell.is_default = ma == defaults.min_area && md == defaults.max_depth;
      PipelineConfig config = options.base;
      config.min_area = ma;
      config.max_depth = md;
      std::vector<std::optional<VisualScore>> per_record(records.size());
      const auto work = [&](std::size_t i) {
        try {
          auto backend = structure(records[i], config);
          PipelineBackends b = backends;
          b.structure = backend.get();
          const std::string dir = options.out_dir.empty()
                                      ? ""
                                      : (fs::path(options.out_dir) / grid_cell_name(ma, md) / records[i].id).string();
          const PipelineResult run = run_pipeline(records[i].screenshot, config, b, records[i].id, dir);
          if (run.status == RunStatus::kFailure) return;
          const RenderedPage cand = render_for_metrics(run.html, renderer, config.viewport_width);
          per_record[i] = visual_score(references[i], cand, embedder);
        } catch (const std::exception&) {
        }
      };
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      const auto workers = std::min<std::size_t>(records.size(), static_cast<std::size_t>(options.workers));
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < records.size(); i = next++) work(i);
        });
      }
      for (auto& t : pool) t.join();
      std::vector<VisualScore> scores;
      cell.records = records.size();
      for (const auto& s : per_record) {
        if (s) scores.push_back(*s);
        else ++cell.failed;
      }
      if (!scores.empty()) {
        VisualScore m;
        const auto n = static_cast<double>(scores.size());
        bool all_clip = true;
        double clip = 0;
        for (const auto& s : scores) {
          m.block_match += s.block_match / n;
          m.color += s.color / n;
          m.text += s.text / n;
          m.position += s.position / n;
          m.text_color += s.text_color / n;
          if (s.clip) clip += *s.clip / n;
          else all_clip = false;
          m.ref_blocks += s.ref_blocks;
          m.cand_blocks += s.cand_blocks;
          m.matches += s.matches;
        }
        if (all_clip) m.clip = clip;
        // Mean of per-record composites equals the composite of the means.
        update_composite(m);
        cell.mean = m;
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << std::fixed << v;
  return s.str();
}

}  // namespace

std::string grid_csv(const std::vector<GridCell>& cells) {
  std::string out = "min_area,max_depth,default,records,failed,block_match,color,text,position,text_color,clip,composite\n";
  for (const auto& c : cells) {
    out += c.min_area.to_string() + "," + c.max_depth.to_string() + "," + (c.is_default ? "1" : "0") + "," +
           std::to_string(c.records) + "," + std::to_string(c.failed);
    if (c.mean) {
      const auto& m = *c.mean;
      out += "," + fmt(m.block_match) + "," + fmt(m.color) + "," + fmt(m.text) + "," + fmt(m.position) + "," +
             fmt(m.text_color) + "," + (m.clip ? fmt(*m.clip) : "") + "," + fmt(m.composite);
    } else {
      out += ",,,,,,,";
    }
    out += "\n";
  }
  return out;
}

PrepareSummary prepare_dataset(const std::string& input_dir, const std::string& output_dir,
                               Renderer* renderer, int viewport_width) {
  const auto dirs = list_record_dirs(input_dir);
  if (dirs.empty()) fail(ErrorCode::kEmptyCorpus, "no record directories in " + input_dir);
  PrepareSummary s;
  ojson per_record = ojson::array();
  for (const auto& d : dirs) {
    ++s.records;
    ojson entry;
    entry["id"] = fs::path(d).filename().string();
    try {
      const DatasetRecord rec = load_record(d, renderer, viewport_width);
      if (rec.bboxes.page_width == 0) {
        fail(ErrorCode::kMissingFile, "no bboxes.json and no renderer configured");
      }
      const TrainingPrune p = prune_training(rec);
      s.totals += p.report;
      entry["nodes_in"] = p.report.total();
      entry["removed_small"] = p.report.removed_small;
      entry["removed_solid"] = p.report.removed_solid;
      entry["kept"] = p.report.kept;
      entry["discarded"] = p.discarded;
      if (p.discarded) {
        ++s.discarded;
      } else {
        ++s.kept;
        const fs::path out = fs::path(output_dir) / rec.id;
        write_text_file((out / "page.html").string(), rec.html);
        write_png_file((out / "screenshot.png").string(), rec.screenshot);
        write_text_file((out / "bboxes.json").string(), serialize_tree(p.tree));
      }
    } catch (const std::exception& e) {
      ++s.errors;
      entry["error"] = describe(e);
    }
    per_record.push_back(std::move(entry));
  }
  ojson j;
  j["records"] = s.records;
  j["kept"] = s.kept;
  j["discarded"] = s.discarded;
  j["errors"] = s.errors;
  j["removed_small"] = s.totals.removed_small;
  j["removed_solid"] = s.totals.removed_solid;
  j["per_record"] = std::move(per_record);
  s.json = j.dump(2) + "\n";
  write_text_file((fs::path(output_dir) / "summary.json").string(), s.json);
  return s;
}

EvalTable evaluate(const std::vector<EvalPair>& pairs, Renderer& renderer, Embedder* embedder,
                   int viewport_width) {
  if (pairs.empty()) fail(ErrorCode::kEmptyCorpus, "evaluation needs at least one pair");
  EvalTable t;
  std::vector<double> ssim_v, bm, color, text, pos, fg, comp, clip_sim, clip;
  for (const auto& p : pairs) {
    EvalRow row;
    row.reference = p.reference_name;
    row.candidate = p.candidate_name;
    try {
      row.report = evaluate_pair(p.reference_html, p.candidate_html, renderer, embedder, viewport_width);
      row.ok = true;
      const auto& v = row.report.visual;
      ssim_v.push_back(row.report.ssim);
      bm.push_back(v.block_match);
      color.push_back(v.color);
      text.push_back(v.text);
      pos.push_back(v.position);
      fg.push_back(v.text_color);
      comp.push_back(v.composite);
      if (row.report.clip_sim) clip_sim.push_back(*row.report.clip_sim);
      if (v.clip) clip.push_back(*v.clip);
    } catch (const std::exception& e) {
      row.error = describe(e);
      ++t.failed;
    }
    t.rows.push_back(std::move(row));
  }
  if (!ssim_v.empty()) {
    t.ssim = mean_std(ssim_v);
    t.block_match = mean_std(bm);
    t.color = mean_std(color);
    t.text = mean_std(text);
    t.position = mean_std(pos);
    t.text_color = mean_std(fg);
    t.composite = mean_std(comp);
    if (!clip_sim.empty() && clip_sim.size() == ssim_v.size()) {
      t.clip_sim = mean_std(clip_sim);
      t.clip = mean_std(clip);
    }
  }
  return t;
}

namespace {

ojson ms_json(const MeanStd& m) { return ojson{{"mean", m.mean}, {"stddev", m.stddev}}; }

}  // namespace

std::string eval_json(const EvalTable& t) {
  ojson rows = ojson::array();
  for (const auto& r : t.rows) {
    ojson j;
    j["reference"] = r.reference;
    j["candidate"] = r.candidate;
    j["ok"] = r.ok;
    if (!r.ok) {
      j["error"] = r.error;
    } else {
      const auto& v = r.report.visual;
      j["ssim"] = r.report.ssim;
      j["clip_sim"] = r.report.clip_sim ? ojson(*r.report.clip_sim) : ojson(nullptr);
      j["visual"] = {{"block_match", v.block_match}, {"color", v.color},
                     {"text", v.text},               {"position", v.position},
                     {"text_color", v.text_color},   {"clip", v.clip ? ojson(*v.clip) : ojson(nullptr)},
                     {"composite", v.composite}};
    }
    rows.push_back(std::move(j));
  }
  ojson agg;
  agg["pairs"] = t.rows.size();
  agg["failed"] = t.failed;
  agg["ssim"] = ms_json(t.ssim);
  agg["clip_sim"] = t.clip_sim ? ms_json(*t.clip_sim) : ojson(nullptr);
  agg["block_match"] = ms_json(t.block_match);
  agg["color"] = ms_json(t.color);
  agg["text"] = ms_json(t.text);
  agg["position"] = ms_json(t.position);
  agg["text_color"] = ms_json(t.text_color);
  agg["clip"] = t.clip ? ms_json(*t.clip) : ojson(nullptr);
  agg["composite"] = ms_json(t.composite);
  ojson j;
  j["rows"] = std::move(rows);
  j["aggregate"] = std::move(agg);
  return j.dump(2) + "\n";
}

std::string eval_csv(const EvalTable& t) {
  std::string out = "reference,candidate,ok,ssim,clip_sim,block_match,color,text,position,text_color,clip,composite\n";
  const auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  for (const auto& r : t.rows) {
    out += r.reference + "," + r.candidate + "," + (r.ok ? "1" : "0");
    if (r.ok) {
      const auto& v = r.report.visual;
      out += "," + fmt(r.report.ssim) + "," + opt(r.report.clip_sim) + "," + fmt(v.block_match) + "," +
             fmt(v.color) + "," + fmt(v.text) + "," + fmt(v.position) + "," + fmt(v.text_color) + "," +
             opt(v.clip) + "," + fmt(v.composite);
    } else {
      out += ",,,,,,,,,";
    }
    out += "\n";
  }
  const auto pm = [](const MeanStd& m) { return fmt(m.mean) + " ± " + fmt(m.stddev); };
  out += "mean±std,," + std::to_string(t.rows.size() - t.failed) + "," + pm(t.ssim) + "," +
         (t.clip_sim ? pm(*t.clip_sim) : "") + "," + pm(t.block_match) + "," + pm(t.color) + "," + pm(t.text) +
         "," + pm(t.position) + "," + pm(t.text_color) + "," + (t.clip ? pm(*t.clip) : "") + "," +
         pm(t.composite) + "\n";
  return out;
}

std::string corpus_stats_json(const CorpusStats& s) {
  ojson j;
  j["records"] = s.records;
  j["avg_len_tokens"] = ms_json(s.len_tokens);
  j["avg_tags"] = ms_json(s.tags);
  j["avg_depth"] = ms_json(s.depth);
  j["avg_unique_tags"] = ms_json(s.unique_tags);
  return j.dump(2) + "\n";
}

}  // namespace hiergen
