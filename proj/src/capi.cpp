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


#include "hiergen/hiergen.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>

#include "hiergen/agent.hpp"
#include "hiergen/config.hpp"
#include "hiergen/dataset.hpp"
#include "hiergen/embed.hpp"
#include "hiergen/error.hpp"
#include "hiergen/harness.hpp"
#include "hiergen/http.hpp"
#include "hiergen/metrics.hpp"
#include "hiergen/render.hpp"
#include "hiergen/structure.hpp"
#include "hiergen/util.hpp"

namespace fs = std::filesystem;
using namespace hiergen;

struct hg_config {
  Settings settings;
};

struct hg_session {
  Settings settings;
  PipelineConfig config;
  std::string structure_kind;
  std::unique_ptr<StructureBackend> shared_structure;
  std::unique_ptr<ChatEndpoint> agent;
  std::unique_ptr<FragmentCache> cache;
  std::unique_ptr<ConcurrencyLimit> limit;
  std::unique_ptr<Renderer> renderer;
  std::unique_ptr<Embedder> embedder;
  AgentOptions options;
  bool refine = true;
  std::vector<MinArea> grid_min_area;
  std::vector<MaxDepth> grid_max_depth;
  int grid_workers = 1;
};

struct hg_run {
  PipelineResult result;
  std::string summary;
  std::size_t failed_leaves = 0;
};

struct hg_server {
  BuiltinRenderer renderer;
  http::Server server;
};

namespace {

thread_local std::string g_last_error;

int record_error(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return HG_OK;
  } catch (const Error& e) {
    return record_error(static_cast<int>(e.code()), e.what());
  } catch (const std::exception& e) {
    return record_error(HG_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

void give(char** out, const std::string& s) {
  if (out) *out = dup_string(s);
}

bool truthy(const std::string& v) { return v == "1" || v == "true" || v == "yes" || v == "on"; }

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::chrono::milliseconds ms_setting(const Settings& s, const std::string& key, int fallback) {
  return std::chrono::milliseconds(s.get_int(key, fallback));
}

void build_session(hg_session& s) {
  const Settings& cfg = s.settings;
  s.config = pipeline_config_from(cfg);
  s.config.validate();

  const std::string renderer = cfg.get_or("renderer.backend", "builtin");
  if (renderer == "builtin") {
    s.renderer = std::make_unique<BuiltinRenderer>();
  } else if (renderer == "http") {
    s.renderer = std::make_unique<HttpRenderer>(
        HttpEndpointConfig{cfg.get_or("renderer.url", ""), ms_setting(cfg, "renderer.timeout_ms", 30000), ""});
  } else {
    fail(ErrorCode::kInvalidArgument, "renderer.backend must be builtin or http");
  }

  std::string embed_url = cfg.get_or("embedder.url", "");
  if (embed_url.empty()) {
    if (const char* v = std::getenv("HIERGEN_EMBED_URL")) embed_url = v;
  }
  if (!embed_url.empty()) {
    s.embedder = std::make_unique<HttpEmbedder>(
        HttpEndpointConfig{embed_url, ms_setting(cfg, "embedder.timeout_ms", 30000), ""});
  }

  s.structure_kind = cfg.get_or("structure.backend", "oracle");
  if (s.structure_kind == "replay") {
    s.shared_structure = std::make_unique<ReplayBackend>(cfg.get_or("structure.dir", ""));
  } else if (s.structure_kind == "remote") {
    s.shared_structure = std::make_unique<RemoteBackend>(
        HttpEndpointConfig{cfg.get_or("structure.url", ""), ms_setting(cfg, "structure.timeout_ms", 60000), ""},
        cfg.get_int("structure.max_in_flight", 4));
  } else if (s.structure_kind != "oracle") {
    fail(ErrorCode::kInvalidArgument, "structure.backend must be oracle, replay or remote");
  }

  if (const auto p = cfg.get("agent.leaf_template")) s.options.leaf_template = PromptTemplate::from_file(*p);
  if (const auto p = cfg.get("agent.refine_template")) {
    s.options.refine_template = PromptTemplate::from_file(*p);
  }
  s.options.temperature = cfg.get_double("agent.temperature", 0.0);
  s.options.max_tokens = cfg.get_int("agent.max_tokens", 4096);
  const int budget = cfg.get_int("agent.document_budget", 200000);
  require(budget > 0, "agent.document_budget must be positive");
  s.options.document_budget = static_cast<std::size_t>(budget);
  s.refine = truthy(cfg.get_or("agent.refine", "true"));
  if (const auto dir = cfg.get("agent.fragment_cache")) s.cache = std::make_unique<FragmentCache>(*dir);
  s.limit = std::make_unique<ConcurrencyLimit>(s.config.agent_concurrency);

  s.grid_min_area = default_min_area_set();
  s.grid_max_depth = default_max_depth_set();
  if (const auto v = cfg.get("grid.min_area")) {
    s.grid_min_area.clear();
    for (const auto& item : split_list(*v)) s.grid_min_area.push_back(parse_min_area(item));
  }
  if (const auto v = cfg.get("grid.max_depth")) {
    s.grid_max_depth.clear();
    for (const auto& item : split_list(*v)) s.grid_max_depth.push_back(parse_max_depth(item));
  }
  s.grid_workers = cfg.get_int("grid.workers", 1);
  require(s.grid_workers >= 1, "grid.workers must be >= 1");
}

ChatEndpoint& agent_of(hg_session& s) {
  if (s.agent) return *s.agent;
  const Settings& cfg = s.settings;
  const std::string kind = cfg.get_or("agent.backend", "http");
  if (kind == "replay") {
    const auto dir = cfg.get("agent.dir");
    require(dir.has_value(), "agent.backend = replay needs agent.dir");
    s.agent = std::make_unique<ReplayChatEndpoint>(*dir);
  } else if (kind == "http") {
    ChatEndpointConfig c;
    c.url = cfg.get_or("agent.url", "");
    c.model = cfg.get_or("agent.model", "");
    c.timeout = ms_setting(cfg, "agent.timeout_ms", 120000);
    c.retries = cfg.get_int("agent.retries", 3);
    c.backoff = ms_setting(cfg, "agent.backoff_ms", 500);
    s.agent = std::make_unique<HttpChatEndpoint>(chat_config_from_env(c));
  } else {
    fail(ErrorCode::kInvalidArgument, "agent.backend must be http or replay");
  }
  return *s.agent;
}

PipelineBackends backends_of(hg_session& s) {
  PipelineBackends b;
  b.structure = s.shared_structure.get();
  b.agent = &agent_of(s);
  b.cache = s.cache.get();
  b.agent_limit = s.limit.get();
  b.agent_options = s.options;
  b.refine = s.refine;
  return b;
}

hg_run* wrap_run(PipelineResult result, const std::string& out_dir) {
  auto run = std::make_unique<hg_run>();
  run->result = std::move(result);
  for (const auto& l : run->result.leaves) {
    if (!l.ok) ++run->failed_leaves;
  }
  if (!out_dir.empty() && fs::is_regular_file(fs::path(out_dir) / "status.json")) {
    run->summary = read_text_file((fs::path(out_dir) / "status.json").string());
  } else {
    nlohmann::ordered_json j;
    j["status"] = run_status_name(run->result.status);
    j["failed_stage"] = run->result.failed_stage;
    j["error"] = run->result.error;
    j["refined"] = run->result.refined;
    j["leaves"] = run->result.leaves.size();
    j["failed_leaves"] = run->failed_leaves;
    run->summary = j.dump(2) + "\n";
  }
  return run.release();
}

std::vector<DatasetRecord> load_records(hg_session& s, const std::string& dir) {
  std::vector<DatasetRecord> records;
  for (const auto& d : list_record_dirs(dir)) {
    records.push_back(load_record(d, s.renderer.get(), s.config.viewport_width));
  }
  if (records.empty()) fail(ErrorCode::kEmptyCorpus, "no record directories in " + dir);
  return records;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

}  // namespace

extern "C" {

const char* hg_version(void) { return "0.1.0"; }

const char* hg_status_name(int status) {
  if (status == HG_OK) return "ok";
  if (status == HG_ERR_INTERNAL) return "internal";
  if (status >= 1 && status <= HG_ERR_IO) {
    static thread_local std::string name;
    name = std::string(error_code_name(static_cast<ErrorCode>(status)));
    return name.c_str();
  }
  return "unknown";
}

const char* hg_last_error(void) { return g_last_error.c_str(); }

void hg_free(char* p) { std::free(p); }

int hg_config_new(hg_config** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new hg_config();
  });
}

int hg_config_load(const char* path, hg_config** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto c = std::make_unique<hg_config>();
    c->settings = Settings::load_file(path);
    *out = c.release();
  });
}

int hg_config_set(hg_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config && key && value, "null argument");
    require(*key != '\0', "empty key");
    config->settings.set(key, value);
  });
}

int hg_config_dump(const hg_config* config, char** out) {
  return guarded([&] {
    require(config && out, "null argument");
    std::string text;
    for (const auto& [k, v] : config->settings.entries()) text += k + " = " + v + "\n";
    give(out, text);
  });
}

void hg_config_free(hg_config* config) { delete config; }

int hg_session_new(const hg_config* config, hg_session** out) {
  return guarded([&] {
    require(config && out, "null argument");
    auto s = std::make_unique<hg_session>();
    s->settings = config->settings;
    build_session(*s);
    *out = s.release();
  });
}

void hg_session_free(hg_session* session) { delete session; }

int hg_prepare(hg_session* session, const char* input_dir, const char* output_dir, char** summary_json) {
  return guarded([&] {
    require(session && input_dir && output_dir, "null argument");
    const auto summary =
        prepare_dataset(input_dir, output_dir, session->renderer.get(), session->config.viewport_width);
    give(summary_json, summary.json);
  });
}

int hg_run_record(hg_session* session, const char* record_dir, const char* out_dir, hg_run** out) {
  return guarded([&] {
    require(session && record_dir && out, "null argument");
    const DatasetRecord record = load_record(record_dir, session->renderer.get(), session->config.viewport_width);
    PipelineBackends b = backends_of(*session);
    std::unique_ptr<StructureBackend> oracle;
    if (session->structure_kind == "oracle") {
      oracle = std::make_unique<OracleBackend>(record, session->config);
      b.structure = oracle.get();
    }
    const std::string dir = out_dir ? out_dir : "";
    *out = wrap_run(run_pipeline(record.screenshot, session->config, b, record.id, dir), dir);
  });
}

int hg_run_screenshot(hg_session* session, const char* png_path, const char* record_id, const char* out_dir,
                      hg_run** out) {
  return guarded([&] {
    require(session && png_path && out, "null argument");
    if (session->structure_kind == "oracle") {
      fail(ErrorCode::kInvalidArgument, "the oracle backend needs a record directory, not a screenshot");
    }
    const Image screenshot = read_png_file(png_path);
    const std::string id = record_id && *record_id ? record_id : stem_of(png_path);
    const std::string dir = out_dir ? out_dir : "";
    *out = wrap_run(run_pipeline(screenshot, session->config, backends_of(*session), id, dir), dir);
  });
}

int hg_run_status(const hg_run* run) {
  return run ? static_cast<int>(run->result.status) : HG_RUN_FAILURE;
}

const char* hg_run_html(const hg_run* run) { return run ? run->result.html.c_str() : ""; }

const char* hg_run_error(const hg_run* run) { return run ? run->result.error.c_str() : ""; }

const char* hg_run_failed_stage(const hg_run* run) { return run ? run->result.failed_stage.c_str() : ""; }

size_t hg_run_leaf_count(const hg_run* run) { return run ? run->result.leaves.size() : 0; }

size_t hg_run_failed_leaf_count(const hg_run* run) { return run ? run->failed_leaves : 0; }

const char* hg_run_summary_json(const hg_run* run) { return run ? run->summary.c_str() : ""; }

void hg_run_free(hg_run* run) { delete run; }

int hg_grid(hg_session* session, const char* records_dir, const char* out_dir, char** csv) {
  return guarded([&] {
    require(session && records_dir, "null argument");
    const auto records = load_records(*session, records_dir);
    GridOptions options;
    options.min_area_set = session->grid_min_area;
    options.max_depth_set = session->grid_max_depth;
    options.base = session->config;
    options.workers = session->grid_workers;
    const std::string dir = out_dir ? out_dir : "";
    if (!dir.empty()) options.out_dir = (fs::path(dir) / "runs").string();
    StructureFactory factory;
    if (session->structure_kind == "oracle") {
      factory = oracle_factory();
    } else {
      StructureBackend* shared = session->shared_structure.get();
      factory = [shared](const DatasetRecord&, const PipelineConfig&) -> std::unique_ptr<StructureBackend> {
        struct Borrowed final : StructureBackend {
          explicit Borrowed(StructureBackend* b) : inner(b) {}
          CoarseDomTree predict(const Image& s) override { return inner->predict(s); }
          std::string identifier() const override { return inner->identifier(); }
          StructureBackend* inner;
        };
        return std::make_unique<Borrowed>(shared);
      };
    }
    const auto cells =
        grid_search(records, options, factory, backends_of(*session), *session->renderer, session->embedder.get());
    const std::string text = grid_csv(cells);
    if (!dir.empty()) write_text_file((fs::path(dir) / "grid.csv").string(), text);
    give(csv, text);
  });
}

int hg_evaluate(hg_session* session, const char* const* reference_paths, const char* const* candidate_paths,
                size_t count, char** json, char** csv) {
  return guarded([&] {
    require(session && (count == 0 || (reference_paths && candidate_paths)), "null argument");
    std::vector<EvalPair> pairs;
    for (size_t i = 0; i < count; ++i) {
      require(reference_paths[i] && candidate_paths[i], "null path");
      EvalPair p;
      p.reference_html = read_text_file(reference_paths[i]);
      p.candidate_html = read_text_file(candidate_paths[i]);
      p.reference_name = reference_paths[i];
      p.candidate_name = candidate_paths[i];
      pairs.push_back(std::move(p));
    }
    const auto table =
        evaluate(pairs, *session->renderer, session->embedder.get(), session->config.viewport_width);
    give(json, eval_json(table));
    give(csv, eval_csv(table));
  });
}

int hg_stats(hg_session* session, const char* records_dir, char** json) {
  return guarded([&] {
    require(session && records_dir && json, "null argument");
    give(json, corpus_stats_json(corpus_stats(load_records(*session, records_dir))));
  });
}

int hg_ssim_png(const char* a_path, const char* b_path, double* out) {
  return guarded([&] {
    require(a_path && b_path && out, "null argument");
    *out = ssim(read_png_file(a_path), read_png_file(b_path));
  });
}

int hg_render_file(hg_session* session, const char* html_path, int viewport_width, const char* png_path,
                   char** tree_json) {
  return guarded([&] {
    require(session && html_path, "null argument");
    const int vw = viewport_width > 0 ? viewport_width : session->config.viewport_width;
    const RenderResult r = render_page(read_text_file(html_path), vw, *session->renderer);
    if (png_path) write_png_file(png_path, r.screenshot);
    give(tree_json, serialize_tree(r.element_tree));
  });
}

int hg_server_start(const char* host, int port, hg_server** out, int* bound_port) {
  return guarded([&] {
    require(host && out, "null argument");
    auto srv = std::make_unique<hg_server>();
    BuiltinRenderer* renderer = &srv->renderer;
    srv->server.post("/render", [renderer](const std::string& body) {
      http::Reply reply;
      try {
        const auto j = nlohmann::json::parse(body);
        if (!j.is_object() || !j.contains("html") || !j["html"].is_string()) {
          fail(ErrorCode::kSchemaViolation, "request needs an html string");
        }
        const int vw = j.value("viewport_width", 1280);
        if (vw <= 0) fail(ErrorCode::kInvalidArgument, "viewport_width must be positive");
        reply.body = render_response_json(renderer->render(j["html"].get<std::string>(), vw));
      } catch (const std::exception& e) {
        reply.status = 400;
        reply.body = nlohmann::json{{"error", e.what()}}.dump();
      }
      return reply;
    });
    srv->server.get("/health", [renderer](const std::string&) {
      return http::Reply{200, nlohmann::json{{"renderer", renderer->identifier()}}.dump(), "application/json"};
    });
    const int p = srv->server.start(host, port);
    if (bound_port) *bound_port = p;
    *out = srv.release();
  });
}

void hg_server_stop(hg_server* server) {
  if (!server) return;
  server->server.stop();
  delete server;
}

}  // extern "C"
