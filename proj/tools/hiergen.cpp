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
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "hiergen/hiergen.h"

namespace {

constexpr int kExitFailure = HG_RUN_FAILURE;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

int report(int status) {
  std::cerr << "hiergen: " << hg_status_name(status) << ": " << hg_last_error() << "\n";
  return kExitFailure;
}

struct Owned {
  char* p = nullptr;
  ~Owned() { hg_free(p); }
  std::string str() const { return p ? p : ""; }
};

bool write_file(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

struct Session {
  hg_config* config = nullptr;
  hg_session* session = nullptr;
  ~Session() {
    hg_session_free(session);
    hg_config_free(config);
  }
};

int open_session(const std::string& config_path, const std::vector<std::string>& overrides, Session& s) {
  int rc = config_path.empty() ? hg_config_new(&s.config) : hg_config_load(config_path.c_str(), &s.config);
  if (rc != HG_OK) return rc;
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "hiergen: --set expects key=value, got '" << kv << "'\n";
      return HG_ERR_INVALID_ARGUMENT;
    }
    rc = hg_config_set(s.config, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (rc != HG_OK) return rc;
  }
  return hg_session_new(s.config, &s.session);
}

// Column `failed` of the grid CSV.
bool grid_has_failures(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string field;
    for (int i = 0; i < 5 && std::getline(row, field, ','); ++i) {
    }
    if (!field.empty() && field != "0") return true;
  }
  return false;
}

std::vector<std::string> html_files(const std::string& dir) {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".html") out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Screenshot-to-HTML pipeline and evaluation harness"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "Settings file (key = value)")->check(CLI::ExistingFile);
  app.add_option("-s,--set", overrides, "Override a setting, key=value");
  app.add_flag_callback("--version", [] {
    std::cout << hg_version() << "\n";
    throw CLI::Success();
  });

  auto* prepare = app.add_subcommand("prepare", "Apply training pruning to a corpus");
  std::string prep_in, prep_out;
  prepare->add_option("input", prep_in, "Directory of record directories")->required();
  prepare->add_option("output", prep_out, "Output directory")->required();

  auto* run = app.add_subcommand("run", "Generate HTML for one record or screenshot");
  std::string run_record, run_png, run_id, run_out;
  run->add_option("record", run_record, "Record directory");
  run->add_option("--screenshot", run_png, "PNG screenshot (replay or remote structure backend)");
  run->add_option("--id", run_id, "Record id for --screenshot");
  run->add_option("-o,--out", run_out, "Audit bundle directory");

  auto* grid = app.add_subcommand("grid", "Grid search over pruning thresholds");
  std::string grid_in, grid_out;
  grid->add_option("records", grid_in, "Directory of record directories")->required();
  grid->add_option("-o,--out", grid_out, "Output directory (grid.csv and run bundles)");

  auto* eval = app.add_subcommand("eval", "Score candidate pages against references");
  std::vector<std::string> refs, cands;
  std::string ref_dir, cand_dir, eval_json, eval_csv;
  eval->add_option("--ref", refs, "Reference HTML file (repeatable)");
  eval->add_option("--cand", cands, "Candidate HTML file (repeatable, paired with --ref)");
  eval->add_option("--ref-dir", ref_dir, "Directory of reference *.html");
  eval->add_option("--cand-dir", cand_dir, "Directory of candidate *.html with matching names");
  eval->add_option("--json", eval_json, "Write the JSON report here");
  eval->add_option("--csv", eval_csv, "Write the CSV report here");

  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  std::string stats_in;
  stats->add_option("records", stats_in, "Directory of record directories")->required();

  auto* render = app.add_subcommand("render", "Render an HTML file");
  std::string render_in, render_png, render_tree;
  int render_vw = 0;
  render->add_option("html", render_in, "HTML file")->required()->check(CLI::ExistingFile);
  render->add_option("--png", render_png, "Screenshot output");
  render->add_option("--tree", render_tree, "Element tree JSON output");
  render->add_option("-w,--width", render_vw, "Viewport width");

  auto* server = app.add_subcommand("render-server", "Serve the built-in renderer over HTTP");
  std::string host = "127.0.0.1";
  int port = 8088;
  server->add_option("--host", host, "Bind address");
  server->add_option("--port", port, "Port (0 picks a free one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitFailure;
  }

  if (server->parsed()) {
    hg_server* srv = nullptr;
    int bound = 0;
    const int rc = hg_server_start(host.c_str(), port, &srv, &bound);
    if (rc != HG_OK) return report(rc);
    std::cout << "listening on http://" << host << ":" << bound << std::endl;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    hg_server_stop(srv);
    return 0;
  }

  Session s;
  if (const int rc = open_session(config_path, overrides, s); rc != HG_OK) return report(rc);

  if (prepare->parsed()) {
    Owned summary;
    const int rc = hg_prepare(s.session, prep_in.c_str(), prep_out.c_str(), &summary.p);
    if (rc != HG_OK) return report(rc);
    std::cout << summary.str();
    return 0;
  }

  if (run->parsed()) {
    if (run_record.empty() == run_png.empty()) {
      std::cerr << "hiergen: give either a record directory or --screenshot\n";
      return kExitFailure;
    }
    hg_run* result = nullptr;
    const char* out = run_out.empty() ? nullptr : run_out.c_str();
    const int rc = run_png.empty() ? hg_run_record(s.session, run_record.c_str(), out, &result)
                                   : hg_run_screenshot(s.session, run_png.c_str(), run_id.c_str(), out, &result);
    if (rc != HG_OK) return report(rc);
    const int status = hg_run_status(result);
    if (status == HG_RUN_FAILURE) {
      std::cerr << "hiergen: stage " << hg_run_failed_stage(result) << " failed: " << hg_run_error(result) << "\n";
    }
    if (run_out.empty()) std::cout << hg_run_html(result);
    else std::cout << hg_run_summary_json(result);
    hg_run_free(result);
    return status;
  }

  if (grid->parsed()) {
    Owned csv;
    const int rc = hg_grid(s.session, grid_in.c_str(), grid_out.empty() ? nullptr : grid_out.c_str(), &csv.p);
    if (rc != HG_OK) return report(rc);
    std::cout << csv.str();
    return grid_has_failures(csv.str()) ? HG_RUN_PARTIAL : HG_RUN_SUCCESS;
  }

  if (eval->parsed()) {
    if (!ref_dir.empty() || !cand_dir.empty()) {
      if (ref_dir.empty() || cand_dir.empty()) {
        std::cerr << "hiergen: --ref-dir and --cand-dir go together\n";
        return kExitFailure;
      }
      for (const auto& name : html_files(ref_dir)) {
        refs.push_back((std::filesystem::path(ref_dir) / name).string());
        cands.push_back((std::filesystem::path(cand_dir) / name).string());
      }
    }
    if (refs.size() != cands.size()) {
      std::cerr << "hiergen: every --ref needs a --cand\n";
      return kExitFailure;
    }
    std::vector<const char*> rp, cp;
    for (const auto& r : refs) rp.push_back(r.c_str());
    for (const auto& c : cands) cp.push_back(c.c_str());
    Owned json, csv;
    const int rc = hg_evaluate(s.session, rp.data(), cp.data(), rp.size(), &json.p, &csv.p);
    if (rc != HG_OK) return report(rc);
    if (!eval_json.empty() && !write_file(eval_json, json.str())) return report(HG_ERR_IO);
    if (!eval_csv.empty() && !write_file(eval_csv, csv.str())) return report(HG_ERR_IO);
    std::cout << json.str();
    return json.str().find("\"ok\": false") != std::string::npos ? HG_RUN_PARTIAL : HG_RUN_SUCCESS;
  }

  if (stats->parsed()) {
    Owned json;
    const int rc = hg_stats(s.session, stats_in.c_str(), &json.p);
    if (rc != HG_OK) return report(rc);
    std::cout << json.str();
    return 0;
  }

  if (render->parsed()) {
    Owned tree;
    const int rc = hg_render_file(s.session, render_in.c_str(), render_vw,
                                  render_png.empty() ? nullptr : render_png.c_str(), &tree.p);
    if (rc != HG_OK) return report(rc);
    if (render_tree.empty()) std::cout << tree.str() << "\n";
    else if (!write_file(render_tree, tree.str())) return report(HG_ERR_IO);
    return 0;
  }
  return kExitFailure;
}
