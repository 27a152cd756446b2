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


#ifndef HIERGEN_HIERGEN_H_
#define HIERGEN_HIERGEN_H_

#include <stddef.h>

#if defined(HIERGEN_BUILDING)
#define HG_API __attribute__((visibility("default")))
#else
#define HG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every function returning int uses these. */
#define HG_OK 0
#define HG_ERR_MALFORMED_JSON 1
#define HG_ERR_SCHEMA_VIOLATION 2
#define HG_ERR_INVARIANT_VIOLATION 3
#define HG_ERR_MISSING_FILE 4
#define HG_ERR_IMAGE_DECODE 5
#define HG_ERR_RENDERER_UNAVAILABLE 6
#define HG_ERR_RENDER_TIMEOUT 7
#define HG_ERR_NAVIGATION 8
#define HG_ERR_EMPTY_CORPUS 9
#define HG_ERR_DIMENSION_MISMATCH 10
#define HG_ERR_EMPTY_REGION 11
#define HG_ERR_BACKEND_UNAVAILABLE 12
#define HG_ERR_PREDICTION_UNPARSEABLE 13
#define HG_ERR_UNREPAIRABLE 14
#define HG_ERR_ENDPOINT 15
#define HG_ERR_EMPTY_COMPLETION 16
#define HG_ERR_NO_CODE_FOUND 17
#define HG_ERR_DOCUMENT_TOO_LARGE 18
#define HG_ERR_MISSING_FRAGMENT 19
#define HG_ERR_DUPLICATE_LEAF_PATH 20
#define HG_ERR_PARSE 21
#define HG_ERR_MARKER_CORRUPTION 22
#define HG_ERR_TOO_SMALL 23
#define HG_ERR_EMBEDDER_UNAVAILABLE 24
#define HG_ERR_INVALID_ARGUMENT 25
#define HG_ERR_IO 26
#define HG_ERR_INTERNAL 99

/* Run outcomes, also the CLI exit codes. */
#define HG_RUN_SUCCESS 0
#define HG_RUN_PARTIAL 1
#define HG_RUN_FAILURE 2

typedef struct hg_config hg_config;
typedef struct hg_session hg_session;
typedef struct hg_run hg_run;
typedef struct hg_server hg_server;

HG_API const char* hg_version(void);
HG_API const char* hg_status_name(int status);
/* Message of the last failed call on this thread; "" when none. */
HG_API const char* hg_last_error(void);
/* Releases strings returned through char** out-parameters. */
HG_API void hg_free(char* p);

/* Settings: `key = value` lines, optional [section] headers. */
HG_API int hg_config_new(hg_config** out);
HG_API int hg_config_load(const char* path, hg_config** out);
HG_API int hg_config_set(hg_config* config, const char* key, const char* value);
/* Canonical dump of all settings (sorted keys). */
HG_API int hg_config_dump(const hg_config* config, char** out);
HG_API void hg_config_free(hg_config* config);

/* A session owns the backends named by a configuration. The config may be
 * freed afterwards. */
HG_API int hg_session_new(const hg_config* config, hg_session** out);
HG_API void hg_session_free(hg_session* session);

/* Applies training pruning to each record directory under `input_dir`.
 * `summary_json` (optional) receives summary.json. */
HG_API int hg_prepare(hg_session* session, const char* input_dir, const char* output_dir,
                      char** summary_json);

/* Runs the pipeline on a record directory (page.html + screenshot.png or a
 * renderable page.html). With `out_dir` set, the audit bundle is written. */
HG_API int hg_run_record(hg_session* session, const char* record_dir, const char* out_dir,
                         hg_run** out);
/* Runs on a bare screenshot; needs a replay or remote structure backend. */
HG_API int hg_run_screenshot(hg_session* session, const char* png_path, const char* record_id,
                             const char* out_dir, hg_run** out);
HG_API int hg_run_status(const hg_run* run);
HG_API const char* hg_run_html(const hg_run* run);
HG_API const char* hg_run_error(const hg_run* run);
HG_API const char* hg_run_failed_stage(const hg_run* run);
HG_API size_t hg_run_leaf_count(const hg_run* run);
HG_API size_t hg_run_failed_leaf_count(const hg_run* run);
/* Contents of status.json for this run. */
HG_API const char* hg_run_summary_json(const hg_run* run);
HG_API void hg_run_free(hg_run* run);

/* Grid search over the record directories under `records_dir`. */
HG_API int hg_grid(hg_session* session, const char* records_dir, const char* out_dir, char** csv);

/* Scores candidate documents against reference documents, paired by index. */
HG_API int hg_evaluate(hg_session* session, const char* const* reference_paths,
                       const char* const* candidate_paths, size_t count, char** json, char** csv);

HG_API int hg_stats(hg_session* session, const char* records_dir, char** json);

/* SSIM between two PNG files. */
HG_API int hg_ssim_png(const char* a_path, const char* b_path, double* out);

/* Renders an HTML file with the session renderer, writing a PNG and the
 * element tree JSON. */
HG_API int hg_render_file(hg_session* session, const char* html_path, int viewport_width,
                          const char* png_path, char** tree_json);

/* Serves the built-in renderer: POST /render, GET /health. Port 0 picks a
 * free port; the bound port is returned in `bound_port`. */
HG_API int hg_server_start(const char* host, int port, hg_server** out, int* bound_port);
HG_API void hg_server_stop(hg_server* server);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* HIERGEN_HIERGEN_H_ */
