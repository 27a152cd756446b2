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

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

#include "hiergen/image.hpp"
#include "hiergen/prompts.hpp"
#include "hiergen/tree.hpp"

namespace hiergen {

struct GeneratedFragment {
  NodePath leaf_path;
  std::string html;
  std::string parent_tag;
  int attempts = 0;
  bool cache_hit = false;
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct AgentRequest {
  Image image;
  std::string instruction;
  double temperature = 0.0;
  int max_tokens = 4096;
};

struct ChatCompletion {
  std::string text;
  int attempts = 1;
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

/// Chat-completions request body. The model key is omitted when empty.
std::string chat_request_json(const AgentRequest& request, const std::string& model);

/// sha256 of chat_request_json(request, "").
std::string request_hash(const AgentRequest& request);

class ChatEndpoint {
 public:
  virtual ~ChatEndpoint() = default;
  virtual ChatCompletion complete(const AgentRequest& request) = 0;
  virtual std::string identifier() const = 0;
};

struct ChatEndpointConfig {
  std::string url;
  std::string api_key;
  std::string model;
  std::chrono::milliseconds timeout{120000};
  int retries = 3;
  std::chrono::milliseconds backoff{500};  // doubled per retry
};

/// Fills url and key from HIERGEN_AGENT_URL / HIERGEN_AGENT_KEY when unset.
ChatEndpointConfig chat_config_from_env(ChatEndpointConfig base = {});

/// OpenAI-style chat-completions client with retry on transport errors,
/// 429 and 5xx.
class HttpChatEndpoint final : public ChatEndpoint {
 public:
  explicit HttpChatEndpoint(ChatEndpointConfig config);
  ChatCompletion complete(const AgentRequest& request) override;
  std::string identifier() const override;

 private:
  ChatEndpointConfig config_;
};

/// Recorded completions stored as `{request_hash}.txt`.
class ReplayChatEndpoint final : public ChatEndpoint {
 public:
  explicit ReplayChatEndpoint(std::string dir);
  ChatCompletion complete(const AgentRequest& request) override;
  std::string identifier() const override;

  void store(const AgentRequest& request, std::string_view completion) const;

 private:
  std::string dir_;
};

/// Content-addressed fragment cache (`{key}.html`); safe for concurrent use.
class FragmentCache {
 public:
  explicit FragmentCache(std::string dir);
  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, std::string_view html) const;

 private:
  std::string dir_;
};

struct AgentOptions {
  PromptTemplate leaf_template = builtin_leaf_template();
  PromptTemplate refine_template = builtin_refine_template();
  double temperature = 0.0;
  int max_tokens = 4096;
  std::size_t document_budget = 200000;  // bytes of document text per refinement
};

AgentRequest leaf_request(const Image& region, const std::string& parent_tag,
                          const AgentOptions& options);
AgentRequest refine_request(std::string_view document, const Image& design,
                            const AgentOptions& options);

std::string leaf_cache_key(const Image& region, const std::string& parent_tag,
                           const AgentOptions& options);

GeneratedFragment generate_leaf(const Image& region, const std::string& parent_tag,
                                ChatEndpoint& endpoint, const AgentOptions& options = {},
                                const FragmentCache* cache = nullptr, NodePath leaf_path = {});

struct RefineOutcome {
  std::string html;
  int attempts = 0;
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

RefineOutcome refine_global(std::string_view document, const Image& design, ChatEndpoint& endpoint,
                            const AgentOptions& options = {});

/// First fenced block holding markup, else the longest `<...>` span.
std::string extract_code(std::string_view completion);

/// Removes doctype, html/head/body wrapper tags, head-only elements except
/// <style>, scripts and stray fence lines.
std::string sanitize_fragment(std::string_view html);

/// Removes scripts and stray fence lines, keeping the document shape.
std::string sanitize_document(std::string_view html);

}  // namespace hiergen
