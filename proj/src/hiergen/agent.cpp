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


#include "hiergen/agent.hpp"

#include <cstdlib>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <thread>

#include "hiergen/error.hpp"
#include "hiergen/html.hpp"
#include "hiergen/http.hpp"
#include "hiergen/util.hpp"

namespace hiergen {

using nlohmann::json;

std::string chat_request_json(const AgentRequest& request, const std::string& model) {
  json j = json::object();
  if (!model.empty()) j["model"] = model;
  j["temperature"] = request.temperature;
  j["max_tokens"] = request.max_tokens;
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", request.instruction}});
  content.push_back({{"type", "image_url"},
                     {"image_url", {{"url", "data:image/png;base64," +
                                                base64_encode(encode_png(request.image))}}}});
  j["messages"] = json::array({{{"role", "user"}, {"content", std::move(content)}}});
  return j.dump();
}

std::string request_hash(const AgentRequest& request) {
  return sha256_hex(chat_request_json(request, ""));
}

ChatEndpointConfig chat_config_from_env(ChatEndpointConfig base) {
  if (base.url.empty()) {
    if (const char* v = std::getenv("HIERGEN_AGENT_URL")) base.url = v;
  }
  if (base.api_key.empty()) {
    if (const char* v = std::getenv("HIERGEN_AGENT_KEY")) base.api_key = v;
  }
  return base;
}

HttpChatEndpoint::HttpChatEndpoint(ChatEndpointConfig config) : config_(std::move(config)) {
  if (config_.url.empty()) fail(ErrorCode::kInvalidArgument, "agent endpoint URL is empty");
  if (config_.retries < 0) fail(ErrorCode::kInvalidArgument, "retries must be >= 0");
  http::parse_url(config_.url);
}

namespace {

std::string completion_text(const json& body) {
  const auto& choices = body.at("choices");
  if (!choices.is_array() || choices.empty()) return "";
  const auto& first = choices[0];
  if (first.contains("message")) {
    const auto& content = first["message"].at("content");
    if (content.is_string()) return content.get<std::string>();
    if (content.is_array()) {
      std::string out;
      for (const auto& part : content) {
        if (part.is_object() && part.contains("text")) out += part["text"].get<std::string>();
      }
      return out;
    }
    return "";
  }
  if (first.contains("text")) return first["text"].get<std::string>();
  return "";
}

}  // namespace

ChatCompletion HttpChatEndpoint::complete(const AgentRequest& request) {
  if (request.temperature < 0) fail(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  http::Request req;
  req.url = config_.url;
  req.body = chat_request_json(request, config_.model);
  req.timeout = config_.timeout;
  if (!config_.api_key.empty()) req.headers["Authorization"] = "Bearer " + config_.api_key;
  std::string last_error;
  const int max_attempts = config_.retries + 1;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) std::this_thread::sleep_for(config_.backoff * (1 << (attempt - 2)));
    const auto res = http::post_json(req);
    if (res.outcome != http::Outcome::kOk) {
      last_error = "transport: " + res.error;
      continue;
    }
    if (res.status == 429 || res.status >= 500) {
      last_error = "HTTP " + std::to_string(res.status);
      continue;
    }
    if (res.status != 200) {
      fail(ErrorCode::kEndpointError, "agent endpoint returned HTTP " + std::to_string(res.status));
    }
    ChatCompletion out;
    out.attempts = attempt;
    try {
      const auto body = json::parse(res.body);
      out.text = completion_text(body);
      if (body.contains("usage") && body["usage"].is_object()) {
        out.prompt_tokens = body["usage"].value("prompt_tokens", 0);
        out.completion_tokens = body["usage"].value("completion_tokens", 0);
      }
    } catch (const json::exception& e) {
      fail(ErrorCode::kEndpointError, std::string("malformed completion body: ") + e.what());
    }
    return out;
  }
  fail(ErrorCode::kEndpointError,
       "agent endpoint failed after " + std::to_string(max_attempts) + " attempts: " + last_error);
}

std::string HttpChatEndpoint::identifier() const {
  return "http:" + config_.url + (config_.model.empty() ? "" : "#" + config_.model);
}

ReplayChatEndpoint::ReplayChatEndpoint(std::string dir) : dir_(std::move(dir)) {}

ChatCompletion ReplayChatEndpoint::complete(const AgentRequest& request) {
  const auto path = std::filesystem::path(dir_) / (request_hash(request) + ".txt");
  if (!std::filesystem::is_regular_file(path)) {
    fail(ErrorCode::kEndpointError, "no recorded completion " + path.string());
  }
  ChatCompletion out;
  out.text = read_text_file(path.string());
  return out;
}

std::string ReplayChatEndpoint::identifier() const { return "replay:" + dir_; }

void ReplayChatEndpoint::store(const AgentRequest& request, std::string_view completion) const {
  const auto path = std::filesystem::path(dir_) / (request_hash(request) + ".txt");
  write_text_file(path.string(), completion);
}

FragmentCache::FragmentCache(std::string dir) : dir_(std::move(dir)) {}

std::optional<std::string> FragmentCache::get(const std::string& key) const {
  const auto path = std::filesystem::path(dir_) / (key + ".html");
  if (!std::filesystem::is_regular_file(path)) return std::nullopt;
  return read_text_file(path.string());
}

void FragmentCache::put(const std::string& key, std::string_view html) const {
  write_text_file((std::filesystem::path(dir_) / (key + ".html")).string(), html);
}

AgentRequest leaf_request(const Image& region, const std::string& parent_tag,
                          const AgentOptions& options) {
  AgentRequest r;
  r.image = region;
  r.instruction = options.leaf_template.fill({{"parent_tag", parent_tag}});
  r.temperature = options.temperature;
  r.max_tokens = options.max_tokens;
  return r;
}

AgentRequest refine_request(std::string_view document, const Image& design,
                            const AgentOptions& options) {
  AgentRequest r;
  r.image = design;
  r.instruction = options.refine_template.fill({{"document", std::string(document)}});
  r.temperature = options.temperature;
  r.max_tokens = options.max_tokens;
  return r;
}

std::string leaf_cache_key(const Image& region, const std::string& parent_tag,
                           const AgentOptions& options) {
  return sha256_hex(options.leaf_template.hash + "\n" + parent_tag + "\n" + image_digest(region));
}

GeneratedFragment generate_leaf(const Image& region, const std::string& parent_tag,
                                ChatEndpoint& endpoint, const AgentOptions& options,
                                const FragmentCache* cache, NodePath leaf_path) {
  if (region.empty()) fail(ErrorCode::kEmptyRegion, "leaf region is empty");
  GeneratedFragment out;
  out.leaf_path = std::move(leaf_path);
  out.parent_tag = parent_tag;
  std::string key;
  if (cache) {
    key = leaf_cache_key(region, parent_tag, options);
    if (auto hit = cache->get(key)) {
      out.html = std::move(*hit);
      out.cache_hit = true;
      return out;
    }
  }
  const ChatCompletion completion = endpoint.complete(leaf_request(region, parent_tag, options));
  out.attempts = completion.attempts;
  out.prompt_tokens = completion.prompt_tokens;
  out.completion_tokens = completion.completion_tokens;
  if (normalize_whitespace(completion.text).empty()) {
    fail(ErrorCode::kEmptyCompletion, "agent returned an empty completion");
  }
  out.html = sanitize_fragment(extract_code(completion.text));
  if (normalize_whitespace(out.html).empty()) {
    fail(ErrorCode::kNoCodeFound, "completion holds no markup after sanitation");
  }
  if (cache) cache->put(key, out.html);
  return out;
}

RefineOutcome refine_global(std::string_view document, const Image& design, ChatEndpoint& endpoint,
                            const AgentOptions& options) {
  if (design.empty()) fail(ErrorCode::kInvalidArgument, "design image is empty");
  if (document.size() > options.document_budget) {
    fail(ErrorCode::kDocumentTooLarge, "document is " + std::to_string(document.size()) +
                                           " bytes, budget " + std::to_string(options.document_budget));
  }
  const ChatCompletion completion = endpoint.complete(refine_request(document, design, options));
  if (normalize_whitespace(completion.text).empty()) {
    fail(ErrorCode::kEmptyCompletion, "agent returned an empty completion");
  }
  RefineOutcome out;
  out.html = sanitize_document(extract_code(completion.text));
  out.attempts = completion.attempts;
  out.prompt_tokens = completion.prompt_tokens;
  out.completion_tokens = completion.completion_tokens;
  if (normalize_whitespace(out.html).empty()) fail(ErrorCode::kNoCodeFound, "refinement holds no markup");
  return out;
}

std::string extract_code(std::string_view completion) {
  std::size_t pos = 0;
  while (true) {
    const auto open = completion.find("```", pos);
    if (open == std::string_view::npos) break;
    auto start = completion.find('\n', open);
    if (start == std::string_view::npos) break;
    ++start;
    const auto close = completion.find("```", start);
    const std::string_view body =
        completion.substr(start, close == std::string_view::npos ? std::string_view::npos : close - start);
    if (body.find('<') != std::string_view::npos) return std::string(body);
    if (close == std::string_view::npos) break;
    pos = close + 3;
  }
  const auto first = completion.find('<');
  const auto last = completion.rfind('>');
  if (first == std::string_view::npos || last == std::string_view::npos || last < first) {
    fail(ErrorCode::kNoCodeFound, "completion contains no markup");
  }
  return std::string(completion.substr(first, last - first + 1));
}

namespace {

std::string drop_fence_lines(std::string text) {
  std::string out;
  std::size_t i = 0;
  while (i <= text.size()) {
    auto nl = text.find('\n', i);
    if (nl == std::string::npos) nl = text.size();
    const std::string_view line(text.data() + i, nl - i);
    const auto first = line.find_first_not_of(" \t\r");
    const bool fence = first != std::string_view::npos && line.substr(first, 3) == "```";
    if (!fence) {
      out.append(line);
      if (nl < text.size()) out += '\n';
    }
    i = nl + 1;
  }
  // Inline fences that share a line with markup.
  for (auto p = out.find("```"); p != std::string::npos; p = out.find("```")) out.erase(p, 3);
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_tokens(std::string_view source, bool fragment) {
  const auto tokens = html::tokenize(source);
  std::string out;
  std::string skipping;  // element whose content is being dropped
  for (const auto& t : tokens) {
    const std::string_view raw = source.substr(t.begin, t.end - t.begin);
    if (!skipping.empty()) {
      if (t.kind == html::TokenKind::kEndTag && t.name == skipping) skipping.clear();
      continue;
    }
    const bool tag = t.kind == html::TokenKind::kStartTag || t.kind == html::TokenKind::kEndTag;
    if (tag && t.name == "script") {
      if (t.kind == html::TokenKind::kStartTag && !t.self_closing) skipping = "script";
      continue;
    }
    if (fragment) {
      if (t.kind == html::TokenKind::kDoctype) continue;
      if (tag && (t.name == "html" || t.name == "head" || t.name == "body")) continue;
      if (tag && (t.name == "title" || t.name == "noscript")) {
        if (t.kind == html::TokenKind::kStartTag && !t.self_closing) skipping = t.name;
        continue;
      }
      if (tag && (t.name == "meta" || t.name == "link" || t.name == "base")) continue;
    }
    out.append(raw);
  }
  return out;
}

}  // namespace

std::string sanitize_fragment(std::string_view html_text) {
  return trim(strip_tokens(drop_fence_lines(std::string(html_text)), true));
}

std::string sanitize_document(std::string_view html_text) {
  return trim(strip_tokens(drop_fence_lines(std::string(html_text)), false));
}

}  // namespace hiergen
