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


#include "hiergen/structure.hpp"

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>

#include "hiergen/error.hpp"
#include "hiergen/http.hpp"
#include "hiergen/prune.hpp"
#include "hiergen/util.hpp"

namespace hiergen {

CoarseDomTree predict_structure(const Image& screenshot, StructureBackend& backend) {
  if (screenshot.empty()) fail(ErrorCode::kInvalidArgument, "screenshot is empty");
  CoarseDomTree tree = backend.predict(screenshot);
  if (tree.page_width != screenshot.width() || tree.page_height != screenshot.height()) {
    fail(ErrorCode::kDimensionMismatch,
         "predicted page " + std::to_string(tree.page_width) + "x" + std::to_string(tree.page_height) +
             " differs from screenshot " + std::to_string(screenshot.width()) + "x" +
             std::to_string(screenshot.height()));
  }
  validate_tree(tree);
  return tree;
}

OracleTree oracle_tree(const DatasetRecord& record, const MinArea& min_area,
                       const MaxDepth& max_depth) {
  const TrainingPrune training = prune_training(record);
  const InferencePrune inference = prune_inference_traced(training.tree, min_area, max_depth);
  // inference.origins are paths in training.tree; map them through.
  std::map<NodePath, std::size_t> preorder;
  visit_nodes(training.tree.root, [&](const CoarseNode&, int, const NodePath& q) {
    preorder.emplace(q, preorder.size());
  });
  OracleTree out;
  out.tree = inference.tree;
  for (const auto& p : inference.origins) out.origins.push_back(training.origins.at(preorder.at(p)));
  return out;
}

OracleBackend::OracleBackend(DatasetRecord record, PipelineConfig config)
    : record_(std::move(record)), config_(std::move(config)) {
  check_record(record_);
}

CoarseDomTree OracleBackend::predict(const Image& screenshot) {
  if (screenshot.width() != record_.screenshot.width() ||
      screenshot.height() != record_.screenshot.height()) {
    fail(ErrorCode::kDimensionMismatch, "oracle screenshot differs from its record");
  }
  return oracle_tree(record_, config_.min_area, config_.max_depth).tree;
}

std::string OracleBackend::identifier() const { return "oracle:" + record_.id; }

std::string screenshot_key(const Image& screenshot) { return image_digest(screenshot); }

ReplayBackend::ReplayBackend(std::string dir) : dir_(std::move(dir)) {}

CoarseDomTree ReplayBackend::predict(const Image& screenshot) {
  const auto path = std::filesystem::path(dir_) / (screenshot_key(screenshot) + ".json");
  if (!std::filesystem::is_regular_file(path)) {
    fail(ErrorCode::kBackendUnavailable, "no stored prediction " + path.string());
  }
  return parse_tree(read_text_file(path.string()));
}

std::string ReplayBackend::identifier() const { return "replay:" + dir_; }

void ReplayBackend::store(const Image& screenshot, const CoarseDomTree& tree) const {
  const auto path = std::filesystem::path(dir_) / (screenshot_key(screenshot) + ".json");
  write_text_file(path.string(), serialize_tree(tree));
}

RemoteBackend::RemoteBackend(HttpEndpointConfig config, int max_in_flight)
    : config_(std::move(config)), max_in_flight_(max_in_flight) {
  if (max_in_flight_ < 1) fail(ErrorCode::kInvalidArgument, "max_in_flight must be >= 1");
  http::parse_url(config_.url);
}

CoarseDomTree RemoteBackend::predict(const Image& screenshot) {
  nlohmann::json req;
  req["image"] = base64_encode(encode_png(screenshot));
  http::Request r;
  r.url = config_.url;
  r.body = req.dump();
  r.timeout = config_.timeout;
  if (!config_.api_key.empty()) r.headers["Authorization"] = "Bearer " + config_.api_key;
  http::Response res;
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
    ++in_flight_;
  }
  res = http::post_json(r);
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
  if (res.outcome != http::Outcome::kOk) {
    fail(ErrorCode::kBackendUnavailable, "structure endpoint unreachable: " + res.error);
  }
  if (res.status != 200) {
    fail(ErrorCode::kBackendUnavailable, "structure endpoint returned HTTP " + std::to_string(res.status));
  }
  std::string tree_json;
  try {
    const auto body = nlohmann::json::parse(res.body);
    tree_json = body.at("tree_json").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kPredictionUnparseable, std::string("bad structure response: ") + e.what());
  }
  try {
    return parse_tree(repair_json(tree_json));
  } catch (const Error& e) {
    fail(ErrorCode::kPredictionUnparseable, std::string("prediction unparseable: ") + e.what());
  }
}

std::string RemoteBackend::identifier() const { return "remote:" + config_.url; }

namespace {

std::string_view unfence(std::string_view text) {
  const auto open = text.find("```");
  if (open == std::string_view::npos) return text;
  auto start = text.find('\n', open);
  start = start == std::string_view::npos ? text.size() : start + 1;
  const auto close = text.find("```", start);
  return text.substr(start, close == std::string_view::npos ? std::string_view::npos : close - start);
}

enum class Expect { kKeyOrClose, kColon, kValue, kValueOrClose, kCommaOrClose };

}  // namespace

std::string repair_json(std::string_view input) {
  const std::string_view text = unfence(input);
  const auto begin = text.find_first_of("{[");
  if (begin == std::string_view::npos) fail(ErrorCode::kUnrepairable, "no JSON value found");

  struct Scope {
    char close;
    Expect expect;
  };
  std::vector<Scope> stack;
  std::size_t safe_end = std::string_view::npos;
  std::vector<Scope> safe_stack;
  bool complete = false;
  std::size_t end = text.size();

  const auto after_value = [&](std::size_t pos) {
    if (stack.empty()) {
      complete = true;
      end = pos;
      return;
    }
    stack.back().expect = Expect::kCommaOrClose;
    safe_end = pos;
    safe_stack = stack;
  };

  std::size_t i = begin;
  while (i < text.size() && !complete) {
    const char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    Expect expect = stack.empty() ? Expect::kValue : stack.back().expect;
    if (c == '{' || c == '[') {
      if (expect != Expect::kValue && expect != Expect::kValueOrClose) break;
      stack.push_back(Scope{c == '{' ? '}' : ']', c == '{' ? Expect::kKeyOrClose : Expect::kValueOrClose});
      ++i;
      safe_end = i;
      safe_stack = stack;
      continue;
    }
    if (c == '}' || c == ']') {
      if (stack.empty() || stack.back().close != c) break;
      if (expect != Expect::kCommaOrClose && expect != Expect::kKeyOrClose &&
          expect != Expect::kValueOrClose) {
        break;
      }
      stack.pop_back();
      ++i;
      after_value(i);
      continue;
    }
    if (c == ',') {
      if (expect != Expect::kCommaOrClose) break;
      stack.back().expect = stack.back().close == '}' ? Expect::kKeyOrClose : Expect::kValue;
      ++i;
      continue;
    }
    if (c == ':') {
      if (expect != Expect::kColon) break;
      stack.back().expect = Expect::kValue;
      ++i;
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      bool closed = false;
      while (j < text.size()) {
        if (text[j] == '\\') {
          j += 2;
          continue;
        }
        if (text[j] == '"') {
          closed = true;
          break;
        }
        ++j;
      }
      if (!closed) break;  // partial string: dropped
      i = j + 1;
      if (expect == Expect::kKeyOrClose) {
        stack.back().expect = Expect::kColon;
      } else if (expect == Expect::kValue || expect == Expect::kValueOrClose) {
        after_value(i);
      } else {
        break;
      }
      continue;
    }
    // Number or literal.
    if (expect != Expect::kValue && expect != Expect::kValueOrClose) break;
    std::size_t j = i;
    while (j < text.size() &&
           std::string_view(",]} \t\r\n:").find(text[j]) == std::string_view::npos) {
      ++j;
    }
    if (j == text.size() && !stack.empty()) break;  // may be cut short
    i = j;
    after_value(i);
  }

  std::string out;
  if (complete) {
    out = std::string(text.substr(begin, end - begin));
  } else {
    if (safe_end == std::string_view::npos) fail(ErrorCode::kUnrepairable, "nothing to repair");
    out = std::string(text.substr(begin, safe_end - begin));
    for (auto it = safe_stack.rbegin(); it != safe_stack.rend(); ++it) out += it->close;
  }
  if (!nlohmann::json::accept(out)) fail(ErrorCode::kUnrepairable, "repaired text does not parse");
  return out;
}

}  // namespace hiergen
