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

#include "hiergen/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hiergen/error.hpp"

namespace hiergen {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_unlimited_word(const std::string& s) {
  const auto l = lower(s);
  return l == "unlimited" || l == "none" || l == "inf" || l == "";
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

}  // namespace

std::string MinArea::to_string() const {
  if (!fraction) return "unlimited";
  std::ostringstream os;
  os << *fraction;
  return os.str();
}

std::string MaxDepth::to_string() const {
  return depth ? std::to_string(*depth) : "unlimited";
}

MinArea parse_min_area(std::string_view text) {
  std::string s = trim(text);
  if (is_unlimited_word(s)) return MinArea::unlimited();
  bool percent = false;
  if (!s.empty() && s.back() == '%') {
    percent = true;
    s.pop_back();
  }
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    fail(ErrorCode::kInvalidArgument, "min_area must be a fraction, a percentage or 'unlimited': '" +
                                          std::string(text) + "'");
  }
  if (percent) value /= 100.0;
  if (!(value >= 0.0 && value <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "min_area must lie in [0, 1]");
  }
  return MinArea::of(value);
}

MaxDepth parse_max_depth(std::string_view text) {
  const std::string s = trim(text);
  if (is_unlimited_word(s)) return MaxDepth::unlimited();
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || value < 1) {
    fail(ErrorCode::kInvalidArgument,
         "max_depth must be a positive integer or 'unlimited': '" + std::string(text) + "'");
  }
  return MaxDepth::of(value);
}

void PipelineConfig::validate() const {
  if (min_area.fraction && !(*min_area.fraction >= 0.0 && *min_area.fraction <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "min_area must lie in [0, 1]");
  }
  if (max_depth.depth && *max_depth.depth < 1) {
    fail(ErrorCode::kInvalidArgument, "max_depth must be >= 1");
  }
  if (viewport_width <= 0) fail(ErrorCode::kInvalidArgument, "viewport_width must be positive");
  if (agent_concurrency <= 0) {
    fail(ErrorCode::kInvalidArgument, "agent_concurrency must be positive");
  }
}

Settings Settings::parse(std::string_view text) {
  Settings settings;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    // Comments: '#' outside of quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::kInvalidArgument,
           "config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) {
      fail(ErrorCode::kInvalidArgument, "config line " + std::to_string(line_no) + ": empty key");
    }
    if (!section.empty()) key = section + "." + key;
    settings.entries_[key] = unquote(trim(std::string_view(line).substr(eq + 1)));
  }
  return settings;
}

Settings Settings::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kMissingFile, "cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void Settings::set(const std::string& key, const std::string& value) { entries_[key] = value; }

bool Settings::has(const std::string& key) const { return entries_.count(key) != 0; }

std::optional<std::string> Settings::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string Settings::get_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

int Settings::get_int(const std::string& key, int fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  int value = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), value);
  if (ec != std::errc{} || ptr != v->data() + v->size()) {
    fail(ErrorCode::kInvalidArgument, "setting '" + key + "' must be an integer");
  }
  return value;
}

double Settings::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    fail(ErrorCode::kInvalidArgument, "setting '" + key + "' must be a number");
  }
}

PipelineConfig pipeline_config_from(const Settings& settings) {
  PipelineConfig cfg;
  if (const auto v = settings.get("min_area")) cfg.min_area = parse_min_area(*v);
  if (const auto v = settings.get("max_depth")) cfg.max_depth = parse_max_depth(*v);
  cfg.viewport_width = settings.get_int("viewport_width", cfg.viewport_width);
  cfg.agent_concurrency = settings.get_int("agent_concurrency", cfg.agent_concurrency);
  cfg.cache_dir = settings.get_or("cache_dir", cfg.cache_dir);
  cfg.validate();
  return cfg;
}

}  // namespace hiergen
