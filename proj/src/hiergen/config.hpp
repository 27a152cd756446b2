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

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace hiergen {

/// Area fraction threshold; nullopt means unlimited.
struct MinArea {
  std::optional<double> fraction;

  static MinArea unlimited() { return {}; }
  static MinArea of(double f) { return MinArea{f}; }
  bool is_unlimited() const { return !fraction.has_value(); }
  std::string to_string() const;

  friend bool operator==(const MinArea&, const MinArea&) = default;
};

/// Depth threshold (root = 1); nullopt means unlimited.
struct MaxDepth {
  std::optional<int> depth;

  static MaxDepth unlimited() { return {}; }
  static MaxDepth of(int d) { return MaxDepth{d}; }
  bool is_unlimited() const { return !depth.has_value(); }
  std::string to_string() const;

  friend bool operator==(const MaxDepth&, const MaxDepth&) = default;
};

MinArea parse_min_area(std::string_view text);
MaxDepth parse_max_depth(std::string_view text);

struct PipelineConfig {
  MinArea min_area = MinArea::of(0.10);
  MaxDepth max_depth = MaxDepth::of(4);
  int viewport_width = 1280;
  int agent_concurrency = 4;
  std::string cache_dir;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

/// Flat `key = value` settings with `#` comments and optional `[section]`
/// headers (keys inside a section are stored as `section.key`).
class Settings {
 public:
  static Settings parse(std::string_view text);
  static Settings load_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

/// Builds the pipeline thresholds from settings (`min_area`, `max_depth`,
/// `viewport_width`, `agent_concurrency`, `cache_dir`).
PipelineConfig pipeline_config_from(const Settings& settings);

}  // namespace hiergen
