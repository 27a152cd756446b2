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

#include <string>
#include <string_view>
#include <vector>

#include "hiergen/agent.hpp"
#include "hiergen/tree.hpp"

namespace hiergen {

inline constexpr std::string_view kPathAttr = "data-cn";
inline constexpr std::string_view kBoxAttr = "data-bb";
inline constexpr std::string_view kPageMetaName = "hiergen:page";
inline constexpr std::string_view kFailureMarker = "hiergen:leaf-failed";

struct LeafFragment {
  NodePath path;
  bool failed = false;
  std::string html;    // content when not failed
  std::string reason;  // when failed

  static LeafFragment from(const GeneratedFragment& fragment);
  static LeafFragment failure(NodePath path, std::string reason);
};

/// Tags whose leaves are emitted empty without an agent call.
bool is_contentless_tag(std::string_view tag);

std::string assemble(const CoarseDomTree& tree, const std::vector<LeafFragment>& fragments);

/// Rebuilds the tree from marked elements. Only explicit end tags close
/// elements, so the nesting read here is the nesting that was written.
CoarseDomTree extract_coarse(std::string_view document);

struct PreservationReport {
  bool preserved = false;
  std::vector<std::string> missing;       // expected paths not found in place
  std::vector<std::string> extra_marked;  // marked elements not expected in place
};

PreservationReport validate_preservation(const CoarseDomTree& before, std::string_view refined);

/// Number of failure markers in a document.
int count_failure_markers(std::string_view document);

}  // namespace hiergen
