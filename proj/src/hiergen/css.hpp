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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hiergen/html.hpp"
#include "hiergen/image.hpp"

namespace hiergen::css {

struct Color {
  Rgb rgb;
  bool transparent = false;
};

/// #rgb, #rrggbb, rgb()/rgba(), `transparent` and the basic named colors.
/// Colors with alpha below 0.5 are treated as transparent.
std::optional<Color> parse_color(std::string_view text);

struct Declaration {
  std::string property;
  std::string value;
  bool important = false;
};

std::vector<Declaration> parse_declarations(std::string_view text);

struct Compound {
  std::string tag;  // empty = any
  std::string id;
  std::vector<std::string> classes;
  std::vector<std::pair<std::string, std::optional<std::string>>> attributes;
};

struct Selector {
  enum class Combinator { kDescendant, kChild };

  // parts.back() is the subject; combinators[i] joins parts[i] and parts[i+1].
  std::vector<Compound> parts;
  std::vector<Combinator> combinators;
  int specificity = 0;  // ids * 10000 + classes/attributes * 100 + tags
};

struct Rule {
  std::vector<Selector> selectors;
  std::vector<Declaration> declarations;
};

/// Rules with unsupported selectors (pseudo-classes, sibling combinators) are
/// dropped; at-rule blocks are skipped.
std::vector<Rule> parse_stylesheet(std::string_view text);

bool matches(const Selector& selector, const html::Node& element);

}  // namespace hiergen::css
