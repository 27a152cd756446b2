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


#include "hiergen/prompts.hpp"

#include "hiergen/util.hpp"

namespace hiergen {

namespace prompts::embedded {
extern const std::string_view k_leaf_v1;
extern const std::string_view k_refine_v1;
}  // namespace prompts::embedded

PromptTemplate PromptTemplate::from_text(std::string name, std::string text) {
  PromptTemplate t;
  t.name = std::move(name);
  t.hash = sha256_hex(text);
  t.text = std::move(text);
  return t;
}

PromptTemplate PromptTemplate::from_file(const std::string& path) {
  std::string name = path;
  if (const auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  if (const auto dot = name.rfind('.'); dot != std::string::npos) name = name.substr(0, dot);
  return from_text(name, read_text_file(path));
}

std::string PromptTemplate::fill(const std::map<std::string, std::string>& values) const {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto open = text.find("{{", i);
    if (open == std::string::npos) break;
    const auto close = text.find("}}", open + 2);
    if (close == std::string::npos) break;
    out.append(text, i, open - i);
    const std::string key = text.substr(open + 2, close - open - 2);
    if (const auto it = values.find(key); it != values.end()) out += it->second;
    else out.append(text, open, close + 2 - open);
    i = close + 2;
  }
  out.append(text, i, std::string::npos);
  return out;
}

const PromptTemplate& builtin_leaf_template() {
  static const PromptTemplate t = PromptTemplate::from_text("leaf_v1", std::string(prompts::embedded::k_leaf_v1));
  return t;
}

const PromptTemplate& builtin_refine_template() {
  static const PromptTemplate t =
      PromptTemplate::from_text("refine_v1", std::string(prompts::embedded::k_refine_v1));
  return t;
}

}  // namespace hiergen
