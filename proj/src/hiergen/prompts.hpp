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
#include <string>
#include <string_view>

namespace hiergen {

struct PromptTemplate {
  std::string name;
  std::string text;
  std::string hash;  // sha256 of text

  static PromptTemplate from_text(std::string name, std::string text);
  static PromptTemplate from_file(const std::string& path);

  /// Replaces `{{key}}` placeholders; unknown placeholders are left as is.
  std::string fill(const std::map<std::string, std::string>& values) const;
};

const PromptTemplate& builtin_leaf_template();
const PromptTemplate& builtin_refine_template();

}  // namespace hiergen
