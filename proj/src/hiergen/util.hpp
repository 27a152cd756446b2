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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hiergen {

std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(std::string_view text);

std::string base64_encode(std::span<const std::uint8_t> data);
/// Throws InvalidArgument on malformed input. Whitespace is ignored.
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string read_text_file(const std::string& path);
/// Writes via a temporary sibling and rename, creating parent directories.
void write_text_file(const std::string& path, std::string_view content);
void write_binary_file(const std::string& path, std::span<const std::uint8_t> data);

/// Collapses whitespace runs to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

/// Count of whitespace-delimited words.
std::size_t count_words(std::string_view text);

double mean_of(std::span<const double> values);
/// Population standard deviation.
double pstddev_of(std::span<const double> values);

}  // namespace hiergen
