/*
 * Copyright 2026 The Forge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

/// One lettered multiple-choice option. `key` is the option's meaning
/// (an object id, "yes", "toward", ...) independent of its label and wording.
struct Option {
  char label = 'A';
  std::string text;
  std::string key;

  friend bool operator==(const Option&, const Option&) = default;
};

inline constexpr std::string_view kOptionLabels = "ABCD";

inline bool is_option_label(char c) { return c >= 'A' && c <= 'D'; }

/// "Question: ...\nOptions:\nA. ...\n" prompt text shared by training records
/// and benchmark prompts.
std::string render_question(std::string_view question, std::span<const Option> options);

/// Assigns labels A, B, ... in order.
void relabel(std::vector<Option>& options);

}  // namespace forge
