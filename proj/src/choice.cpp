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

#include "forge/choice.hpp"

#include <fmt/format.h>

#include "forge/error.hpp"

namespace forge {

std::string render_question(std::string_view question, std::span<const Option> options) {
  std::string out = fmt::format("Question: {}\nOptions:\n", question);
  for (const auto& o : options) out += fmt::format("{}. {}\n", o.label, o.text);
  return out;
}

void relabel(std::vector<Option>& options) {
  if (options.size() > kOptionLabels.size()) throw Error("at most 4 options are supported");
  for (std::size_t i = 0; i < options.size(); ++i) options[i].label = kOptionLabels[i];
}

}  // namespace forge
