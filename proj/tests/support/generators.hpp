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

// Hand-rolled generators for property tests.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "forge/rng.hpp"

namespace gen {

/// Completion-like text: random mixes of tags, indicator words, spatial terms,
/// option letters, numbers and raw bytes.
inline std::string completion_text(forge::Rng& rng) {
  static constexpr std::array<std::string_view, 28> kPieces = {
      "<think>", "</think>", "<answer>", "</answer>", "First,", "Second,", "Next,", "Then,",
      "Finally,", "first", "FINALLY", "location", "Location", "distance", "orientation",
      "angle", "height", "A", "B", "C", "D", "(A)", " ", "\n", ".", "[1.00, 2.00, 0.50]",
      "3.14 m", "the chair {chair_1}"};
  std::string s;
  const std::size_t parts = rng.index(40);
  for (std::size_t i = 0; i < parts; ++i) {
    if (rng.index(5) == 0) {
      const std::size_t n = 1 + rng.index(8);
      for (std::size_t k = 0; k < n; ++k) s.push_back(static_cast<char>(rng.index(256)));
    } else {
      s += kPieces[rng.index(kPieces.size())];
    }
  }
  return s;
}

/// Rewards drawn from a few regimes: binary, small-integer, continuous, constant.
inline std::vector<double> reward_group(forge::Rng& rng, std::size_t g) {
  std::vector<double> r(g);
  const std::size_t mode = rng.index(4);
  const double c = rng.uniform(-3, 3);
  for (auto& x : r) {
    switch (mode) {
      case 0: x = static_cast<double>(rng.index(2)); break;
      case 1: x = static_cast<double>(rng.index(5)) * 0.5; break;
      case 2: x = rng.uniform(-10, 10); break;
      default: x = rng.index(8) == 0 ? c + 1.0 : c;
    }
  }
  return r;
}

}  // namespace gen
