// Copyright 2026-present the latentsearch project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace latentsearch {

/// One search result. Result lists are ordered by score descending with
/// ties broken by ascending id; rank is the 0-based position.
struct SearchHit {
  std::uint64_t id = 0;
  double score = 0.0;
  std::size_t rank = 0;

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

/// Sorts (id, score) pairs into the canonical order, keeps the first `k`
/// and assigns ranks.
std::vector<SearchHit> rank_hits(std::vector<std::pair<std::uint64_t, double>> scored,
                                 std::size_t k);

/// Mean of the hit scores.
double mean_score(std::span<const SearchHit> hits);

}  // namespace latentsearch
