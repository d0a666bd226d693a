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

#include "latentsearch/search_hit.hpp"

#include <algorithm>

#include "latentsearch/error.hpp"

namespace latentsearch {

std::vector<SearchHit> rank_hits(std::vector<std::pair<std::uint64_t, double>> scored,
                                 std::size_t k) {
  k = std::min(k, scored.size());
  auto better = [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                    scored.end(), better);
  std::vector<SearchHit> hits;
  hits.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    hits.push_back({scored[i].first, scored[i].second, i});
  }
  return hits;
}

double mean_score(std::span<const SearchHit> hits) {
  if (hits.empty()) {
    throw ArgumentError("mean of an empty hit list");
  }
  double sum = 0.0;
  for (const auto& h : hits) sum += h.score;
  return sum / static_cast<double>(hits.size());
}

}  // namespace latentsearch
