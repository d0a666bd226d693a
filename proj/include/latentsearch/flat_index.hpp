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
#include <vector>

#include "latentsearch/embedding_io.hpp"
#include "latentsearch/search_hit.hpp"

namespace latentsearch {

/// Norms below this are rejected by l2_normalize.
inline constexpr double kMinNorm = 1e-12;

std::vector<double> l2_normalize(std::span<const double> v);
std::vector<double> l2_normalize(std::span<const float> v);

/// Exact inner-product search over L2-normalized vectors, the equivalent of
/// a flat IP index on unit rows. Rows are stored in double precision.
class FlatIndex {
 public:
  std::size_t count() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }

  std::span<const double> row(std::size_t i) const;
  const std::vector<std::uint64_t>& ids() const { return ids_; }

  /// Normalizes `q` and returns the k largest inner products.
  std::vector<SearchHit> search(std::span<const double> q, std::size_t k) const;
  std::vector<SearchHit> search(std::span<const float> q, std::size_t k) const;

  /// Normalized rows as a float set, the on-disk form of the index.
  EmbeddingSet to_embedding_set() const;

  friend bool operator==(const FlatIndex&, const FlatIndex&) = default;

 private:
  friend FlatIndex build_flat(const EmbeddingSet& set);

  std::size_t dim_ = 0;
  std::vector<double> rows_;
  std::vector<std::uint64_t> ids_;
};

/// Builds the index from an original-space set; row i gets corpus id i.
/// Throws DegenerateVectorError naming the first zero-norm row.
FlatIndex build_flat(const EmbeddingSet& set);

std::vector<SearchHit> flat_search(const FlatIndex& index,
                                   std::span<const float> q, std::size_t k);
std::vector<SearchHit> flat_search(const FlatIndex& index,
                                   std::span<const double> q, std::size_t k);

}  // namespace latentsearch
