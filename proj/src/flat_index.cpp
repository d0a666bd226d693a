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

#include "latentsearch/flat_index.hpp"

#include <cmath>

#include "latentsearch/error.hpp"

namespace latentsearch {

namespace {

template <typename T>
std::vector<double> normalize_impl(std::span<const T> v) {
  double sq = 0.0;
  for (T x : v) {
    const auto d = static_cast<double>(x);
    if (!std::isfinite(d)) {
      throw DataError("cannot normalize a vector with non-finite components");
    }
    sq += d * d;
  }
  const double norm = std::sqrt(sq);
  if (norm < kMinNorm) {
    throw DegenerateVectorError("vector norm " + std::to_string(norm) +
                                " is too small to normalize");
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<double>(v[i]) / norm;
  }
  return out;
}

}  // namespace

std::vector<double> l2_normalize(std::span<const double> v) {
  return normalize_impl(v);
}

std::vector<double> l2_normalize(std::span<const float> v) {
  return normalize_impl(v);
}

std::span<const double> FlatIndex::row(std::size_t i) const {
  if (i >= count()) {
    throw ArgumentError("row " + std::to_string(i) + " out of range");
  }
  return std::span<const double>(rows_).subspan(i * dim_, dim_);
}

std::vector<SearchHit> FlatIndex::search(std::span<const double> q,
                                         std::size_t k) const {
  if (q.size() != dim_) {
    throw ShapeError("query has length " + std::to_string(q.size()) +
                     ", index dim is " + std::to_string(dim_));
  }
  if (k == 0 || k > count()) {
    throw ArgumentError("k = " + std::to_string(k) + " must lie in [1, " +
                        std::to_string(count()) + "]");
  }
  const auto unit = l2_normalize(q);
  std::vector<std::pair<std::uint64_t, double>> scored(count());
  for (std::size_t i = 0; i < count(); ++i) {
    const double* r = rows_.data() + i * dim_;
    double dot = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) dot += unit[j] * r[j];
    scored[i] = {ids_[i], dot};
  }
  return rank_hits(std::move(scored), k);
}

std::vector<SearchHit> FlatIndex::search(std::span<const float> q,
                                         std::size_t k) const {
  std::vector<double> wide(q.begin(), q.end());
  return search(std::span<const double>(wide), k);
}

EmbeddingSet FlatIndex::to_embedding_set() const {
  std::vector<float> values(rows_.begin(), rows_.end());
  return EmbeddingSet(count(), dim_, std::move(values), SpaceTag::original);
}

FlatIndex build_flat(const EmbeddingSet& set) {
  if (set.space_tag() != SpaceTag::original) {
    throw ArgumentError("flat index is built over original-space embeddings");
  }
  FlatIndex index;
  index.dim_ = set.dim();
  index.rows_.reserve(set.count() * set.dim());
  index.ids_.reserve(set.count());
  for (std::size_t i = 0; i < set.count(); ++i) {
    std::vector<double> unit;
    try {
      unit = l2_normalize(set.row(i));
    } catch (const DegenerateVectorError&) {
      throw DegenerateVectorError("row " + std::to_string(i) +
                                  " has zero norm and cannot be indexed");
    }
    index.rows_.insert(index.rows_.end(), unit.begin(), unit.end());
    index.ids_.push_back(i);
  }
  return index;
}

std::vector<SearchHit> flat_search(const FlatIndex& index,
                                   std::span<const float> q, std::size_t k) {
  return index.search(q, k);
}

std::vector<SearchHit> flat_search(const FlatIndex& index,
                                   std::span<const double> q, std::size_t k) {
  return index.search(q, k);
}

}  // namespace latentsearch
