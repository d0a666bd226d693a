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

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "latentsearch/embedding_io.hpp"
#include "latentsearch/random.hpp"
#include "latentsearch/search_hit.hpp"

namespace latentsearch {

/// Graph construction and search parameters. Distance is cosine distance
/// (1 - cos); the level normalization factor is fixed at 1 / ln(m).
struct HnswConfig {
  std::size_t m = 16;
  std::size_t m_max0 = 32;
  std::size_t ef_construction = 200;
  std::size_t ef_search = 100;
  std::uint64_t seed = 100;

  double level_norm_factor() const;
  std::size_t cap(int level) const { return level == 0 ? m_max0 : m; }
  void validate() const;

  friend bool operator==(const HnswConfig&, const HnswConfig&) = default;
};

/// floor(-ln(u) / ln(m)) for u in (0, 1].
int assign_level(const HnswConfig& config, double u);

/// A node reached during a layer search, ordered by (distance, node).
struct LayerCandidate {
  std::uint32_t node = 0;
  double distance = 0.0;

  friend bool operator==(const LayerCandidate&, const LayerCandidate&) = default;
};

/// Hierarchical navigable small world graph over cosine distance.
///
/// Nodes are numbered in insertion order and carry an external id. Layer 0
/// holds every node; a node of level L also appears on layers 1..L. Each
/// adjacency list is capped (m_max0 on layer 0, m above) and chosen with the
/// diversity heuristic. After every insertion, a node left without incoming
/// edges on some layer is relinked from one of its own neighbors, so every
/// node stays reachable from the entry point in practice.
///
/// Construction is single-writer. A built index is safe to query from many
/// threads: queries keep their visited set on the stack of the call.
class HnswIndex {
 public:
  explicit HnswIndex(std::size_t dim, HnswConfig config = {});

  /// Throws ArgumentError on a duplicate id, ShapeError on a wrong length
  /// and DegenerateVectorError on a zero vector.
  void insert(std::span<const float> vector, std::uint64_t id);

  /// Inserts every row of `set` with id = row index.
  static HnswIndex build(const EmbeddingSet& set, HnswConfig config = {});

  /// Greedy best-first search restricted to one layer. Returns up to `ef`
  /// nodes sorted by ascending distance. Entry nodes must exist on `level`.
  std::vector<LayerCandidate> search_layer(std::span<const double> q,
                                           std::span<const std::uint32_t> entry_nodes,
                                           std::size_t ef, int level) const;

  /// Approximate k nearest neighbors. Scores are the exact cosine
  /// similarity between q and each returned vector.
  std::vector<SearchHit> knn_query(std::span<const double> q, std::size_t k,
                                   std::size_t ef_search) const;
  std::vector<SearchHit> knn_query(std::span<const float> q, std::size_t k,
                                   std::size_t ef_search) const;
  std::vector<SearchHit> knn_query(std::span<const float> q, std::size_t k) const {
    return knn_query(q, k, config_.ef_search);
  }

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  const HnswConfig& config() const { return config_; }
  bool empty() const { return ids_.empty(); }

  /// Node index of the entry point. Requires a non-empty graph.
  std::uint32_t entry_point() const;
  int max_level() const { return max_level_; }
  int node_level(std::uint32_t node) const { return levels_.at(node); }
  std::uint64_t node_id(std::uint32_t node) const { return ids_.at(node); }
  std::span<const std::uint32_t> neighbors(std::uint32_t node, int level) const;

  /// Cosine distance between two stored nodes.
  double node_distance(std::uint32_t a, std::uint32_t b) const;

  /// Throws StateError describing the first broken structural invariant
  /// (degree caps, self loops, dangling ids, entry point level).
  void check_invariants() const;

  // HNW1, little-endian: "HNW1", u16 version, u32 m, u32 m_max0,
  // u32 ef_construction, u32 ef_search, u64 seed, u32 dim, u64 count,
  // u64 entry node (all ones when empty), i32 max level, 4 x u64 level
  // stream state, then per node: u64 id, u32 level and for each layer
  // 0..level a u32 degree followed by that many u32 node indices.
  void write(std::ostream& out) const;
  /// Vectors are not part of the dump; node vectors are rows of `vectors`
  /// selected by node id.
  static HnswIndex read(std::istream& in, const EmbeddingSet& vectors);
  void save(const std::filesystem::path& path) const;
  static HnswIndex load(const std::filesystem::path& path, const EmbeddingSet& vectors);

 private:
  std::span<const double> unit(std::uint32_t node) const;
  double distance_to(std::span<const double> q, std::uint32_t node) const;
  std::vector<LayerCandidate> search_layer_unit(std::span<const double> unit_q,
                                                std::span<const std::uint32_t> entry_nodes,
                                                std::size_t ef, int level) const;
  std::vector<std::uint32_t> select_neighbors(const std::vector<LayerCandidate>& sorted,
                                              std::size_t limit) const;
  void add_edge(std::uint32_t from, std::uint32_t to, int level);
  void shrink(std::uint32_t node, int level, std::vector<std::uint32_t>& dropped);
  void relink_orphan(std::uint32_t node, int level);
  std::uint32_t append_node(std::span<const double> unit_vector, std::uint64_t id, int level);

  std::size_t dim_;
  HnswConfig config_;
  Xoshiro256 level_rng_;

  std::vector<double> units_;
  std::vector<std::uint64_t> ids_;
  std::unordered_map<std::uint64_t, std::uint32_t> node_of_id_;
  std::vector<int> levels_;
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;
  std::vector<std::vector<std::uint32_t>> in_degree_;
  std::uint32_t entry_ = 0;
  int max_level_ = -1;
};

inline constexpr std::uint16_t kHnw1Version = 1;

}  // namespace latentsearch
