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

#include "latentsearch/hnsw_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>

#include "latentsearch/detail/binary_io.hpp"
#include "latentsearch/error.hpp"
#include "latentsearch/flat_index.hpp"

namespace latentsearch {

namespace {

bool closer(const LayerCandidate& a, const LayerCandidate& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.node < b.node;
}

struct Farther {
  bool operator()(const LayerCandidate& a, const LayerCandidate& b) const {
    return closer(b, a);
  }
};

struct Closer {
  bool operator()(const LayerCandidate& a, const LayerCandidate& b) const {
    return closer(a, b);
  }
};

constexpr std::uint64_t kNoEntry = std::numeric_limits<std::uint64_t>::max();

}  // namespace

double HnswConfig::level_norm_factor() const {
  return 1.0 / std::log(static_cast<double>(m));
}

void HnswConfig::validate() const {
  if (m < 2) throw ArgumentError("m must be at least 2");
  if (m_max0 < m) throw ArgumentError("m_max0 must be at least m");
  if (ef_construction < m) throw ArgumentError("ef_construction must be at least m");
  if (ef_search < 1) throw ArgumentError("ef_search must be positive");
  if (m > std::numeric_limits<std::uint32_t>::max() ||
      m_max0 > std::numeric_limits<std::uint32_t>::max() ||
      ef_construction > std::numeric_limits<std::uint32_t>::max() ||
      ef_search > std::numeric_limits<std::uint32_t>::max()) {
    throw ArgumentError("HNSW parameters must fit in 32 bits");
  }
}

int assign_level(const HnswConfig& config, double u) {
  if (!(u > 0.0 && u <= 1.0)) {
    throw ArgumentError("level draw must lie in (0, 1]");
  }
  // Dividing by ln(m) rather than multiplying by 1/ln(m) keeps exact powers
  // of 1/m on the right side of the floor.
  return static_cast<int>(
      std::floor(-std::log(u) / std::log(static_cast<double>(config.m))));
}

HnswIndex::HnswIndex(std::size_t dim, HnswConfig config)
    : dim_(dim), config_(config), level_rng_(config.seed) {
  if (dim_ == 0) throw ArgumentError("dim must be positive");
  config_.validate();
}

HnswIndex HnswIndex::build(const EmbeddingSet& set, HnswConfig config) {
  HnswIndex index(set.dim(), config);
  for (std::size_t i = 0; i < set.count(); ++i) {
    index.insert(set.row(i), i);
  }
  return index;
}

std::uint32_t HnswIndex::entry_point() const {
  if (empty()) throw StateError("graph is empty");
  return entry_;
}

std::span<const std::uint32_t> HnswIndex::neighbors(std::uint32_t node, int level) const {
  if (node >= size() || level < 0 || level > levels_[node]) {
    throw ArgumentError("node " + std::to_string(node) + " has no layer " +
                        std::to_string(level));
  }
  return links_[node][static_cast<std::size_t>(level)];
}

std::span<const double> HnswIndex::unit(std::uint32_t node) const {
  return std::span<const double>(units_).subspan(std::size_t{node} * dim_, dim_);
}

double HnswIndex::distance_to(std::span<const double> q, std::uint32_t node) const {
  const double* v = units_.data() + std::size_t{node} * dim_;
  double dot = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) dot += q[j] * v[j];
  return 1.0 - dot;
}

double HnswIndex::node_distance(std::uint32_t a, std::uint32_t b) const {
  return distance_to(unit(a), b);
}

std::vector<LayerCandidate> HnswIndex::search_layer_unit(
    std::span<const double> unit_q, std::span<const std::uint32_t> entry_nodes,
    std::size_t ef, int level) const {
  std::vector<char> visited(size(), 0);
  std::priority_queue<LayerCandidate, std::vector<LayerCandidate>, Farther> frontier;
  std::priority_queue<LayerCandidate, std::vector<LayerCandidate>, Closer> best;

  for (std::uint32_t e : entry_nodes) {
    if (visited[e]) continue;
    visited[e] = 1;
    const LayerCandidate c{e, distance_to(unit_q, e)};
    frontier.push(c);
    best.push(c);
    if (best.size() > ef) best.pop();
  }

  while (!frontier.empty()) {
    const LayerCandidate current = frontier.top();
    if (best.size() >= ef && closer(best.top(), current)) break;
    frontier.pop();
    for (std::uint32_t nb : links_[current.node][static_cast<std::size_t>(level)]) {
      if (visited[nb]) continue;
      visited[nb] = 1;
      const LayerCandidate c{nb, distance_to(unit_q, nb)};
      if (best.size() < ef || closer(c, best.top())) {
        frontier.push(c);
        best.push(c);
        if (best.size() > ef) best.pop();
      }
    }
  }

  std::vector<LayerCandidate> out(best.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = best.top();
    best.pop();
  }
  return out;
}

std::vector<LayerCandidate> HnswIndex::search_layer(
    std::span<const double> q, std::span<const std::uint32_t> entry_nodes,
    std::size_t ef, int level) const {
  if (q.size() != dim_) throw ShapeError("query length does not match graph dim");
  if (ef == 0) throw ArgumentError("ef must be positive");
  if (entry_nodes.empty()) throw ArgumentError("search_layer needs an entry node");
  for (std::uint32_t e : entry_nodes) {
    if (e >= size() || levels_[e] < level || level < 0) {
      throw ArgumentError("entry node " + std::to_string(e) + " is not on layer " +
                          std::to_string(level));
    }
  }
  const auto unit_q = l2_normalize(q);
  return search_layer_unit(unit_q, entry_nodes, ef, level);
}

// Diversity heuristic: walk candidates nearest first and keep one only if
// it is closer to the base than to every neighbor kept so far.
std::vector<std::uint32_t> HnswIndex::select_neighbors(
    const std::vector<LayerCandidate>& sorted, std::size_t limit) const {
  std::vector<std::uint32_t> kept;
  if (sorted.size() <= limit) {
    for (const auto& c : sorted) kept.push_back(c.node);
    return kept;
  }
  for (const auto& c : sorted) {
    if (kept.size() >= limit) break;
    bool diverse = true;
    for (std::uint32_t r : kept) {
      if (node_distance(c.node, r) < c.distance) {
        diverse = false;
        break;
      }
    }
    if (diverse) kept.push_back(c.node);
  }
  return kept;
}

void HnswIndex::add_edge(std::uint32_t from, std::uint32_t to, int level) {
  links_[from][static_cast<std::size_t>(level)].push_back(to);
  ++in_degree_[to][static_cast<std::size_t>(level)];
}

void HnswIndex::shrink(std::uint32_t node, int level,
                       std::vector<std::uint32_t>& dropped) {
  auto& list = links_[node][static_cast<std::size_t>(level)];
  const std::size_t cap = config_.cap(level);
  if (list.size() <= cap) return;

  std::vector<LayerCandidate> scored;
  scored.reserve(list.size());
  for (std::uint32_t nb : list) scored.push_back({nb, node_distance(node, nb)});
  std::sort(scored.begin(), scored.end(), closer);
  auto kept = select_neighbors(scored, cap);

  for (std::uint32_t nb : list) {
    if (std::find(kept.begin(), kept.end(), nb) == kept.end()) {
      --in_degree_[nb][static_cast<std::size_t>(level)];
      dropped.push_back(nb);
    }
  }
  list = std::move(kept);
}

// Gives `node` an incoming edge on `level` from one of its own neighbors:
// first any neighbor with a free slot, otherwise the nearest neighbor gives
// up its farthest link whose target keeps another incoming edge.
void HnswIndex::relink_orphan(std::uint32_t node, int level) {
  const auto lvl = static_cast<std::size_t>(level);
  std::vector<LayerCandidate> outs;
  for (std::uint32_t w : links_[node][lvl]) outs.push_back({w, node_distance(node, w)});
  std::sort(outs.begin(), outs.end(), closer);

  for (const auto& w : outs) {
    auto& list = links_[w.node][lvl];
    if (list.size() < config_.cap(level)) {
      add_edge(w.node, node, level);
      return;
    }
  }
  for (const auto& w : outs) {
    auto& list = links_[w.node][lvl];
    std::ptrdiff_t victim = -1;
    double victim_distance = -1.0;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::uint32_t u = list[i];
      if (u == node || in_degree_[u][lvl] < 2) continue;
      const double d = node_distance(w.node, u);
      if (d > victim_distance) {
        victim_distance = d;
        victim = static_cast<std::ptrdiff_t>(i);
      }
    }
    if (victim >= 0) {
      --in_degree_[list[static_cast<std::size_t>(victim)]][lvl];
      list[static_cast<std::size_t>(victim)] = node;
      ++in_degree_[node][lvl];
      return;
    }
  }
}

std::uint32_t HnswIndex::append_node(std::span<const double> unit_vector,
                                     std::uint64_t id, int level) {
  if (size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw StateError("graph is full");
  }
  const auto node = static_cast<std::uint32_t>(size());
  units_.insert(units_.end(), unit_vector.begin(), unit_vector.end());
  ids_.push_back(id);
  node_of_id_.emplace(id, node);
  levels_.push_back(level);
  links_.emplace_back(static_cast<std::size_t>(level) + 1);
  in_degree_.emplace_back(static_cast<std::size_t>(level) + 1, 0);
  return node;
}

void HnswIndex::insert(std::span<const float> vector, std::uint64_t id) {
  if (vector.size() != dim_) {
    throw ShapeError("vector has length " + std::to_string(vector.size()) +
                     ", graph dim is " + std::to_string(dim_));
  }
  if (node_of_id_.contains(id)) {
    throw ArgumentError("id " + std::to_string(id) + " is already in the graph");
  }
  const auto unit_vector = l2_normalize(vector);
  const int level = assign_level(config_, level_rng_.uniform_open_closed());
  const std::uint32_t node = append_node(unit_vector, id, level);

  if (max_level_ < 0) {
    entry_ = node;
    max_level_ = level;
    return;
  }

  std::vector<std::uint32_t> entries{entry_};
  for (int l = max_level_; l > level; --l) {
    entries = {search_layer_unit(unit_vector, entries, 1, l).front().node};
  }

  std::vector<std::pair<std::uint32_t, int>> watch;
  for (int l = std::min(level, max_level_); l >= 0; --l) {
    const auto candidates =
        search_layer_unit(unit_vector, entries, config_.ef_construction, l);
    const auto chosen = select_neighbors(candidates, config_.m);
    std::vector<std::uint32_t> dropped;
    for (std::uint32_t nb : chosen) {
      add_edge(node, nb, l);
      add_edge(nb, node, l);
      shrink(nb, l, dropped);
    }
    for (std::uint32_t d : dropped) watch.emplace_back(d, l);
    watch.emplace_back(node, l);

    entries.clear();
    for (const auto& c : candidates) entries.push_back(c.node);
  }

  if (level > max_level_) {
    for (int l = 0; l <= max_level_; ++l) watch.emplace_back(entry_, l);
    entry_ = node;
    max_level_ = level;
  }

  for (const auto& [n, l] : watch) {
    if (n != entry_ && in_degree_[n][static_cast<std::size_t>(l)] == 0) {
      relink_orphan(n, l);
    }
  }
}

std::vector<SearchHit> HnswIndex::knn_query(std::span<const double> q,
                                            std::size_t k,
                                            std::size_t ef_search) const {
  if (empty()) throw StateError("graph is empty");
  if (q.size() != dim_) {
    throw ShapeError("query has length " + std::to_string(q.size()) +
                     ", graph dim is " + std::to_string(dim_));
  }
  if (k == 0 || k > size()) {
    throw ArgumentError("K = " + std::to_string(k) + " must lie in [1, " +
                        std::to_string(size()) + "]");
  }
  if (ef_search < k) {
    throw ArgumentError("ef_search (" + std::to_string(ef_search) +
                        ") must be at least K (" + std::to_string(k) + ")");
  }
  const auto unit_q = l2_normalize(q);
  std::vector<std::uint32_t> entries{entry_};
  for (int l = max_level_; l > 0; --l) {
    entries = {search_layer_unit(unit_q, entries, 1, l).front().node};
  }
  const auto found = search_layer_unit(unit_q, entries, ef_search, 0);

  std::vector<std::pair<std::uint64_t, double>> scored;
  scored.reserve(found.size());
  for (const auto& c : found) {
    const auto v = unit(c.node);
    double dot = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) dot += unit_q[j] * v[j];
    scored.emplace_back(ids_[c.node], dot);
  }
  return rank_hits(std::move(scored), k);
}

std::vector<SearchHit> HnswIndex::knn_query(std::span<const float> q,
                                            std::size_t k,
                                            std::size_t ef_search) const {
  std::vector<double> wide(q.begin(), q.end());
  return knn_query(std::span<const double>(wide), k, ef_search);
}

void HnswIndex::check_invariants() const {
  for (std::uint32_t n = 0; n < size(); ++n) {
    for (int l = 0; l <= levels_[n]; ++l) {
      const auto& list = links_[n][static_cast<std::size_t>(l)];
      if (list.size() > config_.cap(l)) {
        throw StateError("node " + std::to_string(n) + " exceeds degree cap on layer " +
                         std::to_string(l));
      }
      for (std::uint32_t nb : list) {
        if (nb == n) {
          throw StateError("node " + std::to_string(n) + " links to itself");
        }
        if (nb >= size() || levels_[nb] < l) {
          throw StateError("node " + std::to_string(n) + " links to missing node " +
                           std::to_string(nb) + " on layer " + std::to_string(l));
        }
      }
    }
  }
  if (!empty()) {
    const int top = *std::max_element(levels_.begin(), levels_.end());
    if (levels_[entry_] != top || max_level_ != top) {
      throw StateError("entry point is not on the top layer");
    }
  }
}

void HnswIndex::write(std::ostream& out) const {
  detail::put_magic(out, "HNW1");
  detail::put_le(out, kHnw1Version);
  detail::put_le(out, static_cast<std::uint32_t>(config_.m));
  detail::put_le(out, static_cast<std::uint32_t>(config_.m_max0));
  detail::put_le(out, static_cast<std::uint32_t>(config_.ef_construction));
  detail::put_le(out, static_cast<std::uint32_t>(config_.ef_search));
  detail::put_le(out, config_.seed);
  detail::put_le(out, static_cast<std::uint32_t>(dim_));
  detail::put_le(out, static_cast<std::uint64_t>(size()));
  detail::put_le(out, empty() ? kNoEntry : std::uint64_t{entry_});
  detail::put_i32(out, max_level_);
  for (std::uint64_t s : level_rng_.state()) detail::put_le(out, s);
  for (std::uint32_t n = 0; n < size(); ++n) {
    detail::put_le(out, ids_[n]);
    detail::put_le(out, static_cast<std::uint32_t>(levels_[n]));
    for (const auto& list : links_[n]) {
      detail::put_le(out, static_cast<std::uint32_t>(list.size()));
      for (std::uint32_t nb : list) detail::put_le(out, nb);
    }
  }
  if (!out) throw IoError("failed writing HNW1 graph");
}

HnswIndex HnswIndex::read(std::istream& in, const EmbeddingSet& vectors) {
  detail::expect_magic(in, "HNW1");
  const auto version = detail::get_le<std::uint16_t>(in, "HNW1 version");
  if (version != kHnw1Version) {
    throw FormatError("unsupported HNW1 version " + std::to_string(version));
  }
  HnswConfig config;
  config.m = detail::get_le<std::uint32_t>(in, "HNW1 m");
  config.m_max0 = detail::get_le<std::uint32_t>(in, "HNW1 m_max0");
  config.ef_construction = detail::get_le<std::uint32_t>(in, "HNW1 ef_construction");
  config.ef_search = detail::get_le<std::uint32_t>(in, "HNW1 ef_search");
  config.seed = detail::get_le<std::uint64_t>(in, "HNW1 seed");
  const auto dim = detail::get_le<std::uint32_t>(in, "HNW1 dim");
  const auto count = detail::get_le<std::uint64_t>(in, "HNW1 count");
  const auto entry = detail::get_le<std::uint64_t>(in, "HNW1 entry point");
  const auto max_level = detail::get_i32(in, "HNW1 max level");
  std::array<std::uint64_t, 4> rng_state{};
  for (auto& s : rng_state) s = detail::get_le<std::uint64_t>(in, "HNW1 rng state");

  HnswIndex index = [&] {
    try {
      return HnswIndex(dim, config);
    } catch (const ArgumentError& e) {
      throw FormatError(std::string("HNW1 header: ") + e.what());
    }
  }();
  if (dim != vectors.dim()) {
    throw ShapeError("HNW1 graph has dim " + std::to_string(dim) +
                     " but vectors have dim " + std::to_string(vectors.dim()));
  }
  if (count > vectors.count() || count > std::numeric_limits<std::uint32_t>::max()) {
    throw DataError("HNW1 graph has more nodes than the vector set has rows");
  }
  index.level_rng_.set_state(rng_state);

  for (std::uint64_t n = 0; n < count; ++n) {
    const auto id = detail::get_le<std::uint64_t>(in, "HNW1 node id");
    const auto level = detail::get_le<std::uint32_t>(in, "HNW1 node level");
    if (id >= vectors.count()) {
      throw DataError("HNW1 node id " + std::to_string(id) + " has no vector row");
    }
    if (index.node_of_id_.contains(id)) {
      throw FormatError("HNW1 repeats node id " + std::to_string(id));
    }
    if (level > 64) throw FormatError("HNW1 node level out of range");
    const auto unit_vector = l2_normalize(vectors.row(id));
    const auto node = index.append_node(unit_vector, id, static_cast<int>(level));
    for (auto& list : index.links_[node]) {
      const auto degree = detail::get_le<std::uint32_t>(in, "HNW1 degree");
      if (degree > count) throw FormatError("HNW1 degree out of range");
      list.resize(degree);
      for (auto& nb : list) {
        nb = detail::get_le<std::uint32_t>(in, "HNW1 adjacency");
        if (nb >= count) throw FormatError("HNW1 adjacency refers to a missing node");
      }
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after HNW1 graph");
  }

  if (count == 0) {
    if (entry != kNoEntry || max_level != -1) {
      throw FormatError("HNW1 empty graph has an entry point");
    }
    return index;
  }
  if (entry >= count) throw FormatError("HNW1 entry point out of range");
  index.entry_ = static_cast<std::uint32_t>(entry);
  index.max_level_ = max_level;
  for (std::uint32_t n = 0; n < index.size(); ++n) {
    for (int l = 0; l <= index.levels_[n]; ++l) {
      for (std::uint32_t nb : index.links_[n][static_cast<std::size_t>(l)]) {
        if (nb < index.size() && index.levels_[nb] >= l) {
          ++index.in_degree_[nb][static_cast<std::size_t>(l)];
        }
      }
    }
  }
  try {
    index.check_invariants();
  } catch (const StateError& e) {
    throw FormatError(std::string("HNW1 graph is inconsistent: ") + e.what());
  }
  return index;
}

void HnswIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write(out);
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

HnswIndex HnswIndex::load(const std::filesystem::path& path, const EmbeddingSet& vectors) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read(in, vectors);
}

}  // namespace latentsearch
