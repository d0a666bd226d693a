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

#include "latentsearch/hybrid_search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "latentsearch/error.hpp"
#include "latentsearch/flat_index.hpp"

namespace latentsearch {

namespace {

template <typename A, typename B>
double cosine(std::span<const A> a, std::span<const B> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = static_cast<double>(a[i]);
    const auto y = static_cast<double>(b[i]);
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  const double denom = std::sqrt(na) * std::sqrt(nb);
  if (denom < kMinNorm) {
    throw DegenerateVectorError("cosine similarity of a zero-norm vector");
  }
  return dot / denom;
}

}  // namespace

void HybridConfig::validate() const {
  if (k == 0) throw ArgumentError("k must be positive");
  if (candidate_multiplier == 0) {
    throw ArgumentError("candidate_multiplier must be positive");
  }
}

HybridPipeline::HybridPipeline(AutoencoderModel model, HnswIndex graph,
                               EmbeddingSet latent, EmbeddingSet original,
                               std::vector<CorpusRecord> corpus)
    : model_(std::move(model)),
      graph_(std::move(graph)),
      latent_(std::move(latent)),
      original_(std::move(original)),
      corpus_(std::move(corpus)) {
  if (latent_.count() != original_.count()) {
    throw DataError("latent set has " + std::to_string(latent_.count()) +
                    " rows but original set has " +
                    std::to_string(original_.count()));
  }
  if (graph_.size() != latent_.count()) {
    throw DataError("graph holds " + std::to_string(graph_.size()) +
                    " nodes but latent set has " +
                    std::to_string(latent_.count()) + " rows");
  }
  if (original_.dim() != model_.input_dim() || latent_.dim() != model_.latent_dim() ||
      graph_.dim() != latent_.dim()) {
    throw ShapeError("model, graph and embedding dims disagree");
  }
  for (std::uint32_t n = 0; n < graph_.size(); ++n) {
    if (graph_.node_id(n) >= latent_.count()) {
      throw DataError("graph node id " + std::to_string(graph_.node_id(n)) +
                      " has no latent row");
    }
  }
  if (!corpus_.empty()) {
    check_corpus_alignment(corpus_, original_);
  }
  const EmbeddingSet expected = encode_set(model_, original_);
  for (std::size_t i = 0; i < latent_.count(); ++i) {
    const auto want = expected.row(i);
    const auto got = latent_.row(i);
    for (std::size_t j = 0; j < latent_.dim(); ++j) {
      const double diff = std::abs(static_cast<double>(want[j]) - got[j]);
      const double scale = std::max(1.0, std::abs(static_cast<double>(want[j])));
      if (diff > kLatentConsistencyTolerance * scale) {
        throw DataError("latent row " + std::to_string(i) +
                        " is not the encoding of original row " + std::to_string(i));
      }
    }
  }
}

std::string HybridPipeline::text_of(std::uint64_t id) const {
  return id < corpus_.size() ? corpus_[id].text : std::string{};
}

std::vector<double> compress_query(const HybridPipeline& pipeline,
                                   std::span<const double> e_q) {
  return encode(pipeline.model(), e_q);
}

std::vector<double> compress_query(const HybridPipeline& pipeline,
                                   std::span<const float> e_q) {
  return encode(pipeline.model(), e_q);
}

std::vector<SearchHit> retrieve_candidates(const HybridPipeline& pipeline,
                                           std::span<const double> z_q,
                                           const HybridConfig& config) {
  config.validate();
  const auto& graph = pipeline.graph();
  if (graph.empty()) throw StateError("pipeline corpus is empty");
  const std::size_t want = std::min(config.candidate_count(), graph.size());
  const std::size_t ef = std::max(graph.config().ef_search, want);
  return graph.knn_query(z_q, want, ef);
}

std::vector<SearchHit> rerank(std::span<const double> z_q,
                              std::span<const SearchHit> candidates,
                              const EmbeddingSet& latent_set, std::size_t k) {
  if (k == 0 || candidates.size() < k) {
    throw ArgumentError("cannot re-rank " + std::to_string(candidates.size()) +
                        " candidates down to k = " + std::to_string(k));
  }
  if (z_q.size() != latent_set.dim()) {
    throw ShapeError("latent query length does not match latent set dim");
  }
  std::vector<std::pair<std::uint64_t, double>> scored;
  scored.reserve(candidates.size());
  for (const auto& c : candidates) {
    scored.emplace_back(c.id, cosine(z_q, latent_set.row(c.id)));
  }
  return rank_hits(std::move(scored), k);
}

std::vector<SearchHit> HybridResult::latent_hits() const {
  std::vector<SearchHit> out;
  out.reserve(hits.size());
  for (const auto& h : hits) out.push_back(h.hit);
  return out;
}

double HybridResult::cross_space_similarity() const {
  if (hits.empty()) throw ArgumentError("no hits");
  double sum = 0.0;
  for (const auto& h : hits) sum += h.original_score;
  return sum / static_cast<double>(hits.size());
}

namespace {

template <typename T>
HybridResult hybrid_search_impl(const HybridPipeline& pipeline,
                                std::span<const T> e_q,
                                const HybridConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto z_q = compress_query(pipeline, e_q);
  const auto candidates = retrieve_candidates(pipeline, z_q, config);
  const auto top = rerank(z_q, candidates, pipeline.latent_set(), config.k);
  const auto stop = std::chrono::steady_clock::now();

  HybridResult result;
  result.elapsed_seconds = std::chrono::duration<double>(stop - start).count();
  for (const auto& hit : top) {
    result.hits.push_back(
        {hit, cosine(e_q, pipeline.original_set().row(hit.id)),
         pipeline.text_of(hit.id)});
  }
  return result;
}

}  // namespace

HybridResult hybrid_search(const HybridPipeline& pipeline,
                           std::span<const float> e_q,
                           const HybridConfig& config) {
  return hybrid_search_impl(pipeline, e_q, config);
}

HybridResult hybrid_search(const HybridPipeline& pipeline,
                           std::span<const double> e_q,
                           const HybridConfig& config) {
  return hybrid_search_impl(pipeline, e_q, config);
}

}  // namespace latentsearch
