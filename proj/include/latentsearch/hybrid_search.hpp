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

#include <span>
#include <string>
#include <vector>

#include "latentsearch/autoencoder.hpp"
#include "latentsearch/embedding_io.hpp"
#include "latentsearch/hnsw_index.hpp"
#include "latentsearch/search_hit.hpp"

namespace latentsearch {

struct HybridConfig {
  std::size_t k = 5;
  std::size_t candidate_multiplier = 4;

  /// candidate_multiplier * k, before clamping to the corpus size.
  std::size_t candidate_count() const { return candidate_multiplier * k; }
  void validate() const;
};

/// Compress -> HNSW candidates -> latent cosine re-rank.
///
/// Owns the model, the graph and both embedding sets. Construction checks
/// that every latent row is the encoding of the matching original row to
/// within 1e-5 and that all parts agree on the corpus size.
class HybridPipeline {
 public:
  HybridPipeline(AutoencoderModel model, HnswIndex graph, EmbeddingSet latent,
                 EmbeddingSet original, std::vector<CorpusRecord> corpus = {});

  const AutoencoderModel& model() const { return model_; }
  const HnswIndex& graph() const { return graph_; }
  const EmbeddingSet& latent_set() const { return latent_; }
  const EmbeddingSet& original_set() const { return original_; }
  const std::vector<CorpusRecord>& corpus() const { return corpus_; }

  /// Text for a corpus id, empty when no corpus was attached.
  std::string text_of(std::uint64_t id) const;

 private:
  AutoencoderModel model_;
  HnswIndex graph_;
  EmbeddingSet latent_;
  EmbeddingSet original_;
  std::vector<CorpusRecord> corpus_;
};

/// Tolerance for the latent/original row consistency check.
inline constexpr double kLatentConsistencyTolerance = 1e-5;

std::vector<double> compress_query(const HybridPipeline& pipeline,
                                   std::span<const double> e_q);
std::vector<double> compress_query(const HybridPipeline& pipeline,
                                   std::span<const float> e_q);

/// K = min(candidate_multiplier * k, N) hits from the graph, searched with
/// ef = max(graph ef_search, K). Hits come back in the graph's order.
std::vector<SearchHit> retrieve_candidates(const HybridPipeline& pipeline,
                                           std::span<const double> z_q,
                                           const HybridConfig& config);

/// Cosine similarity of z_q against each candidate's latent row; returns
/// the k best in canonical order.
std::vector<SearchHit> rerank(std::span<const double> z_q,
                              std::span<const SearchHit> candidates,
                              const EmbeddingSet& latent_set, std::size_t k);

struct HybridHit {
  SearchHit hit;               // latent-space cosine
  double original_score = 0.0; // cosine between e_q and the original row
  std::string text;
};

struct HybridResult {
  std::vector<HybridHit> hits;
  double elapsed_seconds = 0.0;

  std::vector<SearchHit> latent_hits() const;
  /// Mean original-space cosine of the returned hits.
  double cross_space_similarity() const;
};

/// Full pipeline. elapsed_seconds covers compression, retrieval and
/// re-ranking on a monotonic clock.
HybridResult hybrid_search(const HybridPipeline& pipeline,
                           std::span<const float> e_q,
                           const HybridConfig& config);
HybridResult hybrid_search(const HybridPipeline& pipeline,
                           std::span<const double> e_q,
                           const HybridConfig& config);

}  // namespace latentsearch
