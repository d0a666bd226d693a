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

#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "latentsearch/error.hpp"
#include "latentsearch/flat_index.hpp"
#include "latentsearch/hybrid_search.hpp"
#include "oracles.hpp"

using namespace latentsearch;
namespace lt = latentsearch::testing;

namespace {

std::vector<std::uint64_t> hit_ids(const std::vector<SearchHit>& hits) {
  std::vector<std::uint64_t> ids;
  for (const auto& h : hits) ids.push_back(h.id);
  return ids;
}

double mean_of_first(const std::vector<SearchHit>& hits, std::size_t k) {
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) total += hits[i].score;
  return total / static_cast<double>(k);
}

}  // namespace

TEST(HybridConfig, CandidateCountAndValidation) {
  HybridConfig c;
  EXPECT_EQ(c.candidate_count(), 20u);
  c.k = 0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.candidate_multiplier = 0;
  EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(CompressQuery, DelegatesToEncoder) {
  const auto& p = lt::synthetic_pipeline();
  const auto q = p.queries.row(0);
  EXPECT_EQ(compress_query(p.pipeline, q), encode(p.model, q));
  const auto want = lt::naive_forward(p.model.encoder(), lt::to_double(q));
  const auto got = compress_query(p.pipeline, q);
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_NEAR(got[i], want[i], 1e-5 * std::max(1.0, std::abs(want[i])));
  }
  std::vector<float> wrong(100, 1.0f);
  EXPECT_THROW(compress_query(p.pipeline, std::span<const float>(wrong)), ShapeError);
}

TEST(CompressQuery, ZeroModelGivesZero) {
  auto model = init_model(16, 8, 4, 0);
  for (auto& l : model.mutable_layers()) {
    l.weights.setZero();
    l.bias.setZero();
  }
  // A zero model maps everything to the zero code, which cannot be indexed,
  // so check the compression step on its own.
  const auto z = encode(model, lt::random_set(1, 16, 1).row(0));
  for (double v : z) EXPECT_EQ(v, 0.0);
}

TEST(RetrieveCandidates, RequestsMultiplierTimesK) {
  const auto& p = lt::synthetic_pipeline();
  const auto z = compress_query(p.pipeline, p.queries.row(0));
  EXPECT_EQ(retrieve_candidates(p.pipeline, z, HybridConfig{5, 4}).size(), 20u);
  EXPECT_EQ(retrieve_candidates(p.pipeline, z, HybridConfig{5, 200}).size(), 500u);
  EXPECT_EQ(retrieve_candidates(p.pipeline, z, HybridConfig{3, 1}).size(), 3u);
}

TEST(RetrieveCandidates, ContainBruteForceTopK) {
  const auto& p = lt::synthetic_pipeline();
  const HybridConfig config;
  int covered = 0;
  for (std::size_t qi = 0; qi < p.queries.count(); ++qi) {
    const auto z = compress_query(p.pipeline, p.queries.row(qi));
    const auto truth = lt::ids_of(lt::brute_force_cosine(p.latent, z, config.k));
    const auto got = hit_ids(retrieve_candidates(p.pipeline, z, config));
    const bool all = std::all_of(truth.begin(), truth.end(), [&](std::uint64_t id) {
      return std::find(got.begin(), got.end(), id) != got.end();
    });
    if (all) ++covered;
  }
  EXPECT_GE(covered, 95);
}

TEST(Rerank, DuplicateBeatsOrthogonal) {
  std::vector<float> rows{1, 2, 0, 0,
                          0, 0, 3, 1};
  const EmbeddingSet latent(2, 4, rows, SpaceTag::latent);
  const std::vector<double> z{1, 2, 0, 0};
  const std::vector<SearchHit> candidates{{1, 0.0, 0}, {0, 0.0, 1}};
  const auto hits = rerank(z, candidates, latent, 1);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].id, 0u);
  EXPECT_NEAR(hits[0].score, 1.0, 1e-12);
}

TEST(Rerank, FullLengthIsSortedPermutation) {
  const auto latent = lt::random_set(30, 8, 4, SpaceTag::latent);
  const auto z = lt::to_double(lt::random_set(1, 8, 5).row(0));
  std::vector<SearchHit> candidates;
  for (std::uint64_t id : {17u, 3u, 25u, 8u, 0u, 12u}) candidates.push_back({id, 0.0, 0});
  const auto hits = rerank(z, candidates, latent, candidates.size());
  ASSERT_EQ(hits.size(), candidates.size());
  auto ids = hit_ids(hits);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    EXPECT_EQ(hits[i].rank, i);
    EXPECT_NEAR(hits[i].score, lt::cosine(z, lt::to_double(latent.row(hits[i].id))), 1e-12);
    if (i + 1 < hits.size()) EXPECT_GE(hits[i].score, hits[i + 1].score);
  }
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(ids, (std::vector<std::uint64_t>{0, 3, 8, 12, 17, 25}));
}

TEST(Rerank, TiesBreakByAscendingId) {
  std::vector<float> rows{1, 0, 1, 0, 2, 0};
  const EmbeddingSet latent(3, 2, rows, SpaceTag::latent);
  const std::vector<double> z{1, 0};
  const std::vector<SearchHit> candidates{{2, 0.0, 0}, {1, 0.0, 1}, {0, 0.0, 2}};
  EXPECT_EQ(hit_ids(rerank(z, candidates, latent, 3)), (std::vector<std::uint64_t>{0, 1, 2}));
}

TEST(Rerank, Errors) {
  const auto latent = lt::random_set(5, 4, 1, SpaceTag::latent);
  const std::vector<double> z{1, 0, 0, 0};
  const std::vector<SearchHit> two{{0, 0.0, 0}, {1, 0.0, 1}};
  EXPECT_THROW(rerank(z, two, latent, 3), ArgumentError);
  const std::vector<double> zero(4, 0.0);
  EXPECT_THROW(rerank(zero, two, latent, 1), DegenerateVectorError);
}

TEST(Rerank, WholeCorpusEqualsBruteForce) {
  const auto& p = lt::synthetic_pipeline();
  std::vector<SearchHit> all;
  for (std::uint64_t i = 0; i < p.latent.count(); ++i) all.push_back({i, 0.0, 0});
  for (std::size_t qi = 0; qi < 10; ++qi) {
    const auto z = compress_query(p.pipeline, p.queries.row(qi));
    const auto hits = rerank(z, all, p.latent, 5);
    const auto truth = lt::brute_force_cosine(p.latent, z, 5);
    EXPECT_EQ(hit_ids(hits), lt::ids_of(truth));
  }
}

TEST(Rerank, NeverWorseThanRawCandidateOrder) {
  const auto& p = lt::synthetic_pipeline();
  const HybridConfig config;
  for (std::size_t qi = 0; qi < p.queries.count(); ++qi) {
    const auto z = compress_query(p.pipeline, p.queries.row(qi));
    const auto raw = retrieve_candidates(p.pipeline, z, config);
    const auto ranked = rerank(z, raw, p.latent, config.k);
    EXPECT_GE(mean_of_first(ranked, config.k) + 1e-12, mean_of_first(raw, config.k));
  }
}

TEST(HybridSearch, ClampedMultiplierMatchesLatentBruteForce) {
  const auto& p = lt::synthetic_pipeline();
  const HybridConfig config{5, 200};
  for (std::size_t qi = 0; qi < 20; ++qi) {
    const auto result = hybrid_search(p.pipeline, p.queries.row(qi), config);
    const auto z = compress_query(p.pipeline, p.queries.row(qi));
    EXPECT_EQ(hit_ids(result.latent_hits()), lt::ids_of(lt::brute_force_cosine(p.latent, z, 5)));
  }
}

TEST(HybridSearch, ReportsBothSpacesAndTiming) {
  const auto& p = lt::synthetic_pipeline();
  const auto q = lt::to_double(p.queries.row(3));
  const auto result = hybrid_search(p.pipeline, std::span<const double>(q), HybridConfig{});
  ASSERT_EQ(result.hits.size(), 5u);
  EXPECT_GT(result.elapsed_seconds, 0.0);
  double cross = 0.0;
  for (const auto& h : result.hits) {
    EXPECT_NEAR(h.original_score, lt::cosine(q, lt::to_double(p.original.row(h.hit.id))), 1e-9);
    EXPECT_TRUE(h.text.empty());
    cross += h.original_score;
  }
  EXPECT_NEAR(result.cross_space_similarity(), cross / 5.0, 1e-12);
}

TEST(HybridSearch, DeterministicApartFromTiming) {
  const auto& p = lt::synthetic_pipeline();
  for (std::size_t qi = 0; qi < 5; ++qi) {
    const auto a = hybrid_search(p.pipeline, p.queries.row(qi), HybridConfig{});
    const auto b = hybrid_search(p.pipeline, p.queries.row(qi), HybridConfig{});
    ASSERT_EQ(a.hits.size(), b.hits.size());
    for (std::size_t i = 0; i < a.hits.size(); ++i) {
      EXPECT_EQ(a.hits[i].hit, b.hits[i].hit);
      EXPECT_EQ(a.hits[i].original_score, b.hits[i].original_score);
    }
  }
}

TEST(HybridPipeline, AttachesCorpusText) {
  const auto& p = lt::synthetic_pipeline();
  std::vector<CorpusRecord> corpus;
  for (std::uint64_t i = 0; i < 500; ++i) corpus.push_back({i, "doc " + std::to_string(i)});
  HybridPipeline with_text(p.model, p.pipeline.graph(), p.latent, p.original, corpus);
  EXPECT_EQ(with_text.text_of(7), "doc 7");
  const auto result = hybrid_search(with_text, p.queries.row(0), HybridConfig{});
  for (const auto& h : result.hits) EXPECT_EQ(h.text, "doc " + std::to_string(h.hit.id));

  corpus.pop_back();
  EXPECT_THROW(HybridPipeline(p.model, p.pipeline.graph(), p.latent, p.original, corpus),
               DataError);
}

TEST(HybridPipeline, RejectsInconsistentParts) {
  const auto& p = lt::synthetic_pipeline();
  const auto other_model = init_model(384, 256, 128, 99);
  EXPECT_THROW(HybridPipeline(other_model, p.pipeline.graph(), p.latent, p.original),
               DataError);

  const auto small = generate_synthetic(100, 384, 8, 42).set;
  EXPECT_THROW(HybridPipeline(p.model, p.pipeline.graph(), encode_set(p.model, small), small),
               DataError);

  const auto narrow = init_model(384, 256, 64, 0);
  EXPECT_THROW(HybridPipeline(narrow, p.pipeline.graph(), p.latent, p.original), ShapeError);
}
