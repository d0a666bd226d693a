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

#include "latentsearch/autoencoder.hpp"
#include "latentsearch/embedding_io.hpp"
#include "latentsearch/hnsw_index.hpp"
#include "latentsearch/hybrid_search.hpp"

namespace latentsearch::testing {

/// The 500 x 384, 8-cluster synthetic corpus (seed 42) with a model trained
/// for 10 epochs (init seed 0, shuffle seed 1) and the graph over its codes.
struct SyntheticPipeline {
  EmbeddingSet original;
  EmbeddingSet queries;
  AutoencoderModel model;
  EmbeddingSet latent;
  HybridPipeline pipeline;
};

inline SyntheticPipeline make_synthetic_pipeline() {
  auto original = generate_synthetic(500, 384, 8, 42).set;
  auto queries = generate_synthetic_queries(100, 384, 8, 42, 43, 0.1).set;
  TrainConfig config;
  config.seed = 1;
  auto model = train(init_model(384, 256, 128, 0), original, config).first;
  auto latent = encode_set(model, original);
  auto graph = HnswIndex::build(latent);
  HybridPipeline pipeline(model, std::move(graph), latent, original);
  return SyntheticPipeline{std::move(original), std::move(queries), std::move(model),
                           std::move(latent), std::move(pipeline)};
}

inline const SyntheticPipeline& synthetic_pipeline() {
  static const SyntheticPipeline p = make_synthetic_pipeline();
  return p;
}

}  // namespace latentsearch::testing
