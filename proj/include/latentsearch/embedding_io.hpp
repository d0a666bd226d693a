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
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace latentsearch {

/// Which vector space a matrix lives in.
enum class SpaceTag { original, latent };

/// Dense row-major matrix of 32-bit floats, one row per corpus entry.
///
/// Construction validates shape and rejects NaN/Inf, so any instance that
/// exists satisfies the invariants and can be shared read-only.
class EmbeddingSet {
 public:
  EmbeddingSet(std::size_t count, std::size_t dim, std::vector<float> values,
               SpaceTag tag = SpaceTag::original);

  std::size_t count() const { return count_; }
  std::size_t dim() const { return dim_; }
  SpaceTag space_tag() const { return tag_; }

  std::span<const float> row(std::size_t i) const;
  std::span<const float> values() const { return values_; }

  /// Same values relabelled with another space tag.
  EmbeddingSet with_tag(SpaceTag tag) const;

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;

 private:
  std::size_t count_;
  std::size_t dim_;
  std::vector<float> values_;
  SpaceTag tag_;
};

/// Header size of an EMB1 file: magic(4) + version(2) + dim(4) + count(8).
inline constexpr std::size_t kEmb1HeaderBytes = 18;
inline constexpr std::uint16_t kEmb1Version = 1;

/// Writes `set` as EMB1 and returns the number of bytes written.
std::uint64_t write_emb1(const EmbeddingSet& set, std::ostream& out);

/// Parses an EMB1 stream. The payload must fill the remainder of the stream
/// exactly. The space tag is not stored on disk; callers say which one it is.
EmbeddingSet read_emb1(std::istream& in, SpaceTag tag = SpaceTag::original);

std::uint64_t save_emb1(const EmbeddingSet& set,
                        const std::filesystem::path& path);
EmbeddingSet load_emb1(const std::filesystem::path& path,
                       SpaceTag tag = SpaceTag::original);

struct SyntheticCorpus {
  EmbeddingSet set;
  std::vector<std::uint32_t> labels;
};

/// Deterministic clustered corpus of unit vectors.
///
/// Centroids are normalized standard-normal draws. Sample i belongs to
/// cluster i % clusters and equals normalize(centroid + noise) where the
/// noise vector is isotropic Gaussian with RMS norm `noise_norm` (each
/// component has standard deviation noise_norm / sqrt(dim)).
SyntheticCorpus generate_synthetic(std::size_t count, std::size_t dim,
                                   std::size_t clusters, std::uint64_t seed,
                                   double noise_norm = 0.1);

/// Fresh samples around the same centroids that generate_synthetic(…, seed)
/// uses, drawn from an independent stream keyed by `query_seed`.
SyntheticCorpus generate_synthetic_queries(std::size_t query_count,
                                           std::size_t dim,
                                           std::size_t clusters,
                                           std::uint64_t seed,
                                           std::uint64_t query_seed,
                                           double noise_norm = 0.1);

/// One line of the corpus metadata file.
struct CorpusRecord {
  std::uint64_t id = 0;
  std::string text;

  friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

/// Reads `{"id": <int>, "text": <string>}` per line. Blank lines and lines
/// starting with '#' are skipped; line numbers in errors are 1-based
/// physical lines.
std::vector<CorpusRecord> load_corpus_jsonl(std::istream& in);
std::vector<CorpusRecord> load_corpus_jsonl(const std::filesystem::path& path);

void write_corpus_jsonl(const std::vector<CorpusRecord>& records,
                        std::ostream& out);

/// Throws DataError unless record i has id i for every row of `set`.
void check_corpus_alignment(const std::vector<CorpusRecord>& records,
                            const EmbeddingSet& set);

}  // namespace latentsearch
