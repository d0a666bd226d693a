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

#include "latentsearch/embedding_io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_map>

#include "latentsearch/detail/binary_io.hpp"
#include "latentsearch/error.hpp"
#include "latentsearch/random.hpp"

namespace latentsearch {

EmbeddingSet::EmbeddingSet(std::size_t count, std::size_t dim,
                           std::vector<float> values, SpaceTag tag)
    : count_(count), dim_(dim), values_(std::move(values)), tag_(tag) {
  if (dim_ == 0) {
    throw ArgumentError("embedding dim must be positive");
  }
  if (count_ == 0) {
    throw ArgumentError("embedding count must be positive");
  }
  if (count_ > std::numeric_limits<std::size_t>::max() / dim_ ||
      values_.size() != count_ * dim_) {
    throw ShapeError("embedding buffer holds " +
                     std::to_string(values_.size()) + " values, expected " +
                     std::to_string(count_) + " x " + std::to_string(dim_));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DataError("non-finite component at row " +
                      std::to_string(i / dim_) + ", column " +
                      std::to_string(i % dim_));
    }
  }
}

std::span<const float> EmbeddingSet::row(std::size_t i) const {
  if (i >= count_) {
    throw ArgumentError("row " + std::to_string(i) + " out of range (count " +
                        std::to_string(count_) + ")");
  }
  return std::span<const float>(values_).subspan(i * dim_, dim_);
}

EmbeddingSet EmbeddingSet::with_tag(SpaceTag tag) const {
  EmbeddingSet copy = *this;
  copy.tag_ = tag;
  return copy;
}

std::uint64_t write_emb1(const EmbeddingSet& set, std::ostream& out) {
  if (set.dim() > std::numeric_limits<std::uint32_t>::max()) {
    throw ArgumentError("dim does not fit EMB1 header");
  }
  detail::put_magic(out, "EMB1");
  detail::put_le(out, kEmb1Version);
  detail::put_le(out, static_cast<std::uint32_t>(set.dim()));
  detail::put_le(out, static_cast<std::uint64_t>(set.count()));
  for (float v : set.values()) {
    detail::put_f32(out, v);
  }
  if (!out) {
    throw IoError("failed writing EMB1 payload");
  }
  return kEmb1HeaderBytes + 4ULL * set.count() * set.dim();
}

EmbeddingSet read_emb1(std::istream& in, SpaceTag tag) {
  detail::expect_magic(in, "EMB1");
  const auto version = detail::get_le<std::uint16_t>(in, "EMB1 version");
  if (version != kEmb1Version) {
    throw FormatError("unsupported EMB1 version " + std::to_string(version));
  }
  const auto dim = detail::get_le<std::uint32_t>(in, "EMB1 dim");
  const auto count = detail::get_le<std::uint64_t>(in, "EMB1 count");
  if (dim == 0 || count == 0) {
    throw FormatError("EMB1 header declares an empty matrix");
  }

  std::string payload(std::istreambuf_iterator<char>(in), {});
  const std::uint64_t max_values = std::numeric_limits<std::uint64_t>::max() / 4;
  if (count > max_values / dim || payload.size() != 4 * count * dim) {
    throw FormatError("length mismatch: header declares " +
                      std::to_string(count) + " x " + std::to_string(dim) +
                      " floats, payload has " +
                      std::to_string(payload.size()) + " bytes");
  }

  std::istringstream body(std::move(payload));
  std::vector<float> values(count * dim);
  for (auto& v : values) {
    v = detail::get_f32(body, "EMB1 payload");
  }
  return EmbeddingSet(count, dim, std::move(values), tag);
}

std::uint64_t save_emb1(const EmbeddingSet& set,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  const auto written = write_emb1(set, out);
  out.close();
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
  return written;
}

EmbeddingSet load_emb1(const std::filesystem::path& path, SpaceTag tag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  try {
    return read_emb1(in, tag);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

namespace {

void normalize_in_place(std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  for (double& x : v) x /= norm;
}

std::vector<std::vector<double>> draw_centroids(Xoshiro256& rng,
                                                std::size_t clusters,
                                                std::size_t dim) {
  std::vector<std::vector<double>> centroids(clusters,
                                             std::vector<double>(dim));
  for (auto& c : centroids) {
    for (double& x : c) x = rng.normal();
    normalize_in_place(c);
  }
  return centroids;
}

SyntheticCorpus sample_around(const std::vector<std::vector<double>>& centroids,
                              std::size_t count, std::size_t dim,
                              double noise_norm, Xoshiro256& rng) {
  const double sigma = noise_norm / std::sqrt(static_cast<double>(dim));
  std::vector<float> values;
  values.reserve(count * dim);
  std::vector<std::uint32_t> labels(count);
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t label = i % centroids.size();
    labels[i] = static_cast<std::uint32_t>(label);
    for (std::size_t j = 0; j < dim; ++j) {
      v[j] = centroids[label][j] + sigma * rng.normal();
    }
    normalize_in_place(v);
    for (double x : v) values.push_back(static_cast<float>(x));
  }
  return {EmbeddingSet(count, dim, std::move(values)), std::move(labels)};
}

void check_synthetic_args(std::size_t count, std::size_t dim,
                          std::size_t clusters, double noise_norm) {
  if (count == 0 || dim == 0 || clusters == 0) {
    throw ArgumentError("count, dim and clusters must be positive");
  }
  if (clusters > count) {
    throw ArgumentError("clusters (" + std::to_string(clusters) +
                        ") exceeds count (" + std::to_string(count) + ")");
  }
  if (!(noise_norm >= 0.0) || !std::isfinite(noise_norm)) {
    throw ArgumentError("noise_norm must be finite and non-negative");
  }
}

}  // namespace

SyntheticCorpus generate_synthetic(std::size_t count, std::size_t dim,
                                   std::size_t clusters, std::uint64_t seed,
                                   double noise_norm) {
  check_synthetic_args(count, dim, clusters, noise_norm);
  Xoshiro256 rng(seed);
  const auto centroids = draw_centroids(rng, clusters, dim);
  return sample_around(centroids, count, dim, noise_norm, rng);
}

SyntheticCorpus generate_synthetic_queries(std::size_t query_count,
                                           std::size_t dim,
                                           std::size_t clusters,
                                           std::uint64_t seed,
                                           std::uint64_t query_seed,
                                           double noise_norm) {
  if (query_count == 0 || dim == 0 || clusters == 0) {
    throw ArgumentError("query_count, dim and clusters must be positive");
  }
  check_synthetic_args(clusters, dim, clusters, noise_norm);
  Xoshiro256 centroid_rng(seed);
  const auto centroids = draw_centroids(centroid_rng, clusters, dim);
  Xoshiro256 rng(query_seed);
  return sample_around(centroids, query_count, dim, noise_norm, rng);
}

std::vector<CorpusRecord> load_corpus_jsonl(std::istream& in) {
  std::vector<CorpusRecord> records;
  std::unordered_map<std::uint64_t, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("text") ||
        !obj["id"].is_number_integer() || !obj["text"].is_string()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected {\"id\": <int>, \"text\": <string>}");
    }
    if (obj["id"].is_number_integer() && !obj["id"].is_number_unsigned() &&
        obj["id"].get<std::int64_t>() < 0) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": id must be non-negative");
    }
    CorpusRecord rec{obj["id"].get<std::uint64_t>(),
                     obj["text"].get<std::string>()};
    if (auto [it, inserted] = seen.emplace(rec.id, line_no); !inserted) {
      throw DataError("duplicate id " + std::to_string(rec.id) + " on lines " +
                      std::to_string(it->second) + " and " +
                      std::to_string(line_no));
    }
    records.push_back(std::move(rec));
  }
  if (in.bad()) {
    throw IoError("failed reading corpus JSONL");
  }
  return records;
}

std::vector<CorpusRecord> load_corpus_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return load_corpus_jsonl(in);
}

void write_corpus_jsonl(const std::vector<CorpusRecord>& records,
                        std::ostream& out) {
  for (const auto& r : records) {
    out << nlohmann::json{{"id", r.id}, {"text", r.text}}.dump() << '\n';
  }
  if (!out) {
    throw IoError("failed writing corpus JSONL");
  }
}

void check_corpus_alignment(const std::vector<CorpusRecord>& records,
                            const EmbeddingSet& set) {
  if (records.size() != set.count()) {
    throw DataError("corpus has " + std::to_string(records.size()) +
                    " records but embeddings have " +
                    std::to_string(set.count()) + " rows");
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].id != i) {
      throw DataError("corpus record at row " + std::to_string(i) +
                      " has id " + std::to_string(records[i].id));
    }
  }
}

}  // namespace latentsearch
