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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "latentsearch/autoencoder.hpp"
#include "latentsearch/bench.hpp"
#include "latentsearch/embedding_io.hpp"
#include "latentsearch/error.hpp"
#include "latentsearch/flat_index.hpp"
#include "latentsearch/hnsw_index.hpp"
#include "latentsearch/hybrid_search.hpp"

namespace py = pybind11;
using namespace latentsearch;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

EmbeddingSet set_from_array(const FloatArray& a, SpaceTag tag) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  std::vector<float> values(a.data(), a.data() + rows * cols);
  return EmbeddingSet(rows, cols, std::move(values), tag);
}

FloatArray set_to_array(const EmbeddingSet& set) {
  FloatArray out({set.count(), set.dim()});
  std::copy(set.values().begin(), set.values().end(), out.mutable_data());
  return out;
}

std::span<const float> vector_span(const FloatArray& a) {
  if (a.ndim() != 1) throw ShapeError("expected a 1-d array");
  return {a.data(), static_cast<std::size_t>(a.shape(0))};
}

py::list hits_to_list(const std::vector<SearchHit>& hits) {
  py::list out;
  for (const auto& h : hits) out.append(py::make_tuple(h.id, h.score));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Latent-space vector search: autoencoder compression, HNSW and flat search.";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<DegenerateVectorError>(m, "DegenerateVectorError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<StateError>(m, "StateError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::enum_<SpaceTag>(m, "SpaceTag")
      .value("original", SpaceTag::original)
      .value("latent", SpaceTag::latent);

  py::class_<EmbeddingSet>(m, "EmbeddingSet")
      .def(py::init(&set_from_array), py::arg("values"), py::arg("tag") = SpaceTag::original)
      .def_property_readonly("count", &EmbeddingSet::count)
      .def_property_readonly("dim", &EmbeddingSet::dim)
      .def_property_readonly("space_tag", &EmbeddingSet::space_tag)
      .def("to_numpy", &set_to_array)
      .def("__len__", &EmbeddingSet::count)
      .def("__eq__", [](const EmbeddingSet& a, const EmbeddingSet& b) { return a == b; });

  m.def("load_emb1", &load_emb1, py::arg("path"), py::arg("tag") = SpaceTag::original);
  m.def("save_emb1", &save_emb1, py::arg("set"), py::arg("path"));
  m.def(
      "generate_synthetic",
      [](std::size_t count, std::size_t dim, std::size_t clusters, std::uint64_t seed,
         double noise_norm) {
        auto c = generate_synthetic(count, dim, clusters, seed, noise_norm);
        return py::make_tuple(std::move(c.set), std::move(c.labels));
      },
      py::arg("count") = 500, py::arg("dim") = 384, py::arg("clusters") = 8,
      py::arg("seed") = 42, py::arg("noise_norm") = 0.1);

  py::class_<AutoencoderModel>(m, "AutoencoderModel")
      .def_property_readonly("input_dim", &AutoencoderModel::input_dim)
      .def_property_readonly("latent_dim", &AutoencoderModel::latent_dim)
      .def_property_readonly("parameter_count", &AutoencoderModel::parameter_count)
      .def("encode",
           [](const AutoencoderModel& model, const FloatArray& e) {
             return encode(model, vector_span(e));
           })
      .def("encode_set", [](const AutoencoderModel& model, const EmbeddingSet& set) {
        return encode_set(model, set);
      });

  m.def(
      "init_model",
      [](std::size_t input_dim, std::size_t hidden_dim, std::size_t latent_dim,
         std::uint64_t seed) { return init_model(input_dim, hidden_dim, latent_dim, seed); },
      py::arg("input_dim") = 384, py::arg("hidden_dim") = 256, py::arg("latent_dim") = 128,
      py::arg("seed") = 0);
  m.def(
      "train",
      [](const AutoencoderModel& model, const EmbeddingSet& data, std::size_t epochs,
         std::size_t batch_size, double learning_rate, std::uint64_t seed) {
        TrainConfig config;
        config.epochs = epochs;
        config.batch_size = batch_size;
        config.learning_rate = learning_rate;
        config.seed = seed;
        py::gil_scoped_release release;
        auto [trained, report] = train(model, data, config);
        return std::make_pair(std::move(trained), std::move(report.per_epoch_loss));
      },
      py::arg("model"), py::arg("data"), py::arg("epochs") = 10, py::arg("batch_size") = 32,
      py::arg("learning_rate") = 1e-3, py::arg("seed") = 1);
  m.def("reconstruction_loss",
        py::overload_cast<const AutoencoderModel&, const EmbeddingSet&>(&reconstruction_loss));
  m.def(
      "gradient_check",
      [](const AutoencoderModel& model, const EmbeddingSet& batch, std::size_t probes,
         double eps, std::uint64_t seed) { return gradient_check(model, batch, probes, eps, seed); },
      py::arg("model"), py::arg("batch"), py::arg("probes") = 100, py::arg("eps") = 1e-5,
      py::arg("seed") = 0);
  m.def("load_aem1", &load_aem1, py::arg("path"));
  m.def("save_aem1", &save_aem1, py::arg("model"), py::arg("path"));

  py::class_<FlatIndex>(m, "FlatIndex")
      .def_property_readonly("count", &FlatIndex::count)
      .def_property_readonly("dim", &FlatIndex::dim)
      .def("search", [](const FlatIndex& index, const FloatArray& q, std::size_t k) {
        return hits_to_list(flat_search(index, vector_span(q), k));
      });
  m.def("build_flat", &build_flat, py::arg("set"));

  py::class_<HnswIndex>(m, "HnswIndex")
      .def_static(
          "build",
          [](const EmbeddingSet& set, std::size_t m_, std::size_t ef_construction,
             std::size_t ef_search, std::uint64_t seed) {
            HnswConfig config;
            config.m = m_;
            config.m_max0 = 2 * m_;
            config.ef_construction = ef_construction;
            config.ef_search = ef_search;
            config.seed = seed;
            return HnswIndex::build(set, config);
          },
          py::arg("set"), py::arg("m") = 16, py::arg("ef_construction") = 200,
          py::arg("ef_search") = 100, py::arg("seed") = 100)
      .def_static("load", &HnswIndex::load, py::arg("path"), py::arg("vectors"))
      .def("save", &HnswIndex::save, py::arg("path"))
      .def("__len__", &HnswIndex::size)
      .def_property_readonly("max_level", &HnswIndex::max_level)
      .def(
          "knn_query",
          [](const HnswIndex& graph, const FloatArray& q, std::size_t k,
             std::optional<std::size_t> ef) {
            return hits_to_list(
                graph.knn_query(vector_span(q), k, ef.value_or(graph.config().ef_search)));
          },
          py::arg("q"), py::arg("k"), py::arg("ef_search") = py::none());

  py::class_<HybridPipeline>(m, "HybridPipeline")
      .def(py::init<AutoencoderModel, HnswIndex, EmbeddingSet, EmbeddingSet>(),
           py::arg("model"), py::arg("graph"), py::arg("latent"), py::arg("original"))
      .def(
          "search",
          [](const HybridPipeline& p, const FloatArray& e_q, std::size_t k,
             std::size_t candidate_multiplier) {
            const auto result =
                hybrid_search(p, vector_span(e_q), HybridConfig{k, candidate_multiplier});
            py::dict out;
            out["hits"] = hits_to_list(result.latent_hits());
            out["elapsed_seconds"] = result.elapsed_seconds;
            out["cross_space_similarity"] = result.cross_space_similarity();
            return out;
          },
          py::arg("e_q"), py::arg("k") = 5, py::arg("candidate_multiplier") = 4);

  m.def(
      "utility",
      [](double s, double t, double alpha, double beta) {
        return utility(s, t, UtilityWeights{alpha, beta});
      },
      py::arg("avg_similarity"), py::arg("query_time_seconds"), py::arg("alpha") = 1.0,
      py::arg("beta") = 1.0);
  m.def(
      "compare_json",
      [](double flat_similarity, double flat_seconds, double hybrid_similarity,
         double hybrid_seconds, std::size_t k, double alpha, double beta,
         const std::string& query_text) {
        const SystemRun flat{SystemLabel::flat_baseline, k, flat_similarity, flat_seconds,
                             TimingMode::single_shot, 1, std::nullopt};
        const SystemRun hybrid{SystemLabel::hybrid, k, hybrid_similarity, hybrid_seconds,
                               TimingMode::single_shot, 1, std::nullopt};
        return emit_report(compare(flat, hybrid, {alpha, beta}, query_text), ReportFormat::json);
      },
      py::arg("flat_similarity"), py::arg("flat_seconds"), py::arg("hybrid_similarity"),
      py::arg("hybrid_seconds"), py::arg("k") = 5, py::arg("alpha") = 1.0,
      py::arg("beta") = 1.0, py::arg("query_text") = "");
}
