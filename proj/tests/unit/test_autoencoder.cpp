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

#include <cmath>
#include <sstream>

#include "latentsearch/autoencoder.hpp"
#include "latentsearch/error.hpp"
#include "oracles.hpp"

using namespace latentsearch;
namespace lt = latentsearch::testing;

namespace {

constexpr double kFixtureEpoch1Loss = 0.61127687816958942;
constexpr double kFixtureFinalLoss = 0.012451705422445853;

AutoencoderModel zero_model(std::size_t in, std::size_t hidden, std::size_t latent) {
  auto model = init_model(in, hidden, latent, 0);
  for (auto& layer : model.mutable_layers()) {
    layer.weights.setZero();
    layer.bias.setZero();
  }
  return model;
}

AutoencoderModel identity_model(std::size_t dim) {
  std::vector<DenseLayer> layers(2);
  for (auto& l : layers) {
    l.weights = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                          static_cast<Eigen::Index>(dim));
    l.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  }
  return AutoencoderModel(std::move(layers), 1);
}

void randomize_biases(AutoencoderModel& model, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 0.1);
  for (auto& layer : model.mutable_layers()) {
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = dist(gen);
  }
}

double max_relative(const std::vector<double>& got, const std::vector<double>& want) {
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const double scale = std::max(std::abs(want[i]), 1e-12);
    worst = std::max(worst, std::abs(got[i] - want[i]) / scale);
  }
  return worst;
}

}  // namespace

TEST(InitModel, DeterministicPerSeed) {
  EXPECT_EQ(init_model(384, 256, 128, 5), init_model(384, 256, 128, 5));
  EXPECT_FALSE(init_model(384, 256, 128, 5) == init_model(384, 256, 128, 6));
}

TEST(InitModel, DefaultShapes) {
  const auto model = init_model(384, 256, 128, 1);
  ASSERT_EQ(model.layers().size(), 4u);
  EXPECT_EQ(model.encoder()[0].weights.rows(), 256);
  EXPECT_EQ(model.encoder()[0].weights.cols(), 384);
  EXPECT_EQ(model.encoder()[1].weights.rows(), 128);
  EXPECT_EQ(model.encoder()[1].weights.cols(), 256);
  EXPECT_EQ(model.decoder()[0].weights.rows(), 256);
  EXPECT_EQ(model.decoder()[1].weights.rows(), 384);
  EXPECT_EQ(model.input_dim(), 384u);
  EXPECT_EQ(model.latent_dim(), 128u);
  EXPECT_EQ(model.encoder()[0].activation, Activation::relu);
  EXPECT_EQ(model.encoder()[1].activation, Activation::identity);
  EXPECT_EQ(model.decoder()[0].activation, Activation::relu);
  EXPECT_EQ(model.decoder()[1].activation, Activation::identity);
}

TEST(InitModel, BiasesZeroAndWeightsWithinGlorotLimit) {
  const auto model = init_model(384, 256, 128, 2);
  for (const auto& layer : model.layers()) {
    EXPECT_TRUE(layer.bias.isZero(0.0));
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in_dim() + layer.out_dim()));
    EXPECT_LE(layer.weights.cwiseAbs().maxCoeff(), limit);
  }
}

TEST(InitModel, RejectsNonPositiveDims) {
  EXPECT_THROW(init_model(0, 256, 128, 0), ArgumentError);
  EXPECT_THROW(init_model(384, 0, 128, 0), ArgumentError);
  EXPECT_THROW(init_model(384, 256, 0, 0), ArgumentError);
}

TEST(Encode, ZeroModelGivesZero) {
  const auto model = zero_model(384, 256, 128);
  const auto e = lt::random_set(1, 384, 3);
  const auto z = encode(model, e.row(0));
  ASSERT_EQ(z.size(), 128u);
  for (double v : z) EXPECT_EQ(v, 0.0);
  const auto d = decode(model, std::span<const double>(z));
  ASSERT_EQ(d.size(), 384u);
  for (double v : d) EXPECT_EQ(v, 0.0);
}

TEST(Encode, MatchesReferenceForwardPass) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto model = init_model(384, 256, 128, seed);
    randomize_biases(model, seed);
    const auto inputs = lt::random_set(4, 384, seed + 100);
    for (std::size_t i = 0; i < inputs.count(); ++i) {
      const auto e = lt::to_double(inputs.row(i));
      const auto want = lt::naive_forward(model.encoder(), e);
      EXPECT_LE(max_relative(encode(model, inputs.row(i)), want), 1e-5);
    }
  }
}

TEST(Decode, MatchesReferenceForwardPass) {
  auto model = init_model(384, 256, 128, 4);
  randomize_biases(model, 4);
  const auto latents = lt::random_set(4, 128, 44);
  for (std::size_t i = 0; i < latents.count(); ++i) {
    const auto want = lt::naive_forward(model.decoder(), lt::to_double(latents.row(i)));
    EXPECT_LE(max_relative(decode(model, latents.row(i)), want), 1e-5);
  }
}

TEST(Encode, WrongLengthIsShapeError) {
  const auto model = init_model(384, 256, 128, 0);
  std::vector<double> short_input(10, 1.0);
  EXPECT_THROW(encode(model, std::span<const double>(short_input)), ShapeError);
  std::vector<double> short_latent(64, 1.0);
  EXPECT_THROW(decode(model, std::span<const double>(short_latent)), ShapeError);
}

TEST(EncodeSet, RowsMatchSingleEncode) {
  const auto model = init_model(16, 8, 4, 9);
  const auto set = lt::random_set(5, 16, 8);
  const auto latent = encode_set(model, set);
  EXPECT_EQ(latent.space_tag(), SpaceTag::latent);
  ASSERT_EQ(latent.dim(), 4u);
  for (std::size_t i = 0; i < set.count(); ++i) {
    const auto z = encode(model, set.row(i));
    for (std::size_t j = 0; j < z.size(); ++j) {
      EXPECT_FLOAT_EQ(latent.row(i)[j], static_cast<float>(z[j]));
    }
  }
  EXPECT_THROW(encode_set(model, lt::random_set(2, 15, 1)), ShapeError);
}

TEST(ReconstructionLoss, IdentityModelIsZero) {
  const auto batch = lt::random_set(6, 10, 5);
  EXPECT_EQ(reconstruction_loss(identity_model(10), batch), 0.0);
}

TEST(ReconstructionLoss, UnitErrorOnOneComponent) {
  std::vector<float> e(384, 0.0f);
  e[17] = 1.0f;
  EXPECT_DOUBLE_EQ(reconstruction_loss(zero_model(384, 256, 128), EmbeddingSet(1, 384, e)),
                   1.0);
}

TEST(ReconstructionLoss, MatchesPerComponentSum) {
  auto model = init_model(12, 8, 3, 21);
  randomize_biases(model, 21);
  const auto batch = lt::random_set(5, 12, 22);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.count(); ++i) {
    const auto e = lt::to_double(batch.row(i));
    const auto out = lt::naive_forward(model.layers(), e);
    for (std::size_t j = 0; j < e.size(); ++j) total += (e[j] - out[j]) * (e[j] - out[j]);
  }
  EXPECT_NEAR(reconstruction_loss(model, batch), total / 5.0, 1e-12 * total);
  EXPECT_THROW(reconstruction_loss(model, lt::random_set(2, 11, 1)), ShapeError);
}

TEST(GradientCheck, StandardModelAgreesWithFiniteDifferences) {
  auto model = init_model(384, 256, 128, 31);
  randomize_biases(model, 31);
  const auto batch = generate_synthetic(4, 384, 2, 32).set;
  EXPECT_LT(gradient_check(model, batch, 100, 1e-5, 33), 1e-6);
}

TEST(GradientCheck, LinearModelMatchesClosedForm) {
  // With identity activations and zero biases the decoder output is
  // P e with P = W4 W3 W2 W1, so
  //   dL/dW4 = 2/N sum_i r_i (W3 W2 W1 e_i)^T
  //   dL/dW1 = 2/N sum_i (W4 W3 W2)^T r_i e_i^T,   r_i = P e_i - e_i.
  const auto model = init_model(12, 8, 4, 41, Activation::identity);
  const auto batch = lt::random_set(6, 12, 42);
  const auto& L = model.layers();
  const double n = static_cast<double>(batch.count());

  auto matvec = [](const Eigen::MatrixXd& m, const std::vector<double>& v) {
    std::vector<double> out(static_cast<std::size_t>(m.rows()), 0.0);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) out[r] += m(r, c) * v[c];
    return out;
  };
  auto matvec_t = [](const Eigen::MatrixXd& m, const std::vector<double>& v) {
    std::vector<double> out(static_cast<std::size_t>(m.cols()), 0.0);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) out[c] += m(r, c) * v[r];
    return out;
  };

  Eigen::MatrixXd g4 = Eigen::MatrixXd::Zero(L[3].weights.rows(), L[3].weights.cols());
  Eigen::MatrixXd g1 = Eigen::MatrixXd::Zero(L[0].weights.rows(), L[0].weights.cols());
  for (std::size_t i = 0; i < batch.count(); ++i) {
    const auto e = lt::to_double(batch.row(i));
    const auto a1 = matvec(L[0].weights, e);
    const auto a2 = matvec(L[1].weights, a1);
    const auto a3 = matvec(L[2].weights, a2);
    const auto out = matvec(L[3].weights, a3);
    std::vector<double> r(e.size());
    for (std::size_t j = 0; j < e.size(); ++j) r[j] = out[j] - e[j];
    for (Eigen::Index a = 0; a < g4.rows(); ++a)
      for (Eigen::Index b = 0; b < g4.cols(); ++b) g4(a, b) += 2.0 / n * r[a] * a3[b];
    const auto back = matvec_t(L[1].weights, matvec_t(L[2].weights, matvec_t(L[3].weights, r)));
    for (Eigen::Index a = 0; a < g1.rows(); ++a)
      for (Eigen::Index b = 0; b < g1.cols(); ++b) g1(a, b) += 2.0 / n * back[a] * e[b];
  }

  const auto [loss, grads] = loss_and_gradients(model, to_column_batch(batch));
  (void)loss;
  const double err4 = (grads.weights[3] - g4).cwiseAbs().maxCoeff() / g4.cwiseAbs().maxCoeff();
  const double err1 = (grads.weights[0] - g1).cwiseAbs().maxCoeff() / g1.cwiseAbs().maxCoeff();
  EXPECT_LT(err4, 1e-8);
  EXPECT_LT(err1, 1e-8);
  EXPECT_LT(gradient_check(model, batch, 100, 1e-5, 43), 1e-6);
}

TEST(GradientCheck, ZeroBatchWithZeroBiasesGivesZero) {
  const auto model = init_model(384, 256, 128, 51);
  EmbeddingSet zeros(4, 384, std::vector<float>(4 * 384, 0.0f));
  const auto [loss, grads] = loss_and_gradients(model, to_column_batch(zeros));
  EXPECT_EQ(loss, 0.0);
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    EXPECT_TRUE(grads.weights[l].isZero(0.0));
    EXPECT_TRUE(grads.bias[l].isZero(0.0));
  }
  EXPECT_EQ(gradient_check(model, zeros, 50, 1e-5), 0.0);
}

TEST(Train, ZeroDataStaysAtZeroLoss) {
  EmbeddingSet zeros(500, 384, std::vector<float>(500 * 384, 0.0f));
  TrainConfig config;
  config.epochs = 3;
  auto [model, report] = train(init_model(384, 256, 128, 1), zeros, config);
  ASSERT_EQ(report.per_epoch_loss.size(), 3u);
  for (double l : report.per_epoch_loss) EXPECT_EQ(l, 0.0);
}

TEST(Train, SyntheticFixtureConverges) {
  const auto data = generate_synthetic(500, 384, 8, 42).set;
  TrainConfig config;
  config.seed = 1;
  auto [model, report] = train(init_model(384, 256, 128, 0), data, config);
  const auto& loss = report.per_epoch_loss;
  ASSERT_EQ(loss.size(), 10u);
  EXPECT_LT(loss.back(), 0.1 * loss.front());
  for (std::size_t e = 1; e + 1 < loss.size(); ++e) {
    EXPECT_LE(loss[e + 1], loss[e] * 1.05) << "epoch " << e + 2;
  }
  for (double l : loss) {
    EXPECT_TRUE(std::isfinite(l));
    EXPECT_GE(l, 0.0);
  }
  // Recorded fixture (init seed 0, shuffle seed 1).
  EXPECT_NEAR(loss.front(), kFixtureEpoch1Loss, 1e-6 * kFixtureEpoch1Loss);
  EXPECT_NEAR(loss.back(), kFixtureFinalLoss, 1e-6 * kFixtureFinalLoss);
  EXPECT_LT(reconstruction_loss(model, data), loss.front());
}

TEST(Train, DeterministicForFixedSeeds) {
  const auto data = generate_synthetic(96, 32, 3, 5).set;
  TrainConfig config;
  config.epochs = 4;
  config.batch_size = 10;
  config.seed = 8;
  const auto a = train(init_model(32, 16, 8, 7), data, config);
  const auto b = train(init_model(32, 16, 8, 7), data, config);
  EXPECT_EQ(a.second.per_epoch_loss, b.second.per_epoch_loss);
  EXPECT_EQ(a.first, b.first);
  config.seed = 9;
  const auto c = train(init_model(32, 16, 8, 7), data, config);
  EXPECT_NE(a.second.per_epoch_loss, c.second.per_epoch_loss);
}

TEST(Train, ShortLastBatchAndValidation) {
  const auto data = generate_synthetic(7, 8, 2, 5).set;
  TrainConfig config;
  config.epochs = 2;
  config.batch_size = 32;
  EXPECT_NO_THROW(train(init_model(8, 6, 4, 1), data, config));

  TrainConfig bad = config;
  bad.epochs = 0;
  EXPECT_THROW(train(init_model(8, 6, 4, 1), data, bad), ArgumentError);
  bad = config;
  bad.learning_rate = 0.0;
  EXPECT_THROW(train(init_model(8, 6, 4, 1), data, bad), ArgumentError);
  bad = config;
  bad.adam_beta1 = 1.0;
  EXPECT_THROW(train(init_model(8, 6, 4, 1), data, bad), ArgumentError);
  EXPECT_THROW(train(init_model(9, 6, 4, 1), data, config), ShapeError);
  EXPECT_THROW(EmbeddingSet(0, 8, {}), ArgumentError);
}

TEST(Aem1, RoundTripIsExact) {
  auto model = init_model(24, 12, 6, 3);
  randomize_biases(model, 3);
  std::stringstream io;
  write_aem1(model, io);
  const std::string bytes = io.str();
  EXPECT_EQ(bytes.size(), 4u + 2 + 2 + 4 * 8 +
                              8 * (12 * 24 + 12 + 6 * 12 + 6 + 12 * 6 + 12 + 24 * 12 + 24));
  const auto back = read_aem1(io);
  EXPECT_EQ(back, model);
  std::ostringstream again;
  write_aem1(back, again);
  EXPECT_EQ(again.str(), bytes);
}

TEST(Aem1, RejectsBadInputAndUnrepresentableModels) {
  std::istringstream bad_magic("XEM1\x01\x00");
  EXPECT_THROW(read_aem1(bad_magic), FormatError);

  std::stringstream io;
  write_aem1(init_model(8, 6, 4, 1), io);
  const auto bytes = io.str();
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_aem1(truncated), FormatError);

  EXPECT_THROW(write_aem1(init_model(8, 6, 4, 1, Activation::identity), io), ArgumentError);
}
