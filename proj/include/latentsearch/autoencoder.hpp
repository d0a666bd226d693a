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

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "latentsearch/embedding_io.hpp"

namespace latentsearch {

enum class Activation { identity, relu };

/// Fully connected layer y = act(W x + b), W stored out x in.
struct DenseLayer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
  Activation activation = Activation::identity;

  std::size_t in_dim() const { return static_cast<std::size_t>(weights.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weights.rows()); }
};

/// Encoder layers followed by decoder layers. The first `encoder_depth`
/// layers map input -> latent; the rest map latent -> input.
class AutoencoderModel {
 public:
  AutoencoderModel(std::vector<DenseLayer> layers, std::size_t encoder_depth);

  std::size_t input_dim() const { return layers_.front().in_dim(); }
  std::size_t latent_dim() const { return layers_[encoder_depth_ - 1].out_dim(); }
  std::size_t encoder_depth() const { return encoder_depth_; }
  std::size_t parameter_count() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }
  std::span<const DenseLayer> encoder() const {
    return std::span(layers_).first(encoder_depth_);
  }
  std::span<const DenseLayer> decoder() const {
    return std::span(layers_).subspan(encoder_depth_);
  }

  friend bool operator==(const AutoencoderModel& a, const AutoencoderModel& b);

 private:
  std::vector<DenseLayer> layers_;
  std::size_t encoder_depth_;
};

/// input -> hidden -> latent -> hidden -> input with `hidden_activation`
/// on the two hidden layers and identity on the latent and output layers.
/// Weights are Glorot-uniform from a seeded stream, biases are zero.
AutoencoderModel init_model(std::size_t input_dim = 384,
                            std::size_t hidden_dim = 256,
                            std::size_t latent_dim = 128,
                            std::uint64_t seed = 0,
                            Activation hidden_activation = Activation::relu);

std::vector<double> encode(const AutoencoderModel& model,
                           std::span<const double> e);
std::vector<double> encode(const AutoencoderModel& model,
                           std::span<const float> e);
std::vector<double> decode(const AutoencoderModel& model,
                           std::span<const double> z);
std::vector<double> decode(const AutoencoderModel& model,
                           std::span<const float> z);

/// Encodes every row; result is tagged latent.
EmbeddingSet encode_set(const AutoencoderModel& model, const EmbeddingSet& set);

/// Samples as columns: input_dim x batch.
Eigen::MatrixXd to_column_batch(const EmbeddingSet& set);

/// Mean over samples of the squared L2 reconstruction error.
double reconstruction_loss(const AutoencoderModel& model,
                           const EmbeddingSet& batch);
double reconstruction_loss(const AutoencoderModel& model,
                           const Eigen::MatrixXd& batch);

/// dL/dW and dL/db for every layer, same shapes as the model.
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> bias;
};

/// Loss and its gradient by backpropagation, on a column batch.
std::pair<double, Gradients> loss_and_gradients(const AutoencoderModel& model,
                                                const Eigen::MatrixXd& batch);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainReport {
  std::vector<double> per_epoch_loss;
  double wall_time_seconds = 0.0;
};

/// Mini-batch Adam on the reconstruction loss. Samples are reshuffled every
/// epoch from a stream seeded by config.seed; the final batch may be short.
/// The recorded epoch loss is the mean of the pre-update batch losses.
std::pair<AutoencoderModel, TrainReport> train(AutoencoderModel model,
                                               const EmbeddingSet& data,
                                               const TrainConfig& config);

/// Compares backprop against central differences on `probe_count` randomly
/// chosen parameters. Returns the largest |a - n| / max(|a|, |n|); pairs
/// where both are below 1e-12 count as zero error.
double gradient_check(const AutoencoderModel& model,
                      const Eigen::MatrixXd& batch, std::size_t probe_count,
                      double fd_epsilon, std::uint64_t seed = 0);
double gradient_check(const AutoencoderModel& model, const EmbeddingSet& batch,
                      std::size_t probe_count, double fd_epsilon,
                      std::uint64_t seed = 0);

// AEM1: "AEM1", u16 version, u16 layer count, then per layer u32 rows,
// u32 cols, rows*cols f64 weights (row-major), rows f64 biases. All
// little-endian. Activations are not stored: the encoder ends at the first
// layer with the smallest output width, the last layer of each half is
// identity and every other layer is ReLU.
inline constexpr std::uint16_t kAem1Version = 1;

void write_aem1(const AutoencoderModel& model, std::ostream& out);
AutoencoderModel read_aem1(std::istream& in);
void save_aem1(const AutoencoderModel& model, const std::filesystem::path& path);
AutoencoderModel load_aem1(const std::filesystem::path& path);

}  // namespace latentsearch
