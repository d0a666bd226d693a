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

#include "latentsearch/autoencoder.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "latentsearch/detail/binary_io.hpp"
#include "latentsearch/error.hpp"
#include "latentsearch/random.hpp"

namespace latentsearch {

AutoencoderModel::AutoencoderModel(std::vector<DenseLayer> layers,
                                   std::size_t encoder_depth)
    : layers_(std::move(layers)), encoder_depth_(encoder_depth) {
  if (layers_.size() < 2 || encoder_depth_ == 0 ||
      encoder_depth_ >= layers_.size()) {
    throw ArgumentError("autoencoder needs at least one encoder and one decoder layer");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.weights.size() == 0 ||
        layer.bias.size() != layer.weights.rows()) {
      throw ShapeError("layer " + std::to_string(l) + " has inconsistent shapes");
    }
    if (l > 0 && layer.in_dim() != layers_[l - 1].out_dim()) {
      throw ShapeError("layer " + std::to_string(l) + " expects " +
                       std::to_string(layer.in_dim()) + " inputs but layer " +
                       std::to_string(l - 1) + " produces " +
                       std::to_string(layers_[l - 1].out_dim()));
    }
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      throw DataError("layer " + std::to_string(l) + " has non-finite parameters");
    }
  }
  if (layers_.back().out_dim() != layers_.front().in_dim()) {
    throw ShapeError("decoder output width differs from encoder input width");
  }
}

std::size_t AutoencoderModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) {
    n += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
  }
  return n;
}

bool operator==(const AutoencoderModel& a, const AutoencoderModel& b) {
  if (a.encoder_depth_ != b.encoder_depth_ || a.layers_.size() != b.layers_.size()) {
    return false;
  }
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    const auto& x = a.layers_[l];
    const auto& y = b.layers_[l];
    if (x.activation != y.activation || x.weights.rows() != y.weights.rows() ||
        x.weights.cols() != y.weights.cols() || x.weights != y.weights ||
        x.bias != y.bias) {
      return false;
    }
  }
  return true;
}

namespace {

DenseLayer glorot_layer(std::size_t in, std::size_t out, Activation act,
                        Xoshiro256& rng) {
  DenseLayer layer;
  layer.weights.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
  layer.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out));
  layer.activation = act;
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  // Row-major draw order so the stream maps to weights the same way on disk.
  for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
      layer.weights(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
    }
  }
  return layer;
}

void apply_activation(Activation act, Eigen::MatrixXd& m) {
  if (act == Activation::relu) {
    m = m.cwiseMax(0.0);
  }
}

Eigen::MatrixXd run_layers(std::span<const DenseLayer> layers, Eigen::MatrixXd x) {
  for (const auto& layer : layers) {
    Eigen::MatrixXd y = layer.weights * x;
    y.colwise() += layer.bias;
    apply_activation(layer.activation, y);
    x = std::move(y);
  }
  return x;
}

template <typename T>
Eigen::MatrixXd column_from(std::span<const T> v, std::size_t expected,
                            const char* what) {
  if (v.size() != expected) {
    throw ShapeError(std::string(what) + " expects length " +
                     std::to_string(expected) + ", got " +
                     std::to_string(v.size()));
  }
  Eigen::MatrixXd col(static_cast<Eigen::Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(static_cast<double>(v[i]))) {
      throw DataError(std::string(what) + " input has a non-finite component");
    }
    col(static_cast<Eigen::Index>(i), 0) = static_cast<double>(v[i]);
  }
  return col;
}

std::vector<double> to_vector(const Eigen::MatrixXd& col) {
  return std::vector<double>(col.data(), col.data() + col.size());
}

void check_batch(const AutoencoderModel& model, const Eigen::MatrixXd& batch) {
  if (static_cast<std::size_t>(batch.rows()) != model.input_dim()) {
    throw ShapeError("batch dim " + std::to_string(batch.rows()) +
                     " does not match model input dim " +
                     std::to_string(model.input_dim()));
  }
  if (batch.cols() == 0) {
    throw ArgumentError("batch is empty");
  }
}

}  // namespace

AutoencoderModel init_model(std::size_t input_dim, std::size_t hidden_dim,
                            std::size_t latent_dim, std::uint64_t seed,
                            Activation hidden_activation) {
  if (input_dim == 0 || hidden_dim == 0 || latent_dim == 0) {
    throw ArgumentError("autoencoder dims must be positive");
  }
  Xoshiro256 rng(seed);
  std::vector<DenseLayer> layers;
  layers.push_back(glorot_layer(input_dim, hidden_dim, hidden_activation, rng));
  layers.push_back(glorot_layer(hidden_dim, latent_dim, Activation::identity, rng));
  layers.push_back(glorot_layer(latent_dim, hidden_dim, hidden_activation, rng));
  layers.push_back(glorot_layer(hidden_dim, input_dim, Activation::identity, rng));
  return AutoencoderModel(std::move(layers), 2);
}

std::vector<double> encode(const AutoencoderModel& model, std::span<const double> e) {
  return to_vector(run_layers(model.encoder(), column_from(e, model.input_dim(), "encode")));
}

std::vector<double> encode(const AutoencoderModel& model, std::span<const float> e) {
  return to_vector(run_layers(model.encoder(), column_from(e, model.input_dim(), "encode")));
}

std::vector<double> decode(const AutoencoderModel& model, std::span<const double> z) {
  return to_vector(run_layers(model.decoder(), column_from(z, model.latent_dim(), "decode")));
}

std::vector<double> decode(const AutoencoderModel& model, std::span<const float> z) {
  return to_vector(run_layers(model.decoder(), column_from(z, model.latent_dim(), "decode")));
}

Eigen::MatrixXd to_column_batch(const EmbeddingSet& set) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(set.dim()),
                    static_cast<Eigen::Index>(set.count()));
  for (std::size_t i = 0; i < set.count(); ++i) {
    const auto row = set.row(i);
    for (std::size_t j = 0; j < set.dim(); ++j) {
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = row[j];
    }
  }
  return m;
}

EmbeddingSet encode_set(const AutoencoderModel& model, const EmbeddingSet& set) {
  if (set.dim() != model.input_dim()) {
    throw ShapeError("embedding dim " + std::to_string(set.dim()) +
                     " does not match model input dim " +
                     std::to_string(model.input_dim()));
  }
  const Eigen::MatrixXd z = run_layers(model.encoder(), to_column_batch(set));
  std::vector<float> values;
  values.reserve(static_cast<std::size_t>(z.size()));
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      values.push_back(static_cast<float>(z(r, c)));
    }
  }
  return EmbeddingSet(set.count(), model.latent_dim(), std::move(values),
                      SpaceTag::latent);
}

double reconstruction_loss(const AutoencoderModel& model, const Eigen::MatrixXd& batch) {
  check_batch(model, batch);
  const Eigen::MatrixXd out = run_layers(model.layers(), batch);
  return (out - batch).squaredNorm() / static_cast<double>(batch.cols());
}

double reconstruction_loss(const AutoencoderModel& model, const EmbeddingSet& batch) {
  if (batch.dim() != model.input_dim()) {
    throw ShapeError("batch dim " + std::to_string(batch.dim()) +
                     " does not match model input dim " +
                     std::to_string(model.input_dim()));
  }
  return reconstruction_loss(model, to_column_batch(batch));
}

std::pair<double, Gradients> loss_and_gradients(const AutoencoderModel& model,
                                                const Eigen::MatrixXd& batch) {
  check_batch(model, batch);
  const auto& layers = model.layers();
  const std::size_t depth = layers.size();

  // activations[l] is the input of layer l; pre[l] its pre-activation.
  std::vector<Eigen::MatrixXd> activations(depth + 1);
  std::vector<Eigen::MatrixXd> pre(depth);
  activations[0] = batch;
  for (std::size_t l = 0; l < depth; ++l) {
    pre[l] = layers[l].weights * activations[l];
    pre[l].colwise() += layers[l].bias;
    activations[l + 1] = pre[l];
    apply_activation(layers[l].activation, activations[l + 1]);
  }

  const double n = static_cast<double>(batch.cols());
  const Eigen::MatrixXd residual = activations[depth] - batch;
  const double loss = residual.squaredNorm() / n;

  Gradients grads;
  grads.weights.resize(depth);
  grads.bias.resize(depth);
  Eigen::MatrixXd delta = (2.0 / n) * residual;
  for (std::size_t l = depth; l-- > 0;) {
    if (layers[l].activation == Activation::relu) {
      delta = delta.cwiseProduct(
          (pre[l].array() > 0.0).cast<double>().matrix());
    }
    grads.weights[l] = delta * activations[l].transpose();
    grads.bias[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = layers[l].weights.transpose() * delta;
    }
  }
  return {loss, std::move(grads)};
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ArgumentError("learning_rate must be positive");
  }
  if (epochs == 0) {
    throw ArgumentError("epochs must be positive");
  }
  if (batch_size == 0) {
    throw ArgumentError("batch_size must be positive");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ArgumentError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) {
    throw ArgumentError("adam_epsilon must be positive");
  }
}

namespace {

struct AdamMoments {
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;

  explicit AdamMoments(const AutoencoderModel& model) {
    for (const auto& layer : model.layers()) {
      m_w.push_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
      v_w.push_back(m_w.back());
      m_b.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
      v_b.push_back(m_b.back());
    }
  }
};

template <typename Param, typename Grad>
void adam_step(Param& param, const Grad& grad, Param& m, Param& v,
               const TrainConfig& cfg, double correction1, double correction2) {
  m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
  v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * grad.cwiseProduct(grad);
  param.array() -= cfg.learning_rate * (m.array() / correction1) /
                   ((v.array() / correction2).sqrt() + cfg.adam_epsilon);
}

}  // namespace

std::pair<AutoencoderModel, TrainReport> train(AutoencoderModel model,
                                               const EmbeddingSet& data,
                                               const TrainConfig& config) {
  config.validate();
  if (data.dim() != model.input_dim()) {
    throw ShapeError("training data dim " + std::to_string(data.dim()) +
                     " does not match model input dim " +
                     std::to_string(model.input_dim()));
  }
  const auto start = std::chrono::steady_clock::now();
  const Eigen::MatrixXd samples = to_column_batch(data);
  const std::size_t n = data.count();

  Xoshiro256 rng(config.seed);
  AdamMoments moments(model);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainReport report;
  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      Eigen::MatrixXd batch(samples.rows(), static_cast<Eigen::Index>(end - begin));
      for (std::size_t j = begin; j < end; ++j) {
        batch.col(static_cast<Eigen::Index>(j - begin)) =
            samples.col(static_cast<Eigen::Index>(order[j]));
      }
      auto [loss, grads] = loss_and_gradients(model, batch);
      loss_sum += loss;
      ++batches;

      ++step;
      const double c1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(step));
      auto& layers = model.mutable_layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        adam_step(layers[l].weights, grads.weights[l], moments.m_w[l],
                  moments.v_w[l], config, c1, c2);
        adam_step(layers[l].bias, grads.bias[l], moments.m_b[l],
                  moments.v_b[l], config, c1, c2);
      }
    }
    const double epoch_loss = loss_sum / static_cast<double>(batches);
    if (!std::isfinite(epoch_loss)) {
      throw DataError("training diverged at epoch " + std::to_string(epoch + 1));
    }
    report.per_epoch_loss.push_back(epoch_loss);
  }
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), std::move(report)};
}

namespace {

using WideMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

WideMatrix wide_layer(const DenseLayer& layer, const WideMatrix& input) {
  WideMatrix z = (layer.weights.cast<long double>() * input).colwise() +
                 layer.bias.cast<long double>();
  if (layer.activation == Activation::relu) z = z.cwiseMax(0.0L);
  return z;
}

// Output of the network when fed `input` at layer `first`.
WideMatrix wide_forward_from(const AutoencoderModel& model, std::size_t first,
                             WideMatrix input) {
  for (std::size_t l = first; l < model.layers().size(); ++l) {
    input = wide_layer(model.layers()[l], input);
  }
  return input;
}

}  // namespace

double gradient_check(const AutoencoderModel& model, const Eigen::MatrixXd& batch,
                      std::size_t probe_count, double fd_epsilon,
                      std::uint64_t seed) {
  if (!(fd_epsilon > 0.0)) {
    throw ArgumentError("fd_epsilon must be positive");
  }
  const auto [loss, grads] = loss_and_gradients(model, batch);
  (void)loss;

  // The numeric side evaluates L(w+e) - L(w-e) as a sum of per-component
  // differences in extended precision. Subtracting two whole 64-bit losses
  // loses too many digits for parameters whose gradient is ~1e-7.
  const WideMatrix target = batch.cast<long double>();
  std::vector<WideMatrix> inputs{target};
  for (const auto& layer : model.layers()) inputs.push_back(wide_layer(layer, inputs.back()));
  const auto n = static_cast<long double>(batch.cols());

  const std::size_t total = model.parameter_count();
  Xoshiro256 rng(seed);
  AutoencoderModel probe = model;
  double worst = 0.0;
  for (std::size_t p = 0; p < probe_count; ++p) {
    std::size_t index = rng.below(total);
    std::size_t layer_index = 0;
    for (; layer_index < model.layers().size(); ++layer_index) {
      const auto& layer = model.layers()[layer_index];
      const auto size = static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
      if (index < size) break;
      index -= size;
    }
    auto& layer = probe.mutable_layers()[layer_index];
    const auto weight_count = static_cast<std::size_t>(layer.weights.size());
    double* param = nullptr;
    double analytic = 0.0;
    if (index < weight_count) {
      const auto r = static_cast<Eigen::Index>(index / layer.in_dim());
      const auto c = static_cast<Eigen::Index>(index % layer.in_dim());
      param = &layer.weights(r, c);
      analytic = grads.weights[layer_index](r, c);
    } else {
      const auto r = static_cast<Eigen::Index>(index - weight_count);
      param = &layer.bias(r);
      analytic = grads.bias[layer_index](r);
    }

    const double original = *param;
    *param = original + fd_epsilon;
    const WideMatrix up = wide_forward_from(probe, layer_index, inputs[layer_index]);
    *param = original - fd_epsilon;
    const WideMatrix down = wide_forward_from(probe, layer_index, inputs[layer_index]);
    *param = original;
    const long double delta =
        ((up - down).array() * (up + down - 2.0L * target).array()).sum() / n;
    const double numeric = static_cast<double>(delta / (2.0L * fd_epsilon));

    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    if (scale < 1e-12) continue;
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
  }
  return worst;
}

double gradient_check(const AutoencoderModel& model, const EmbeddingSet& batch,
                      std::size_t probe_count, double fd_epsilon,
                      std::uint64_t seed) {
  if (batch.dim() != model.input_dim()) {
    throw ShapeError("batch dim does not match model input dim");
  }
  return gradient_check(model, to_column_batch(batch), probe_count, fd_epsilon, seed);
}

namespace {

std::size_t bottleneck_index(const std::vector<std::size_t>& out_dims) {
  return static_cast<std::size_t>(
      std::min_element(out_dims.begin(), out_dims.end()) - out_dims.begin());
}

Activation conventional_activation(std::size_t layer, std::size_t encoder_depth,
                                   std::size_t layer_count) {
  return (layer + 1 == encoder_depth || layer + 1 == layer_count)
             ? Activation::identity
             : Activation::relu;
}

}  // namespace

void write_aem1(const AutoencoderModel& model, std::ostream& out) {
  const auto& layers = model.layers();
  std::vector<std::size_t> out_dims;
  for (const auto& layer : layers) out_dims.push_back(layer.out_dim());
  if (bottleneck_index(out_dims) + 1 != model.encoder_depth()) {
    throw ArgumentError("AEM1 requires the encoder to end at the narrowest layer");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].activation !=
        conventional_activation(l, model.encoder_depth(), layers.size())) {
      throw ArgumentError("AEM1 cannot represent the activation of layer " +
                          std::to_string(l));
    }
  }

  detail::put_magic(out, "AEM1");
  detail::put_le(out, kAem1Version);
  detail::put_le(out, static_cast<std::uint16_t>(layers.size()));
  for (const auto& layer : layers) {
    detail::put_le(out, static_cast<std::uint32_t>(layer.out_dim()));
    detail::put_le(out, static_cast<std::uint32_t>(layer.in_dim()));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        detail::put_f64(out, layer.weights(r, c));
      }
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      detail::put_f64(out, layer.bias(r));
    }
  }
  if (!out) {
    throw IoError("failed writing AEM1 model");
  }
}

AutoencoderModel read_aem1(std::istream& in) {
  detail::expect_magic(in, "AEM1");
  const auto version = detail::get_le<std::uint16_t>(in, "AEM1 version");
  if (version != kAem1Version) {
    throw FormatError("unsupported AEM1 version " + std::to_string(version));
  }
  const auto layer_count = detail::get_le<std::uint16_t>(in, "AEM1 layer count");
  if (layer_count < 2) {
    throw FormatError("AEM1 declares fewer than two layers");
  }
  std::vector<DenseLayer> layers(layer_count);
  std::vector<std::size_t> out_dims;
  for (auto& layer : layers) {
    const auto rows = detail::get_le<std::uint32_t>(in, "AEM1 rows");
    const auto cols = detail::get_le<std::uint32_t>(in, "AEM1 cols");
    if (rows == 0 || cols == 0) {
      throw FormatError("AEM1 layer with zero width");
    }
    layer.weights.resize(rows, cols);
    layer.bias.resize(rows);
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = detail::get_f64(in, "AEM1 weights");
      }
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      layer.bias(r) = detail::get_f64(in, "AEM1 biases");
    }
    out_dims.push_back(rows);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after AEM1 model");
  }
  const std::size_t encoder_depth = bottleneck_index(out_dims) + 1;
  if (encoder_depth >= layers.size()) {
    throw FormatError("AEM1 model has no decoder");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].activation = conventional_activation(l, encoder_depth, layers.size());
  }
  try {
    return AutoencoderModel(std::move(layers), encoder_depth);
  } catch (const ShapeError& e) {
    throw FormatError(std::string("AEM1 layer chain is inconsistent: ") + e.what());
  }
}

void save_aem1(const AutoencoderModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  write_aem1(model, out);
  out.close();
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

AutoencoderModel load_aem1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return read_aem1(in);
}

}  // namespace latentsearch
