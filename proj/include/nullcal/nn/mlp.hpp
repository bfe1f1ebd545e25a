// Copyright 2026 The nullcal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nullcal/error.hpp"
#include "nullcal/linalg.hpp"
#include "nullcal/rng.hpp"

namespace nullcal::nn {

enum class Activation { silu, tanh, identity };

std::string to_string(Activation act);
Activation activation_from_string(const std::string& name);

template <typename Scalar>
Matrix<Scalar> activate(Activation act, const Matrix<Scalar>& pre) {
  switch (act) {
    case Activation::silu:
      return (pre.array() * pre.array().logistic()).matrix();
    case Activation::tanh:
      return pre.array().tanh().matrix();
    case Activation::identity:
      break;
  }
  return pre;
}

/// Elementwise d(activation)/d(pre).
template <typename Scalar>
Matrix<Scalar> activation_slope(Activation act, const Matrix<Scalar>& pre) {
  switch (act) {
    case Activation::silu: {
      const auto sig = pre.array().logistic().eval();
      return (sig * (Scalar(1) + pre.array() * (Scalar(1) - sig))).matrix();
    }
    case Activation::tanh:
      return (Scalar(1) - pre.array().tanh().square()).matrix();
    case Activation::identity:
      break;
  }
  return Matrix<Scalar>::Ones(pre.rows(), pre.cols());
}

template <typename Scalar>
struct DenseLayer {
  Matrix<Scalar> weight;  // out x in
  Vector<Scalar> bias;    // out
};

template <typename Scalar>
using ParameterSpans = std::vector<std::span<Scalar>>;

template <typename Scalar>
void append_spans(std::vector<DenseLayer<Scalar>>& layers, ParameterSpans<Scalar>& out) {
  for (auto& layer : layers) {
    out.emplace_back(layer.weight.data(), static_cast<std::size_t>(layer.weight.size()));
    out.emplace_back(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
  }
}

/// Plain feed-forward network; samples are columns. Hidden layers apply the
/// activation, the output layer is affine.
template <typename Scalar>
class Mlp {
 public:
  using Mat = Matrix<Scalar>;

  struct Tape {
    std::vector<Mat> inputs;  // input of each layer
    std::vector<Mat> pre;     // pre-activation of each hidden layer
  };

  Mlp() = default;

  /// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zero biases.
  Mlp(std::vector<int> widths, Activation act, Rng& rng) : widths_(std::move(widths)), act_(act) {
    if (widths_.size() < 2) throw InvalidConfig("Mlp needs at least input and output widths");
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      if (widths_[l] < 1 || widths_[l + 1] < 1) throw InvalidConfig("Mlp widths must be positive");
      const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
      DenseLayer<Scalar> layer{Mat(widths_[l + 1], widths_[l]), Vector<Scalar>::Zero(widths_[l + 1])};
      for (Eigen::Index i = 0; i < layer.weight.size(); ++i)
        layer.weight.data()[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
      layers_.push_back(std::move(layer));
    }
  }

  Mlp(std::vector<int> widths, Activation act, std::vector<DenseLayer<Scalar>> layers)
      : widths_(std::move(widths)), act_(act), layers_(std::move(layers)) {
    if (layers_.size() + 1 != widths_.size()) throw InvalidConfig("Mlp layer count mismatch");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      if (layers_[l].weight.rows() != widths_[l + 1] || layers_[l].weight.cols() != widths_[l] ||
          layers_[l].bias.size() != widths_[l + 1])
        throw InvalidConfig("Mlp layer shape mismatch at layer " + std::to_string(l));
    }
  }

  Mat forward(const Mat& x) const {
    require_dims(x.rows() == input_dim(), "Mlp::forward: input width mismatch");
    Mat h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Mat pre = layers_[l].weight * h;
      pre.colwise() += layers_[l].bias;
      h = (l + 1 < layers_.size()) ? activate(act_, pre) : std::move(pre);
    }
    return h;
  }

  Mat forward(const Mat& x, Tape& tape) const {
    require_dims(x.rows() == input_dim(), "Mlp::forward: input width mismatch");
    tape.inputs.resize(layers_.size());
    tape.pre.resize(layers_.size() - 1);
    Mat h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      tape.inputs[l] = h;
      Mat pre = layers_[l].weight * h;
      pre.colwise() += layers_[l].bias;
      if (l + 1 < layers_.size()) {
        h = activate(act_, pre);
        tape.pre[l] = std::move(pre);
      } else {
        h = std::move(pre);
      }
    }
    return h;
  }

  /// Writes parameter gradients into `grads` (resized as needed) and
  /// returns the gradient with respect to the input.
  Mat backward(const Tape& tape, const Mat& grad_out, std::vector<DenseLayer<Scalar>>& grads) const {
    grads.resize(layers_.size());
    Mat delta = grad_out;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      grads[l].weight.noalias() = delta * tape.inputs[l].transpose();
      grads[l].bias = delta.rowwise().sum();
      Mat back = layers_[l].weight.transpose() * delta;
      if (l > 0) {
        delta = back.cwiseProduct(activation_slope(act_, tape.pre[l - 1]));
      } else {
        delta = std::move(back);
      }
    }
    return delta;
  }

  std::vector<DenseLayer<Scalar>> zero_gradients() const {
    std::vector<DenseLayer<Scalar>> g;
    for (const auto& layer : layers_)
      g.push_back({Mat::Zero(layer.weight.rows(), layer.weight.cols()),
                   Vector<Scalar>::Zero(layer.bias.size())});
    return g;
  }

  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  const std::vector<int>& widths() const { return widths_; }
  Activation activation() const { return act_; }
  std::vector<DenseLayer<Scalar>>& layers() { return layers_; }
  const std::vector<DenseLayer<Scalar>>& layers() const { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
    return n;
  }

  bool finite() const {
    for (const auto& layer : layers_)
      if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
    return true;
  }

  /// Same architecture, parameters converted to another scalar type.
  template <typename Other>
  Mlp<Other> cast() const {
    std::vector<DenseLayer<Other>> layers;
    for (const auto& layer : layers_)
      layers.push_back({layer.weight.template cast<Other>(), layer.bias.template cast<Other>()});
    return Mlp<Other>(widths_, act_, std::move(layers));
  }

 private:
  std::vector<int> widths_;
  Activation act_ = Activation::silu;
  std::vector<DenseLayer<Scalar>> layers_;
};

/// Widths {in, hidden x blocks, out}.
inline std::vector<int> block_widths(int in, int hidden, int blocks, int out) {
  std::vector<int> w{in};
  for (int b = 0; b < blocks; ++b) w.push_back(hidden);
  w.push_back(out);
  return w;
}

}  // namespace nullcal::nn
