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

#include <string>
#include <vector>

#include "nullcal/nn/mlp.hpp"

namespace nullcal::nn {

enum class Conditioning { concat, film };

std::string to_string(Conditioning mode);
Conditioning conditioning_from_string(const std::string& name);

struct DenoiserShape {
  int data_dim = 0;
  int cond_dim = 0;
  int time_dim = 64;
  int hidden = 256;
  int blocks = 2;
  Conditioning mode = Conditioning::concat;
};

/// Noise-prediction network eps(x_t, cond, t).
///
/// concat: one SiLU MLP over [x_t; cond; temb].
/// film:   SiLU trunk over x_t whose hidden activations are modulated as
///         h * (1 + gamma) + delta, with (gamma, delta) produced from
///         [cond; temb] by a one-hidden-layer network, plus a linear skip
///         from x_t to the output.
template <typename Scalar>
class Denoiser {
 public:
  using Mat = Matrix<Scalar>;
  using Layers = std::vector<DenseLayer<Scalar>>;

  struct Tape {
    typename Mlp<Scalar>::Tape net;   // concat
    typename Mlp<Scalar>::Tape cond;  // film
    Mat x_t, film;
    std::vector<Mat> block_in, pre, act;
  };

  struct Gradients {
    Layers trunk;
    Layers skip;
    Layers cond;
  };

  Denoiser() = default;

  Denoiser(const DenoiserShape& shape, Rng& rng) : shape_(shape) {
    if (shape.mode == Conditioning::concat) {
      net_ = Mlp<Scalar>(block_widths(shape.data_dim + shape.cond_dim + shape.time_dim, shape.hidden,
                                      shape.blocks, shape.data_dim),
                         Activation::silu, rng);
    } else {
      Mlp<Scalar> trunk(block_widths(shape.data_dim, shape.hidden, shape.blocks, shape.data_dim),
                        Activation::silu, rng);
      trunk_ = trunk.layers();
      Mlp<Scalar> skip({shape.data_dim, shape.data_dim}, Activation::identity, rng);
      skip_ = skip.layers();
      cond_ = Mlp<Scalar>({shape.cond_dim + shape.time_dim, shape.hidden, 2 * shape.hidden * shape.blocks},
                          Activation::silu, rng);
      // Start with identity modulation.
      cond_.layers().back().weight.setZero();
    }
  }

  /// Rebuilds from the flat layer list produced by `layers()`.
  Denoiser(const DenoiserShape& shape, const Layers& flat) : shape_(shape) {
    if (shape.mode == Conditioning::concat) {
      net_ = Mlp<Scalar>(block_widths(shape.data_dim + shape.cond_dim + shape.time_dim, shape.hidden,
                                      shape.blocks, shape.data_dim),
                         Activation::silu, flat);
    } else {
      const std::size_t nt = static_cast<std::size_t>(shape.blocks) + 1;
      if (flat.size() != nt + 3) throw InvalidConfig("FiLM denoiser: wrong layer count");
      trunk_.assign(flat.begin(), flat.begin() + static_cast<long>(nt));
      skip_.assign(flat.begin() + static_cast<long>(nt), flat.begin() + static_cast<long>(nt) + 1);
      cond_ = Mlp<Scalar>({shape.cond_dim + shape.time_dim, shape.hidden, 2 * shape.hidden * shape.blocks},
                          Activation::silu, Layers(flat.begin() + static_cast<long>(nt) + 1, flat.end()));
    }
  }

  const DenoiserShape& shape() const { return shape_; }

  Layers layers() const {
    if (shape_.mode == Conditioning::concat) return net_.layers();
    Layers flat = trunk_;
    flat.insert(flat.end(), skip_.begin(), skip_.end());
    flat.insert(flat.end(), cond_.layers().begin(), cond_.layers().end());
    return flat;
  }

  /// Concat mode splits the first layer as W_x x_t + W_c cond + W_t temb + b,
  /// so terms that do not change across a batch or a step can be hoisted.
  bool supports_cached_condition() const { return shape_.mode == Conditioning::concat; }

  Mat condition_term(const Mat& cond) const {
    return net_.layers()[0].weight.middleCols(shape_.data_dim, shape_.cond_dim) * cond;
  }

  Vector<Scalar> time_term(const Vector<Scalar>& temb) const {
    const auto& first = net_.layers()[0];
    return first.weight.rightCols(shape_.time_dim) * temb + first.bias;
  }

  /// `shared` is added to every column of the first pre-activation; the
  /// optional `per_column` term (hidden x batch) as well.
  Mat predict_cached(const Mat& x_t, const Vector<Scalar>& shared, const Mat* per_column = nullptr) const {
    const auto& layers = net_.layers();
    Mat pre = layers[0].weight.leftCols(shape_.data_dim) * x_t;
    if (per_column) pre += *per_column;
    pre.colwise() += shared;
    Mat h = activate(Activation::silu, pre);
    for (std::size_t l = 1; l + 1 < layers.size(); ++l) {
      pre.noalias() = layers[l].weight * h;
      pre.colwise() += layers[l].bias;
      h = activate(Activation::silu, pre);
    }
    Mat out = layers.back().weight * h;
    out.colwise() += layers.back().bias;
    return out;
  }

  Mat predict(const Mat& x_t, const Mat& cond, const Mat& temb) const {
    Tape tape;
    return forward(x_t, cond, temb, tape);
  }

  Mat forward(const Mat& x_t, const Mat& cond, const Mat& temb, Tape& tape) const {
    const Eigen::Index batch = x_t.cols();
    require_dims(x_t.rows() == shape_.data_dim && cond.rows() == shape_.cond_dim &&
                     temb.rows() == shape_.time_dim && cond.cols() == batch && temb.cols() == batch,
                 "Denoiser: input shape mismatch");
    if (shape_.mode == Conditioning::concat) {
      Mat in(x_t.rows() + cond.rows() + temb.rows(), batch);
      in << x_t, cond, temb;
      return net_.forward(in, tape.net);
    }
    Mat c(cond.rows() + temb.rows(), batch);
    c << cond, temb;
    tape.film = cond_.forward(c, tape.cond);
    tape.x_t = x_t;
    const int h = shape_.hidden;
    const auto nb = static_cast<std::size_t>(shape_.blocks);
    tape.block_in.resize(nb);
    tape.pre.resize(nb);
    tape.act.resize(nb);
    Mat hcur = x_t;
    for (std::size_t b = 0; b < nb; ++b) {
      tape.block_in[b] = hcur;
      Mat pre = trunk_[b].weight * hcur;
      pre.colwise() += trunk_[b].bias;
      tape.act[b] = activate(Activation::silu, pre);
      tape.pre[b] = std::move(pre);
      const auto gamma = tape.film.middleRows(static_cast<Eigen::Index>(2 * b) * h, h);
      const auto delta = tape.film.middleRows(static_cast<Eigen::Index>(2 * b + 1) * h, h);
      hcur = (tape.act[b].array() * (Scalar(1) + gamma.array()) + delta.array()).matrix();
    }
    tape.block_in.push_back(hcur);
    Mat out = trunk_.back().weight * hcur + skip_[0].weight * x_t;
    out.colwise() += trunk_.back().bias + skip_[0].bias;
    return out;
  }

  void backward(const Tape& tape, const Mat& grad_out, Gradients& grads) const {
    if (shape_.mode == Conditioning::concat) {
      net_.backward(tape.net, grad_out, grads.trunk);
      return;
    }
    const int h = shape_.hidden;
    const auto nb = static_cast<std::size_t>(shape_.blocks);
    grads.trunk.resize(nb + 1);
    grads.skip.resize(1);
    grads.trunk[nb].weight.noalias() = grad_out * tape.block_in[nb].transpose();
    grads.trunk[nb].bias = grad_out.rowwise().sum();
    grads.skip[0].weight.noalias() = grad_out * tape.x_t.transpose();
    grads.skip[0].bias = grad_out.rowwise().sum();
    Mat dfilm(tape.film.rows(), tape.film.cols());
    Mat dh = trunk_[nb].weight.transpose() * grad_out;
    for (std::size_t b = nb; b-- > 0;) {
      const auto gamma = tape.film.middleRows(static_cast<Eigen::Index>(2 * b) * h, h);
      dfilm.middleRows(static_cast<Eigen::Index>(2 * b) * h, h) = dh.cwiseProduct(tape.act[b]);
      dfilm.middleRows(static_cast<Eigen::Index>(2 * b + 1) * h, h) = dh;
      const Mat dpre = (dh.array() * (Scalar(1) + gamma.array())).matrix().cwiseProduct(
          activation_slope(Activation::silu, tape.pre[b]));
      grads.trunk[b].weight.noalias() = dpre * tape.block_in[b].transpose();
      grads.trunk[b].bias = dpre.rowwise().sum();
      if (b > 0) dh = trunk_[b].weight.transpose() * dpre;
    }
    cond_.backward(tape.cond, dfilm, grads.cond);
  }

  Gradients zero_gradients() const {
    Gradients g;
    auto zeros = [](const Layers& ls) {
      Layers out;
      for (const auto& l : ls)
        out.push_back({Mat::Zero(l.weight.rows(), l.weight.cols()), Vector<Scalar>::Zero(l.bias.size())});
      return out;
    };
    if (shape_.mode == Conditioning::concat) {
      g.trunk = zeros(net_.layers());
    } else {
      g.trunk = zeros(trunk_);
      g.skip = zeros(skip_);
      g.cond = zeros(cond_.layers());
    }
    return g;
  }

  ParameterSpans<Scalar> parameters() {
    ParameterSpans<Scalar> spans;
    if (shape_.mode == Conditioning::concat) {
      append_spans(net_.layers(), spans);
    } else {
      append_spans(trunk_, spans);
      append_spans(skip_, spans);
      append_spans(cond_.layers(), spans);
    }
    return spans;
  }

  static ParameterSpans<Scalar> gradient_spans(Gradients& g) {
    ParameterSpans<Scalar> spans;
    append_spans(g.trunk, spans);
    append_spans(g.skip, spans);
    append_spans(g.cond, spans);
    return spans;
  }

  template <typename Other>
  Denoiser<Other> cast() const {
    std::vector<DenseLayer<Other>> flat;
    for (const auto& l : layers()) flat.push_back({l.weight.template cast<Other>(), l.bias.template cast<Other>()});
    return Denoiser<Other>(shape_, flat);
  }

 private:
  DenoiserShape shape_;
  Mlp<Scalar> net_;
  Layers trunk_;
  Layers skip_;
  Mlp<Scalar> cond_;
};

}  // namespace nullcal::nn
