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
#include <vector>

#include "nullcal/nn/mlp.hpp"

namespace nullcal::nn {

struct VaeShape {
  int data_dim = 0;
  int cond_dim = 0;
  int latent_dim = 16;
  int hidden = 256;
  int blocks = 2;
};

struct VaeLoss {
  double total = 0;
  double reconstruction = 0;  // mean over batch of 0.5 * ||beta - decoded||^2
  double kl = 0;              // mean over batch
};

/// Conditional VAE: encoder [beta; cond] -> (mu, log sigma), decoder
/// [z; cond] -> beta mean. Gaussian decoder with unit observation scale.
template <typename Scalar>
class ConditionalVae {
 public:
  using Mat = Matrix<Scalar>;
  using Layers = std::vector<DenseLayer<Scalar>>;

  struct Gradients {
    Layers encoder;
    Layers decoder;
  };

  ConditionalVae() = default;

  ConditionalVae(const VaeShape& shape, Rng& rng)
      : shape_(shape),
        encoder_(block_widths(shape.data_dim + shape.cond_dim, shape.hidden, shape.blocks, 2 * shape.latent_dim),
                 Activation::silu, rng),
        decoder_(block_widths(shape.latent_dim + shape.cond_dim, shape.hidden, shape.blocks, shape.data_dim),
                 Activation::silu, rng) {}

  ConditionalVae(const VaeShape& shape, Mlp<Scalar> encoder, Mlp<Scalar> decoder)
      : shape_(shape), encoder_(std::move(encoder)), decoder_(std::move(decoder)) {}

  const VaeShape& shape() const { return shape_; }
  const Mlp<Scalar>& encoder() const { return encoder_; }
  const Mlp<Scalar>& decoder() const { return decoder_; }

  Mat decode(const Mat& z, const Mat& cond) const {
    Mat in(z.rows() + cond.rows(), z.cols());
    in << z, cond;
    return decoder_.forward(in);
  }

  /// Encoder mean, decoded without sampling.
  Mat reconstruct_mean(const Mat& beta, const Mat& cond) const {
    Mat in(beta.rows() + cond.rows(), beta.cols());
    in << beta, cond;
    const Mat stats = encoder_.forward(in);
    return decode(stats.topRows(shape_.latent_dim), cond);
  }

  /// Negative ELBO (reconstruction + kl_weight * KL) on one batch with the
  /// reparameterization noise `eps` supplied; fills gradients if requested.
  VaeLoss loss(const Mat& beta, const Mat& cond, const Mat& eps, double kl_weight,
               Gradients* grads = nullptr) const {
    const Eigen::Index batch = beta.cols();
    const int latent = shape_.latent_dim;
    Mat enc_in(beta.rows() + cond.rows(), batch);
    enc_in << beta, cond;
    typename Mlp<Scalar>::Tape enc_tape, dec_tape;
    const Mat stats = encoder_.forward(enc_in, enc_tape);
    const Mat mu = stats.topRows(latent);
    const Mat log_sigma = stats.bottomRows(latent);
    const Mat sigma = log_sigma.array().exp().matrix();
    const Mat z = mu + sigma.cwiseProduct(eps);
    Mat dec_in(latent + cond.rows(), batch);
    dec_in << z, cond;
    const Mat decoded = decoder_.forward(dec_in, dec_tape);
    const Mat resid = decoded - beta;

    const double inv_b = 1.0 / static_cast<double>(batch);
    VaeLoss out;
    out.reconstruction = 0.5 * static_cast<double>(resid.squaredNorm()) * inv_b;
    out.kl = 0.5 *
             static_cast<double>((mu.array().square() + sigma.array().square() - Scalar(1) -
                                  Scalar(2) * log_sigma.array())
                                     .sum()) *
             inv_b;
    out.total = out.reconstruction + kl_weight * out.kl;
    if (!grads) return out;

    const Scalar s_inv_b = static_cast<Scalar>(inv_b);
    const Scalar s_kl = static_cast<Scalar>(kl_weight * inv_b);
    const Mat d_dec_in = decoder_.backward(dec_tape, resid * s_inv_b, grads->decoder);
    const Mat dz = d_dec_in.topRows(latent);
    Mat d_stats(2 * latent, batch);
    d_stats.topRows(latent) = dz + s_kl * mu;
    d_stats.bottomRows(latent) =
        dz.cwiseProduct(sigma).cwiseProduct(eps) + s_kl * (sigma.array().square() - Scalar(1)).matrix();
    encoder_.backward(enc_tape, d_stats, grads->encoder);
    return out;
  }

  ParameterSpans<Scalar> parameters() {
    ParameterSpans<Scalar> spans;
    append_spans(encoder_.layers(), spans);
    append_spans(decoder_.layers(), spans);
    return spans;
  }

  static ParameterSpans<Scalar> gradient_spans(Gradients& g) {
    ParameterSpans<Scalar> spans;
    append_spans(g.encoder, spans);
    append_spans(g.decoder, spans);
    return spans;
  }

  Gradients zero_gradients() const { return {encoder_.zero_gradients(), decoder_.zero_gradients()}; }

  template <typename Other>
  ConditionalVae<Other> cast() const {
    return ConditionalVae<Other>(shape_, encoder_.template cast<Other>(), decoder_.template cast<Other>());
  }

 private:
  VaeShape shape_;
  Mlp<Scalar> encoder_;
  Mlp<Scalar> decoder_;
};

}  // namespace nullcal::nn
