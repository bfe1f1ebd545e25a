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

#include "nullcal/models/vae.hpp"

#include <cmath>

#include "nullcal/io/json_io.hpp"
#include "nullcal/nn/adam.hpp"

namespace nullcal {

VaeNullModel::VaeNullModel(VaeConfig config, Net net, nn::Standardizer alpha_norm, nn::Whitener beta_norm)
    : config_(config), net_(std::move(net)), alpha_norm_(std::move(alpha_norm)), beta_norm_(std::move(beta_norm)) {
  require_dims(alpha_norm_.dim() == net_.shape().cond_dim && beta_norm_.latent_dim() == net_.shape().data_dim,
               "VaeNullModel: normalizer dims do not match the network");
}

Eigen::MatrixXd VaeNullModel::sample(const Eigen::VectorXd& alpha, Eigen::Index count, std::uint64_t seed) const {
  require_dims(alpha.size() == cond_dim(), "vae sample: alpha has wrong length");
  if (count == 0) return Eigen::MatrixXd(out_dim(), 0);
  Rng rng(seed);
  Matrix<float> z(net_.shape().latent_dim, count);
  fill_normal_float(rng, z);
  const Matrix<float> cond = alpha_norm_.forward(alpha).cast<float>().replicate(1, count);
  Matrix<float> decoded = net_.decode(z, cond);
  if (config_.decode_noise) {
    Matrix<float> noise(decoded.rows(), decoded.cols());
    fill_normal_float(rng, noise);
    decoded += noise;
  }
  return beta_norm_.inverse(decoded.cast<double>());
}

double VaeNullModel::reconstruction_mse(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& beta) const {
  require_dims(alpha.cols() == beta.cols(), "reconstruction_mse: count mismatch");
  const Matrix<float> rec =
      net_.reconstruct_mean(beta_norm_.forward(beta).cast<float>(), alpha_norm_.forward(alpha).cast<float>());
  const Eigen::MatrixXd diff = beta_norm_.inverse(rec.cast<double>()) - beta;
  return diff.squaredNorm() / static_cast<double>(diff.size());
}

VaeNullModel VaeNullModel::with_decode_noise(bool on) const {
  VaeConfig c = config_;
  c.decode_noise = on;
  return VaeNullModel(c, net_, alpha_norm_, beta_norm_);
}

nlohmann::json VaeNullModel::checkpoint() const {
  nlohmann::json j;
  j["format_version"] = io::kFormatVersion;
  j["kind"] = kind();
  j["config"] = io::to_json(config_);
  j["shape"] = {{"data_dim", out_dim()}, {"cond_dim", cond_dim()}, {"latent_dim", beta_norm_.latent_dim()}};
  j["schedule"] = nullptr;
  auto layers = net_.encoder().layers();
  const auto& dec = net_.decoder().layers();
  layers.insert(layers.end(), dec.begin(), dec.end());
  j["layers"] = io::layers_to_json(layers);
  j["normalization"] = {{"alpha", io::standardizer_to_json(alpha_norm_)},
                        {"beta", io::whitener_to_json(beta_norm_)}};
  return j;
}

VaeNullModel train_null_vae(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& beta, const VaeConfig& config,
                            TrainingHistory* history) {
  if (alpha.cols() == 0) throw InvalidConfig("train_null_vae: empty dataset");
  require_dims(alpha.cols() == beta.cols(), "train_null_vae: alpha/beta count mismatch");
  if (config.epochs < 1 || config.batch < 1 || !(config.lr > 0) || config.latent_dim < 1 || config.blocks < 1 ||
      config.hidden < 1 || config.kl_weight < 0)
    throw InvalidConfig("train_null_vae: invalid config");

  const auto alpha_norm =
      config.normalization == nn::Normalization::none ? nn::Standardizer::identity(alpha.rows())
                                                      : nn::Standardizer::fit(alpha);
  const auto beta_norm = nn::Whitener::fit(beta, config.normalization, config.pca_tolerance);
  const Matrix<float> cond_all = alpha_norm.forward(alpha).cast<float>();
  const Matrix<float> data_all = beta_norm.forward(beta).cast<float>();

  nn::VaeShape shape;
  shape.data_dim = static_cast<int>(beta_norm.latent_dim());
  shape.cond_dim = static_cast<int>(alpha.rows());
  shape.latent_dim = config.latent_dim;
  shape.hidden = config.hidden;
  shape.blocks = config.blocks;
  Rng init_rng = Rng(config.seed).substream(1);
  VaeNullModel::Net net(shape, init_rng);

  nn::Adam<float> adam(net.parameters(), {config.lr, 0.9, 0.999, 1e-8});
  auto grads = net.zero_gradients();
  MinibatchSampler batches(alpha.cols(), Rng(config.seed).substream(2));
  Rng noise_rng = Rng(config.seed).substream(3);

  const int b = static_cast<int>(std::min<Eigen::Index>(config.batch, alpha.cols()));
  const long per_epoch = std::max<long>(1, static_cast<long>(alpha.cols() / b));
  const long total = per_epoch * config.epochs;
  Matrix<float> eps(shape.latent_dim, b);
  for (long step = 1; step <= total; ++step) {
    const auto idx = batches.next(b);
    fill_normal_float(noise_rng, eps);
    const auto l = net.loss(gather_columns(data_all, idx), gather_columns(cond_all, idx), eps, config.kl_weight, &grads);
    if (!std::isfinite(l.total)) throw TrainingDiverged("null-vae: non-finite loss", step);
    if (history) history->record(step, l.total);
    adam.step(net.parameters(), VaeNullModel::Net::gradient_spans(grads));
  }
  return VaeNullModel(config, std::move(net), alpha_norm, beta_norm);
}

}  // namespace nullcal
