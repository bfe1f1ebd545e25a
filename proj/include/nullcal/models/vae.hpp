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

#include "nullcal/models/null_model.hpp"
#include "nullcal/models/training.hpp"
#include "nullcal/nn/diffusion.hpp"
#include "nullcal/nn/vae.hpp"
#include "nullcal/nn/whitener.hpp"

namespace nullcal {

struct VaeConfig {
  int epochs = 200;
  int batch = 256;
  double lr = 1e-3;
  int latent_dim = 16;
  double kl_weight = 1.0;
  int hidden = 256;
  int blocks = 2;
  nn::Normalization normalization = nn::Normalization::pca;
  double pca_tolerance = 1e-3;
  // Add the unit-scale decoder noise when sampling instead of returning the
  // decoder mean.
  bool decode_noise = false;
  std::uint64_t seed = 0;
};

class VaeNullModel final : public NullModel {
 public:
  using Net = nn::ConditionalVae<float>;

  VaeNullModel(VaeConfig config, Net net, nn::Standardizer alpha_norm, nn::Whitener beta_norm);

  std::string kind() const override { return "vae"; }
  Eigen::Index cond_dim() const override { return net_.shape().cond_dim; }
  Eigen::Index out_dim() const override { return beta_norm_.dim(); }
  /// z ~ N(0, I), decoded at alpha.
  Eigen::MatrixXd sample(const Eigen::VectorXd& alpha, Eigen::Index count,
                         std::uint64_t seed) const override;
  nlohmann::json checkpoint() const override;

  /// Mean squared error of decode(encoder mean) against beta, per element.
  double reconstruction_mse(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& beta) const;

  const VaeConfig& config() const { return config_; }
  VaeNullModel with_decode_noise(bool on) const;
  const Net& network() const { return net_; }

 private:
  VaeConfig config_;
  Net net_;
  nn::Standardizer alpha_norm_;
  nn::Whitener beta_norm_;
};

/// Minimizes 0.5 ||beta - dec(z, alpha)||^2 + kl_weight * KL(q(z | beta, alpha) || N(0, I))
/// with the reparameterization trick; history records the per-step loss.
VaeNullModel train_null_vae(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& beta, const VaeConfig& config,
                            TrainingHistory* history = nullptr);

}  // namespace nullcal
