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

#include <vector>

#include "nullcal/models/null_model.hpp"
#include "nullcal/models/training.hpp"
#include "nullcal/nn/denoiser.hpp"
#include "nullcal/nn/diffusion.hpp"
#include "nullcal/nn/whitener.hpp"

namespace nullcal {

struct DdpmConfig {
  long steps = 50000;
  int batch = 256;
  double lr = 3e-4;
  int diffusion_steps = 1000;
  double beta_first = 1e-4;
  double beta_last = 0.02;
  int hidden = 256;
  int blocks = 2;
  int time_dim = 64;
  nn::Conditioning conditioning = nn::Conditioning::concat;
  nn::Normalization normalization = nn::Normalization::pca;
  double pca_tolerance = 1e-3;
  // Clip the predicted x_0 to the training range in normalized units and
  // step with the posterior mean.
  bool clip_denoised = true;
  // Exponential moving average of the weights; 0 keeps the last iterate.
  double ema_decay = 0.999;
  std::uint64_t seed = 0;
};

/// Conditional DDPM over beta given alpha. Networks run in single precision;
/// inputs and outputs are double. Reverse steps use variance beta_t and no
/// noise on the final step.
class DdpmNullModel final : public NullModel {
 public:
  using Net = nn::Denoiser<float>;

  DdpmNullModel(DdpmConfig config, Net net, nn::Standardizer alpha_norm, nn::Whitener beta_norm,
                double clip_bound = 0.0);

  std::string kind() const override { return "ddpm"; }
  Eigen::Index cond_dim() const override { return net_.shape().cond_dim; }
  Eigen::Index out_dim() const override { return beta_norm_.dim(); }
  Eigen::MatrixXd sample(const Eigen::VectorXd& alpha, Eigen::Index count,
                         std::uint64_t seed) const override;
  nlohmann::json checkpoint() const override;

  const DdpmConfig& config() const { return config_; }
  const nn::DiffusionSchedule& schedule() const { return schedule_; }
  const Net& network() const { return net_; }
  const nn::Standardizer& alpha_normalizer() const { return alpha_norm_; }
  const nn::Whitener& beta_normalizer() const { return beta_norm_; }
  double clip_bound() const { return clip_bound_; }

 private:
  DdpmConfig config_;
  nn::DiffusionSchedule schedule_;
  Net net_;
  nn::Standardizer alpha_norm_;
  nn::Whitener beta_norm_;
  double clip_bound_ = 0.0;  // max |entry| of the normalized training data
  Matrix<float> time_table_;  // time_dim x T
};

/// Noise-prediction training on (alpha*, beta*) columns, with beta mapped
/// through the configured normalizer first: per step draw a
/// minibatch, t ~ U{1..T}, eps ~ N(0, I), and regress eps from
/// sqrt(abar_t) beta + sqrt(1 - abar_t) eps. Loss is the per-element MSE.
DdpmNullModel train_null_ddpm(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& beta,
                              const DdpmConfig& config, TrainingHistory* history = nullptr);

/// x_t = sqrt(abar_t) x_0 + sqrt(1 - abar_t) eps for one t (columns of x0).
Eigen::MatrixXd forward_noise(const nn::DiffusionSchedule& schedule, const Eigen::MatrixXd& x0, int t,
                              Rng& rng);

}  // namespace nullcal
