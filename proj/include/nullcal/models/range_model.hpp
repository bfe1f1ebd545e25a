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

#include <memory>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nullcal/models/training.hpp"
#include "nullcal/nn/diffusion.hpp"
#include "nullcal/nn/mlp.hpp"

namespace nullcal {

struct RangeConfig {
  std::string kind = "mlp";  // mlp | ridge
  int epochs = 100;
  int batch = 256;
  double lr = 1e-3;
  // Cosine decay of the learning rate to zero over training.
  bool cosine_decay = true;
  int hidden = 256;
  int blocks = 2;
  double ridge_lambda = 1e-8;
  std::uint64_t seed = 0;
};

/// Deterministic range model y -> alpha_hat (point-mass approximation of
/// p(alpha | y)).
class RangeModel {
 public:
  virtual ~RangeModel() = default;
  virtual std::string kind() const = 0;
  virtual Eigen::Index in_dim() const = 0;
  virtual Eigen::Index out_dim() const = 0;
  /// Columns of y -> columns of alpha_hat.
  virtual Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& y) const = 0;
  virtual nlohmann::json checkpoint() const = 0;

  Eigen::VectorXd predict(const Eigen::VectorXd& y) const { return predict_batch(y).col(0); }
};

/// alpha_hat = W y + b, fitted in closed form with an unpenalized intercept.
class RidgeRangeModel final : public RangeModel {
 public:
  RidgeRangeModel(Eigen::MatrixXd weight, Eigen::VectorXd bias, double lambda);
  std::string kind() const override { return "ridge"; }
  Eigen::Index in_dim() const override { return weight_.cols(); }
  Eigen::Index out_dim() const override { return weight_.rows(); }
  Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& y) const override;
  nlohmann::json checkpoint() const override;

  const Eigen::MatrixXd& weight() const { return weight_; }
  const Eigen::VectorXd& bias() const { return bias_; }

 private:
  Eigen::MatrixXd weight_;
  Eigen::VectorXd bias_;
  double lambda_;
};

class MlpRangeModel final : public RangeModel {
 public:
  MlpRangeModel(RangeConfig config, nn::Mlp<float> net, nn::Standardizer y_norm, nn::Standardizer alpha_norm);
  std::string kind() const override { return "mlp"; }
  Eigen::Index in_dim() const override { return net_.input_dim(); }
  Eigen::Index out_dim() const override { return net_.output_dim(); }
  Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& y) const override;
  nlohmann::json checkpoint() const override;

 private:
  RangeConfig config_;
  nn::Mlp<float> net_;
  nn::Standardizer y_norm_, alpha_norm_;
};

/// Fits y (n x N) -> alpha* (r x N) by squared error.
std::unique_ptr<RangeModel> train_range(const Eigen::MatrixXd& y, const Eigen::MatrixXd& alpha,
                                        const RangeConfig& config, TrainingHistory* history = nullptr);

}  // namespace nullcal
