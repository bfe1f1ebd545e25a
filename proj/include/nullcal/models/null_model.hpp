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

#include <cstdint>
#include <memory>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nullcal/gaussian.hpp"

namespace nullcal {

/// A conditional sampler for beta | alpha (the null model of the cascade).
class NullModel {
 public:
  virtual ~NullModel() = default;

  virtual std::string kind() const = 0;
  virtual Eigen::Index cond_dim() const = 0;
  virtual Eigen::Index out_dim() const = 0;

  /// count samples as columns (out_dim x count); deterministic in seed.
  virtual Eigen::MatrixXd sample(const Eigen::VectorXd& alpha, Eigen::Index count,
                                 std::uint64_t seed) const = 0;

  virtual nlohmann::json checkpoint() const = 0;
};

/// Exact conditional of the Gaussian problem, optionally with its
/// covariance multiplied by `covariance_scale` (scaled-oracle). A scale of
/// 0 gives the point mass at C alpha.
class OracleNullModel final : public NullModel {
 public:
  explicit OracleNullModel(GaussianProblemSpec spec, double covariance_scale = 1.0);

  std::string kind() const override { return scale_ == 1.0 ? "oracle" : "scaled-oracle"; }
  Eigen::Index cond_dim() const override { return spec_.r(); }
  Eigen::Index out_dim() const override { return spec_.q(); }
  Eigen::MatrixXd sample(const Eigen::VectorXd& alpha, Eigen::Index count,
                         std::uint64_t seed) const override;
  nlohmann::json checkpoint() const override;

  double covariance_scale() const { return scale_; }
  const GaussianProblemSpec& spec() const { return spec_; }

 private:
  GaussianProblemSpec spec_;
  double scale_;
};

}  // namespace nullcal
