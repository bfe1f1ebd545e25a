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
#include <string>

#include <Eigen/Dense>

#include "nullcal/models/null_model.hpp"
#include "nullcal/operator.hpp"

namespace nullcal {

struct VarianceCalibration {
  Eigen::VectorXd ratios;  // empirical / analytic, per coordinate
  double mean_ratio = 0;
};

/// Per-coordinate unbiased sample variance of `samples` divided by
/// `analytic_diag`. Throws InvalidReference if an analytic entry is <= 0.
VarianceCalibration variance_ratios(const Eigen::MatrixXd& samples, const Eigen::VectorXd& analytic_diag);

/// Draws sample_count (>= 100) samples at alpha_star and compares their
/// variance with analytic_diag.
VarianceCalibration variance_calibration(const NullModel& sampler, const Eigen::VectorXd& alpha_star,
                                         const Eigen::VectorXd& analytic_diag, Eigen::Index sample_count,
                                         std::uint64_t seed);

/// Per-coordinate variance of x = V_r alpha* + V_n beta with beta drawn
/// from the null model at alpha*.
struct AmbiguityMap {
  Eigen::VectorXd variance;  // length p
  Eigen::Index samples = 0;  // K per case
  Eigen::Index cases = 0;
  std::string conditioning;  // "case <i>" or "averaged over <n> cases"
};

AmbiguityMap ambiguity_map(const NullModel& sampler, const Eigen::VectorXd& alpha_star,
                           const RangeNullBasis<double>& basis, Eigen::Index samples, std::uint64_t seed);

/// Mean of the per-case maps over the columns of alpha_star. Case i uses
/// case_seed(seed, i).
AmbiguityMap ambiguity_map_average(const NullModel& sampler, const Eigen::MatrixXd& alpha_star,
                                   const RangeNullBasis<double>& basis, Eigen::Index samples, std::uint64_t seed);

/// diag(V_n S V_n^T) without forming the p x p product.
Eigen::VectorXd null_variance_diagonal(const Eigen::MatrixXd& v_null, const Eigen::MatrixXd& covariance);

}  // namespace nullcal
