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

#include <Eigen/Dense>

#include "nullcal/operator.hpp"

namespace nullcal {

struct GaussianConfig {
  int r = 32;
  int q = 64;
  int n = 32;
  double lambda_max = 8.0;
  double lambda_min = 0.1;
  double sigma_y = 0.3;
  std::uint64_t seed = 0;
};

/// Linear-Gaussian model with exact ambiguity structure:
///   alpha ~ N(0, I_r),  beta | alpha ~ N(C alpha, Sigma_eta),
///   y | alpha ~ N(A alpha, sigma_y^2 I_n).
struct GaussianProblemSpec {
  GaussianConfig config;
  Eigen::MatrixXd a;          // n x r, orthonormal columns
  Eigen::MatrixXd c;          // q x r
  Eigen::MatrixXd sigma_eta;  // q x q
  Eigen::MatrixXd cholesky_l; // lower, L L^T = sigma_eta
  Eigen::VectorXd eigenvalues; // geometric ladder, descending

  int r() const { return config.r; }
  int q() const { return config.q; }
  int n() const { return config.n; }
  double sigma_y() const { return config.sigma_y; }

  /// The problem viewed as a signal x = (alpha, beta) in R^{r+q} measured by
  /// [A 0]; the canonical coordinate split is a valid range/null basis.
  ForwardOperator<double> embedded_operator() const;
  RangeNullBasis<double> embedded_basis() const;
};

struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Columns are samples.
struct GaussianDataset {
  Eigen::MatrixXd alpha;  // r x count
  Eigen::MatrixXd beta;   // q x count
  Eigen::MatrixXd y;      // n x count
  Eigen::Index size() const { return alpha.cols(); }
};

/// lambda_i = lambda_max * (lambda_min / lambda_max)^{(i-1)/(q-1)}
Eigen::VectorXd geometric_ladder(int q, double lambda_max, double lambda_min);

/// Substreams of `seed`: 1 -> A, 2 -> C, 3 -> Q.
GaussianProblemSpec build_problem(const GaussianConfig& config);

/// Sample i uses substream i of `seed`, drawing alpha, z, w in that order.
GaussianDataset sample_joint(const GaussianProblemSpec& spec, Eigen::Index count, std::uint64_t seed);

GaussianPosterior posterior_alpha(const GaussianProblemSpec& spec, const Eigen::VectorXd& y);
GaussianPosterior oracle_beta_given_alpha(const GaussianProblemSpec& spec,
                                          const Eigen::VectorXd& alpha_star);
GaussianPosterior marginal_beta_given_y(const GaussianProblemSpec& spec, const Eigen::VectorXd& y);

}  // namespace nullcal
