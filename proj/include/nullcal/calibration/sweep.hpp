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
#include <vector>

#include <Eigen/Dense>

#include "nullcal/models/null_model.hpp"
#include "nullcal/operator.hpp"

namespace nullcal {

/// Map from a measurement to the identifiable coefficients of its
/// least-squares estimate: alpha_hat = V_r^T pinv(A) y.
Eigen::MatrixXd identifiable_estimator(const ForwardOperator<double>& op, const RangeNullBasis<double>& basis);

struct NoiseSweepOptions {
  std::vector<double> sigmas{0.0, 0.025, 0.05, 0.1, 0.2, 0.4};
  Eigen::Index samples = 32;            // K per conditioning point
  int noise_pairs = 4;                  // antithetic measurement-noise pairs per case
  Eigen::Index intrinsic_samples = 64;  // K at the oracle alpha*
  std::uint64_t seed = 0;
};

/// Mean per-pixel variances for one noise level, averaged over cases.
struct NoiseSweepRow {
  double sigma = 0;
  double intrinsic = 0;       // conditioned on alpha*
  double intrinsic_se = 0;    // standard error across cases
  double intrinsic_shift_se = 0;  // SE of the paired difference to the sigma = 0 intrinsic estimate
  double total = 0;           // conditioned on alpha_hat, marginalized over noise
  double total_se = 0;
  double propagated = 0;      // total(sigma) - total(0), paired over cases and streams
  double propagated_se = 0;
};

/// Sample streams for (case, noise draw) and the noise draws themselves are
/// shared across sigma, so differences between rows are low-variance.
/// total = mean_j Var_k + (Var_j mean_k - mean_j Var_k / K), which is
/// unbiased for E Var(beta | alpha_hat) + Var E(beta | alpha_hat).
std::vector<NoiseSweepRow> noise_sweep(const NullModel& null, const ForwardOperator<double>& op,
                                       const RangeNullBasis<double>& basis, const Eigen::MatrixXd& alpha_star,
                                       const NoiseSweepOptions& options);

/// Least-squares slope of log(y) on log(x) over points with x, y > 0.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct BoundCheckOptions {
  int probes = 10;                 // noise draws and random pairs per case
  Eigen::Index mean_samples = 64;  // samples behind each conditional-mean estimate
  double jacobian_step = 0.05;     // central-difference step in alpha units
  std::uint64_t seed = 0;
};

struct BoundCheckReport {
  double sigma = 0;
  double lipschitz_estimate = 0;  // max over cases of max(jacobian, pairs)
  double lipschitz_jacobian = 0;  // max over cases of ||J m||_2 at alpha*
  double lipschitz_pairs = 0;     // max over cases of pair ratios at scale sigma
  double lhs = 0;                 // mean over cases of tr Var m(alpha_hat)
  double rhs = 0;                 // mean over cases of L_i^2 E||alpha_hat - alpha*||^2
  double mc_floor = 0;            // mean tr Var(beta | alpha*) / mean_samples
  Eigen::Index cases = 0;
  bool holds(double slack = 1.0) const { return lhs <= slack * rhs; }
};

/// Checks tr Var m(alpha_hat) <= L^2 E||alpha_hat - alpha*||^2 with m the
/// sample-mean estimate of E[beta | alpha] on common random numbers. L is
/// local: the larger of the spectral norm of the central-difference
/// Jacobian at alpha* and the largest ratio over random pairs at scale
/// sigma. The Jacobian is computed once per case and shared across sigmas.
std::vector<BoundCheckReport> propagated_bound_check(const NullModel& null, const ForwardOperator<double>& op,
                                                     const RangeNullBasis<double>& basis,
                                                     const Eigen::MatrixXd& alpha_star,
                                                     const std::vector<double>& sigmas,
                                                     const BoundCheckOptions& options);

BoundCheckReport propagated_bound_check(const NullModel& null, const ForwardOperator<double>& op,
                                        const RangeNullBasis<double>& basis, const Eigen::MatrixXd& alpha_star,
                                        double sigma, const BoundCheckOptions& options);

}  // namespace nullcal
