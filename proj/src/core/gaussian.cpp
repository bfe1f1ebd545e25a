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

#include "nullcal/gaussian.hpp"

#include <cassert>
#include <cmath>

#include "nullcal/error.hpp"
#include "nullcal/linalg.hpp"

namespace nullcal {

Eigen::VectorXd geometric_ladder(int q, double lambda_max, double lambda_min) {
  Eigen::VectorXd ladder(q);
  for (int i = 0; i < q; ++i) {
    const double frac = q == 1 ? 0.0 : static_cast<double>(i) / (q - 1);
    ladder[i] = lambda_max * std::pow(lambda_min / lambda_max, frac);
  }
  return ladder;
}

GaussianProblemSpec build_problem(const GaussianConfig& config) {
  if (config.r < 1 || config.q < 1 || config.n < 1)
    throw InvalidConfig("r, q, n must be positive");
  if (config.n < config.r) throw InvalidConfig("n < r: QR cannot give orthonormal columns");
  if (!(config.lambda_min > 0 && config.lambda_max >= config.lambda_min))
    throw InvalidConfig("need lambda_max >= lambda_min > 0");
  if (!(config.sigma_y > 0)) throw InvalidConfig("sigma_y must be positive");

  GaussianProblemSpec spec;
  spec.config = config;
  Rng rng_a(config.seed, 1), rng_c(config.seed, 2), rng_q(config.seed, 3);
  spec.a = haar_orthonormal(config.n, config.r, rng_a);
  spec.c = rng_c.normal_matrix(config.q, config.r) / std::sqrt(static_cast<double>(config.r));
  const Eigen::MatrixXd q = haar_orthonormal(config.q, config.q, rng_q);
  spec.eigenvalues = geometric_ladder(config.q, config.lambda_max, config.lambda_min);
  spec.sigma_eta = q * spec.eigenvalues.asDiagonal() * q.transpose();
  spec.sigma_eta = 0.5 * (spec.sigma_eta + spec.sigma_eta.transpose()).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(spec.sigma_eta);
  assert(llt.info() == Eigen::Success && "Sigma_eta lost positive definiteness");
  if (llt.info() != Eigen::Success) throw Error("internal: Sigma_eta is not positive definite");
  spec.cholesky_l = llt.matrixL();
  return spec;
}

ForwardOperator<double> GaussianProblemSpec::embedded_operator() const {
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n(), r() + q());
  full.leftCols(r()) = a;
  return ForwardOperator<double>(std::move(full), config.sigma_y);
}

RangeNullBasis<double> GaussianProblemSpec::embedded_basis() const {
  const int p = r() + q();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(p, p);
  // A has orthonormal columns, so every retained singular value is 1.
  return RangeNullBasis<double>(eye.leftCols(r()), eye.rightCols(q()), Eigen::VectorXd::Ones(r()));
}

GaussianDataset sample_joint(const GaussianProblemSpec& spec, Eigen::Index count, std::uint64_t seed) {
  if (count < 1) throw InvalidConfig("sample_joint: count must be >= 1");
  GaussianDataset data{Eigen::MatrixXd(spec.r(), count), Eigen::MatrixXd(spec.q(), count),
                       Eigen::MatrixXd(spec.n(), count)};
  for (Eigen::Index i = 0; i < count; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    const Eigen::VectorXd alpha = rng.normal_vector(spec.r());
    const Eigen::VectorXd z = rng.normal_vector(spec.q());
    const Eigen::VectorXd w = rng.normal_vector(spec.n());
    data.alpha.col(i) = alpha;
    data.beta.col(i) = spec.c * alpha + spec.cholesky_l * z;
    data.y.col(i) = spec.a * alpha + spec.sigma_y() * w;
  }
  return data;
}

GaussianPosterior posterior_alpha(const GaussianProblemSpec& spec, const Eigen::VectorXd& y) {
  require_dims(y.size() == spec.n(), "posterior_alpha: y length mismatch");
  const double prec = 1.0 / (spec.sigma_y() * spec.sigma_y());
  const Eigen::MatrixXd precision =
      Eigen::MatrixXd::Identity(spec.r(), spec.r()) + prec * spec.a.transpose() * spec.a;
  Eigen::MatrixXd cov = precision.llt().solve(Eigen::MatrixXd::Identity(spec.r(), spec.r()));
  cov = 0.5 * (cov + cov.transpose()).eval();
  Eigen::VectorXd mean = prec * cov * (spec.a.transpose() * y);
  return {std::move(mean), std::move(cov)};
}

GaussianPosterior oracle_beta_given_alpha(const GaussianProblemSpec& spec,
                                          const Eigen::VectorXd& alpha_star) {
  require_dims(alpha_star.size() == spec.r(), "oracle_beta_given_alpha: alpha length mismatch");
  return {spec.c * alpha_star, spec.sigma_eta};
}

GaussianPosterior marginal_beta_given_y(const GaussianProblemSpec& spec, const Eigen::VectorXd& y) {
  const GaussianPosterior post = posterior_alpha(spec, y);
  Eigen::MatrixXd cov = spec.c * post.covariance * spec.c.transpose() + spec.sigma_eta;
  cov = 0.5 * (cov + cov.transpose()).eval();
  return {spec.c * post.mean, std::move(cov)};
}

}  // namespace nullcal
