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

#include "nullcal/calibration/ambiguity.hpp"

#include <vector>

#include "nullcal/calibration/sbc.hpp"
#include "nullcal/error.hpp"
#include "nullcal/linalg.hpp"
#include "nullcal/parallel.hpp"

namespace nullcal {

VarianceCalibration variance_ratios(const Eigen::MatrixXd& samples, const Eigen::VectorXd& analytic_diag) {
  require_dims(samples.rows() == analytic_diag.size(), "variance_ratios: length mismatch");
  if (samples.cols() < 2) throw InvalidConfig("variance_ratios needs at least two samples");
  for (Eigen::Index j = 0; j < analytic_diag.size(); ++j)
    if (!(analytic_diag[j] > 0))
      throw InvalidReference("analytic variance entry " + std::to_string(j) + " is not positive");
  VarianceCalibration out;
  out.ratios = row_variance(samples).cwiseQuotient(analytic_diag);
  out.mean_ratio = out.ratios.mean();
  return out;
}

VarianceCalibration variance_calibration(const NullModel& sampler, const Eigen::VectorXd& alpha_star,
                                         const Eigen::VectorXd& analytic_diag, Eigen::Index sample_count,
                                         std::uint64_t seed) {
  if (sample_count < 100) throw InvalidConfig("variance_calibration needs at least 100 samples");
  require_dims(analytic_diag.size() == sampler.out_dim(), "variance_calibration: reference length mismatch");
  for (Eigen::Index j = 0; j < analytic_diag.size(); ++j)
    if (!(analytic_diag[j] > 0))
      throw InvalidReference("analytic variance entry " + std::to_string(j) + " is not positive");
  return variance_ratios(sampler.sample(alpha_star, sample_count, seed), analytic_diag);
}

Eigen::VectorXd null_variance_diagonal(const Eigen::MatrixXd& v_null, const Eigen::MatrixXd& covariance) {
  require_dims(v_null.cols() == covariance.rows() && covariance.rows() == covariance.cols(),
               "null_variance_diagonal: shape mismatch");
  return (v_null * covariance).cwiseProduct(v_null).rowwise().sum();
}

AmbiguityMap ambiguity_map(const NullModel& sampler, const Eigen::VectorXd& alpha_star,
                           const RangeNullBasis<double>& basis, Eigen::Index samples, std::uint64_t seed) {
  if (samples < 2) throw InvalidConfig("ambiguity_map needs K >= 2");
  require_dims(alpha_star.size() == basis.rank() && sampler.cond_dim() == basis.rank() &&
                   sampler.out_dim() == basis.null_dim(),
               "ambiguity_map: sampler does not match the basis");
  const Eigen::MatrixXd beta = sampler.sample(alpha_star, samples, seed);
  // V_r alpha* is common to every sample and drops out of the variance.
  AmbiguityMap map;
  map.variance = row_variance(basis.v_null() * beta);
  map.samples = samples;
  map.cases = 1;
  map.conditioning = "single case";
  return map;
}

AmbiguityMap ambiguity_map_average(const NullModel& sampler, const Eigen::MatrixXd& alpha_star,
                                   const RangeNullBasis<double>& basis, Eigen::Index samples, std::uint64_t seed) {
  if (alpha_star.cols() < 1) throw InvalidConfig("ambiguity_map_average needs at least one case");
  const auto cases = static_cast<std::size_t>(alpha_star.cols());
  std::vector<Eigen::VectorXd> maps(cases);
  parallel_for(cases, [&](std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    maps[i] = ambiguity_map(sampler, alpha_star.col(ii), basis, samples, case_seed(seed, ii)).variance;
  });
  AmbiguityMap out;
  out.variance = Eigen::VectorXd::Zero(basis.signal_dim());
  for (const auto& m : maps) out.variance += m;
  out.variance /= static_cast<double>(cases);
  out.samples = samples;
  out.cases = static_cast<Eigen::Index>(cases);
  out.conditioning = "averaged over " + std::to_string(cases) + " cases";
  return out;
}

}  // namespace nullcal
