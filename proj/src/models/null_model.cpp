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

#include "nullcal/models/null_model.hpp"

#include <cmath>

#include "nullcal/io/json_io.hpp"
#include "nullcal/models/cascade.hpp"

namespace nullcal {

OracleNullModel::OracleNullModel(GaussianProblemSpec spec, double covariance_scale)
    : spec_(std::move(spec)), scale_(covariance_scale) {
  if (!(covariance_scale >= 0) || !std::isfinite(covariance_scale))
    throw InvalidConfig("oracle covariance scale must be finite and >= 0");
}

Eigen::MatrixXd OracleNullModel::sample(const Eigen::VectorXd& alpha, Eigen::Index count, std::uint64_t seed) const {
  require_dims(alpha.size() == cond_dim(), "oracle sample: alpha has wrong length");
  Eigen::MatrixXd out(spec_.q(), count);
  if (count == 0) return out;
  const Eigen::VectorXd mean = spec_.c * alpha;
  if (scale_ == 0) {
    out.colwise() = mean;
    return out;
  }
  Rng rng(seed);
  out.noalias() = spec_.cholesky_l.triangularView<Eigen::Lower>() * rng.normal_matrix(spec_.q(), count);
  out *= std::sqrt(scale_);
  out.colwise() += mean;
  return out;
}

nlohmann::json OracleNullModel::checkpoint() const {
  nlohmann::json j;
  j["format_version"] = io::kFormatVersion;
  j["kind"] = kind();
  j["config"] = {{"covariance_scale", scale_}, {"problem", io::to_json(spec_.config)}};
  j["shape"] = {{"data_dim", out_dim()}, {"cond_dim", cond_dim()}};
  j["schedule"] = nullptr;
  j["layers"] = nlohmann::json::array();
  return j;
}

CascadeSamples cascade_sample(const RangeModel& range, const NullModel& null, const RangeNullBasis<double>& basis,
                              const Eigen::VectorXd& y, Eigen::Index count, std::uint64_t seed) {
  require_dims(range.in_dim() == y.size(), "cascade: y does not match the range model");
  require_dims(range.out_dim() == basis.rank() && null.cond_dim() == basis.rank(),
               "cascade: range model / null model / basis rank mismatch");
  require_dims(null.out_dim() == basis.null_dim(), "cascade: null model output does not match the null basis");
  CascadeSamples out;
  out.alpha_hat = range.predict(y);
  const Eigen::MatrixXd betas = null.sample(out.alpha_hat, count, seed);
  out.samples = basis.v_range() * out.alpha_hat.replicate(1, count) + basis.v_null() * betas;
  out.mean = count > 0 ? Eigen::VectorXd(out.samples.rowwise().mean())
                       : Eigen::VectorXd(basis.v_range() * out.alpha_hat);
  return out;
}

}  // namespace nullcal
