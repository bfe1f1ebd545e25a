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

#include <cmath>

#include <Eigen/Dense>

#include "nullcal/error.hpp"
#include "nullcal/linalg.hpp"

namespace nullcal::nn {

/// Linear DDPM noise schedule. Index t runs 1..T; storage is 0-based.
class DiffusionSchedule {
 public:
  DiffusionSchedule(int steps, double beta_first, double beta_last)
      : beta_first_(beta_first), beta_last_(beta_last) {
    if (steps < 2) throw InvalidConfig("diffusion schedule needs T >= 2");
    if (!(0 < beta_first && beta_first < beta_last && beta_last < 1))
      throw InvalidConfig("diffusion schedule needs 0 < beta_1 < beta_T < 1");
    betas_ = Eigen::VectorXd::LinSpaced(steps, beta_first, beta_last);
    alpha_bars_.resize(steps);
    double prod = 1.0;
    for (int i = 0; i < steps; ++i) {
      prod *= 1.0 - betas_[i];
      alpha_bars_[i] = prod;
    }
  }

  int steps() const { return static_cast<int>(betas_.size()); }
  double beta_first() const { return beta_first_; }
  double beta_last() const { return beta_last_; }
  double beta(int t) const { return betas_[t - 1]; }
  double alpha_bar(int t) const { return alpha_bars_[t - 1]; }
  const Eigen::VectorXd& betas() const { return betas_; }
  const Eigen::VectorXd& alpha_bars() const { return alpha_bars_; }

 private:
  double beta_first_, beta_last_;
  Eigen::VectorXd betas_;
  Eigen::VectorXd alpha_bars_;
};

/// Sinusoidal features of s = t / T: sin(w_i s), cos(w_i s) with w_i
/// log-spaced on [1, 1000] so neighbouring steps stay distinguishable.
template <typename Scalar>
Vector<Scalar> time_embedding(int t, int steps, int dim) {
  Vector<Scalar> e(dim);
  const int half = dim / 2;
  const double s = static_cast<double>(t) / steps;
  for (int i = 0; i < half; ++i) {
    const double w = half == 1 ? 1.0 : std::pow(1000.0, static_cast<double>(i) / (half - 1));
    e[i] = static_cast<Scalar>(std::sin(w * s));
    e[half + i] = static_cast<Scalar>(std::cos(w * s));
  }
  if (dim % 2) e[dim - 1] = static_cast<Scalar>(s);
  return e;
}

/// Per-coordinate affine standardization fitted on training columns.
/// Coordinates with (near) zero spread keep unit scale.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& data) {
    Standardizer s;
    s.mean = data.rowwise().mean();
    s.scale = ((data.colwise() - s.mean).rowwise().squaredNorm() / static_cast<double>(data.cols()))
                  .cwiseSqrt();
    for (Eigen::Index i = 0; i < s.scale.size(); ++i)
      if (!(s.scale[i] > 1e-6)) s.scale[i] = 1.0;
    return s;
  }
  static Standardizer identity(Eigen::Index dim) {
    return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
  }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const {
    return (x.colwise() - mean).array().colwise() / scale.array();
  }
  Eigen::MatrixXd inverse(const Eigen::MatrixXd& z) const {
    return ((z.array().colwise() * scale.array()).matrix()).colwise() + mean;
  }
  Eigen::Index dim() const { return mean.size(); }
};

}  // namespace nullcal::nn
