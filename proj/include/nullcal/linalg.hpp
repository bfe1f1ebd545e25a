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

#include "nullcal/rng.hpp"

namespace nullcal {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Flip column signs so that each column's largest-magnitude entry is
/// positive (first index wins on ties).
template <typename Derived>
void canonicalize_column_signs(Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index arg = 0;
    m.col(j).cwiseAbs().maxCoeff(&arg);
    if (m(arg, j) < 0) m.col(j) *= -1;
  }
}

/// Q factor of a standard-Gaussian rows x cols draw (rows >= cols) with the
/// R-diagonal sign correction, which makes square Q Haar distributed.
inline Eigen::MatrixXd haar_orthonormal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const Eigen::MatrixXd g = rng.normal_matrix(rows, cols);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(cols).template triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1;
  }
  return q;
}

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) { return m.allFinite(); }

/// Unbiased per-row variance of the columns of `samples` (rows = coordinates).
template <typename Derived>
Eigen::VectorXd row_variance(const Eigen::MatrixBase<Derived>& samples) {
  const Eigen::Index k = samples.cols();
  const Eigen::VectorXd mean = samples.rowwise().mean();
  return (samples.colwise() - mean).rowwise().squaredNorm() / static_cast<double>(k - 1);
}

}  // namespace nullcal
