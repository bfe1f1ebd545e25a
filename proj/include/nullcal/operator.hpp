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

#include <optional>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "nullcal/error.hpp"
#include "nullcal/linalg.hpp"
#include "nullcal/rng.hpp"

namespace nullcal {

/// Linear measurement model y = A x + noise_sigma * w.
template <typename Scalar = double>
class ForwardOperator {
 public:
  ForwardOperator(Matrix<Scalar> matrix, Scalar noise_sigma = 0)
      : matrix_(std::move(matrix)), noise_sigma_(noise_sigma) {
    if (matrix_.rows() < 1 || matrix_.cols() < 1)
      throw InvalidOperator("operator must have at least one row and column");
    if (!matrix_.allFinite()) throw InvalidOperator("operator has non-finite entries");
    if (!(noise_sigma_ >= 0)) throw InvalidOperator("noise_sigma must be nonnegative");
  }

  const Matrix<Scalar>& matrix() const { return matrix_; }
  Scalar noise_sigma() const { return noise_sigma_; }
  Eigen::Index measurements() const { return matrix_.rows(); }
  Eigen::Index signal_dim() const { return matrix_.cols(); }

 private:
  Matrix<Scalar> matrix_;
  Scalar noise_sigma_;
};

/// Orthonormal bases of the identifiable subspace (row space of A) and of
/// Null(A), plus the singular values that define the split.
template <typename Scalar = double>
class RangeNullBasis {
 public:
  RangeNullBasis(Matrix<Scalar> v_range, Matrix<Scalar> v_null, Vector<Scalar> singular_values)
      : v_range_(std::move(v_range)),
        v_null_(std::move(v_null)),
        singular_values_(std::move(singular_values)) {
    if (v_range_.rows() != v_null_.rows())
      throw DimensionError("range and null bases must share the signal dimension");
    if (v_range_.cols() + v_null_.cols() != v_range_.rows())
      throw DimensionError("range and null bases must together span the signal space");
  }

  const Matrix<Scalar>& v_range() const { return v_range_; }
  const Matrix<Scalar>& v_null() const { return v_null_; }
  const Vector<Scalar>& singular_values() const { return singular_values_; }
  Eigen::Index rank() const { return v_range_.cols(); }
  Eigen::Index null_dim() const { return v_null_.cols(); }
  Eigen::Index signal_dim() const { return v_range_.rows(); }

 private:
  Matrix<Scalar> v_range_;
  Matrix<Scalar> v_null_;
  Vector<Scalar> singular_values_;
};

template <typename Scalar = double>
struct CoefficientPair {
  Vector<Scalar> alpha;
  Vector<Scalar> beta;
};

/// Splits the right singular vectors of A at sigma_i > tol * sigma_max.
///
/// Both blocks come from one orthogonal factor, so they are mutually
/// orthogonal by construction. The spectrum returned holds every singular value of A (the
/// first `rank()` of them are the retained ones). The zero matrix yields
/// rank 0 and an identity null basis.
template <typename Scalar>
RangeNullBasis<Scalar> decompose_operator(const ForwardOperator<Scalar>& op,
                                          Scalar rank_tolerance = Scalar(1e-10)) {
  if (!(rank_tolerance > 0 && rank_tolerance < 1))
    throw InvalidConfig("rank_tolerance must lie in (0, 1)");
  const Matrix<Scalar>& a = op.matrix();
  const Eigen::Index p = a.cols();
  if (a.isZero(0)) {
    return RangeNullBasis<Scalar>(Matrix<Scalar>(p, 0), Matrix<Scalar>::Identity(p, p),
                                  Vector<Scalar>::Zero(std::min(a.rows(), p)));
  }
  // A^T = Q R, then the small SVD of R^T rotates the leading columns of Q
  // onto the right singular vectors. Q's trailing columns span Null(A)
  // exactly, which a dense divide-and-conquer SVD does not guarantee on
  // matrices with many repeated singular values.
  const Eigen::Index m = std::min(a.rows(), p);
  const Eigen::HouseholderQR<Matrix<Scalar>> qr(a.transpose());
  Matrix<Scalar> v = qr.householderQ() * Matrix<Scalar>::Identity(p, p);
  const Matrix<Scalar> rt = qr.matrixQR().topRows(m).template triangularView<Eigen::Upper>().transpose();
  const Eigen::JacobiSVD<Matrix<Scalar>> svd(rt, Eigen::ComputeFullV);
  const Vector<Scalar> s = svd.singularValues();
  v.leftCols(m) = (v.leftCols(m) * svd.matrixV()).eval();
  Eigen::Index rank = 0;
  while (rank < s.size() && s[rank] > rank_tolerance * s[0]) ++rank;
  canonicalize_column_signs(v);
  return RangeNullBasis<Scalar>(v.leftCols(rank), v.rightCols(p - rank), s);
}

template <typename Scalar, typename Derived>
CoefficientPair<Scalar> project(const Eigen::MatrixBase<Derived>& x,
                                const RangeNullBasis<Scalar>& basis) {
  require_dims(x.size() == basis.signal_dim(), "project: signal length mismatch");
  return {basis.v_range().transpose() * x, basis.v_null().transpose() * x};
}

template <typename Scalar>
Vector<Scalar> reconstruct(const CoefficientPair<Scalar>& pair, const RangeNullBasis<Scalar>& basis) {
  require_dims(pair.alpha.size() == basis.rank() && pair.beta.size() == basis.null_dim(),
               "reconstruct: coefficient lengths do not match basis");
  return basis.v_range() * pair.alpha + basis.v_null() * pair.beta;
}

/// Column-wise reconstruction for batches (alpha: r x k, beta: q x k).
template <typename Scalar>
Matrix<Scalar> reconstruct_batch(const Matrix<Scalar>& alpha, const Matrix<Scalar>& beta,
                                 const RangeNullBasis<Scalar>& basis) {
  require_dims(alpha.rows() == basis.rank() && beta.rows() == basis.null_dim() &&
                   alpha.cols() == beta.cols(),
               "reconstruct_batch: coefficient shapes do not match basis");
  return basis.v_range() * alpha + basis.v_null() * beta;
}

/// A x, plus isotropic N(0, sigma^2) noise iff a seed is given.
template <typename Scalar, typename Derived>
Vector<Scalar> apply_forward(const ForwardOperator<Scalar>& op, const Eigen::MatrixBase<Derived>& x,
                             std::optional<std::uint64_t> noise_seed = std::nullopt) {
  require_dims(x.size() == op.signal_dim(), "apply_forward: signal length mismatch");
  Vector<Scalar> y = op.matrix() * x;
  if (noise_seed) {
    Rng rng(*noise_seed);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += op.noise_sigma() * Scalar(rng.normal());
  }
  return y;
}

}  // namespace nullcal
