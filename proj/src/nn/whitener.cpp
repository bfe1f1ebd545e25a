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

#include "nullcal/nn/whitener.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace nullcal::nn {

std::string to_string(Normalization n) {
  switch (n) {
    case Normalization::none:
      return "none";
    case Normalization::diagonal:
      return "diagonal";
    case Normalization::pca:
      return "pca";
  }
  return "none";
}

Normalization normalization_from_string(const std::string& name) {
  if (name == "none") return Normalization::none;
  if (name == "diagonal") return Normalization::diagonal;
  if (name == "pca") return Normalization::pca;
  throw InvalidConfig("unknown normalization '" + name + "'");
}

Whitener Whitener::identity(Eigen::Index dim) {
  Whitener w;
  w.mean = Eigen::VectorXd::Zero(dim);
  w.to_latent = Eigen::MatrixXd::Identity(dim, dim);
  w.from_latent = Eigen::MatrixXd::Identity(dim, dim);
  return w;
}

Whitener Whitener::fit(const Eigen::MatrixXd& data, Normalization kind, double tolerance) {
  if (kind == Normalization::none) return identity(data.rows());
  if (data.cols() < 2) throw DegenerateInput("normalizer fit needs at least two columns");
  Whitener w;
  w.kind = kind;
  w.mean = data.rowwise().mean();
  const Eigen::MatrixXd centered = data.colwise() - w.mean;
  const double n = static_cast<double>(data.cols());

  if (kind == Normalization::diagonal) {
    Eigen::VectorXd scale = (centered.rowwise().squaredNorm() / n).cwiseSqrt();
    for (Eigen::Index i = 0; i < scale.size(); ++i)
      if (!(scale[i] > 1e-6)) scale[i] = 1.0;
    w.to_latent = scale.cwiseInverse().asDiagonal();
    w.from_latent = scale.asDiagonal();
    return w;
  }

  if (!(tolerance >= 0 && tolerance < 1)) throw InvalidConfig("pca tolerance must lie in [0, 1)");
  const Eigen::MatrixXd cov = centered * centered.transpose() / n;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd& lam = eig.eigenvalues();  // ascending
  const double top = lam[lam.size() - 1];
  if (!(top > 1e-12)) {
    // No spread: centre only, like the diagonal floor.
    w.to_latent = Eigen::MatrixXd::Identity(data.rows(), data.rows());
    w.from_latent = w.to_latent;
    return w;
  }
  Eigen::Index keep = 0;
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam[i] > tolerance * top) ++keep;
  const Eigen::Index d = data.rows();
  w.to_latent.resize(keep, d);
  w.from_latent.resize(d, keep);
  for (Eigen::Index k = 0; k < keep; ++k) {
    const Eigen::Index src = d - 1 - k;
    const double s = std::sqrt(lam[src]);
    w.to_latent.row(k) = eig.eigenvectors().col(src).transpose() / s;
    w.from_latent.col(k) = eig.eigenvectors().col(src) * s;
  }
  return w;
}

}  // namespace nullcal::nn
