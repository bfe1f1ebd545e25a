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

#include <string>

#include <Eigen/Dense>

#include "nullcal/error.hpp"

namespace nullcal::nn {

enum class Normalization { none, diagonal, pca };

std::string to_string(Normalization n);
Normalization normalization_from_string(const std::string& name);

/// Affine map from data space (dim) to a latent space (latent_dim <= dim):
///   z = to_latent (x - mean),   x = mean + from_latent z.
/// The pca kind keeps principal directions whose variance exceeds
/// tolerance * (largest variance) and scales each to unit variance; the
/// dropped directions are reconstructed at the mean.
struct Whitener {
  Normalization kind = Normalization::none;
  Eigen::VectorXd mean;
  Eigen::MatrixXd to_latent;    // latent_dim x dim
  Eigen::MatrixXd from_latent;  // dim x latent_dim

  static Whitener identity(Eigen::Index dim);
  static Whitener fit(const Eigen::MatrixXd& data, Normalization kind, double tolerance = 1e-6);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const { return to_latent * (x.colwise() - mean); }
  Eigen::MatrixXd inverse(const Eigen::MatrixXd& z) const {
    return (from_latent * z).colwise() + mean;
  }
  Eigen::Index dim() const { return mean.size(); }
  Eigen::Index latent_dim() const { return to_latent.rows(); }
};

}  // namespace nullcal::nn
