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

namespace nullcal {

/// Scalar summary T(beta) used for SBC ranks.
struct TestStatistic {
  enum class Kind { l2_norm, peak_ratio, coordinate };

  Kind kind = Kind::l2_norm;
  Eigen::Index index = 0;  // coordinate only

  static TestStatistic l2() { return {Kind::l2_norm, 0}; }
  static TestStatistic peak() { return {Kind::peak_ratio, 0}; }
  static TestStatistic coordinate(Eigen::Index k) { return {Kind::coordinate, k}; }

  /// "l2", "peak", "coord3", ...
  std::string name() const;
  static TestStatistic parse(const std::string& name);
};

/// ||beta||_2, ||beta||_inf / ||beta||_2, or beta_k.
/// Throws DegenerateInput for the peak ratio of the zero vector.
double evaluate_statistic(const TestStatistic& stat, const Eigen::Ref<const Eigen::VectorXd>& beta);

}  // namespace nullcal
