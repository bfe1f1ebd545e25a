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

#include "nullcal/models/null_model.hpp"
#include "nullcal/models/range_model.hpp"
#include "nullcal/operator.hpp"

namespace nullcal {

struct CascadeSamples {
  Eigen::VectorXd alpha_hat;
  Eigen::MatrixXd samples;  // p x count, x = V_r alpha_hat + V_n beta
  Eigen::VectorXd mean;     // posterior sample mean
};

/// Range model first, then null samples at alpha_hat.
CascadeSamples cascade_sample(const RangeModel& range, const NullModel& null, const RangeNullBasis<double>& basis,
                              const Eigen::VectorXd& y, Eigen::Index count, std::uint64_t seed);

}  // namespace nullcal
