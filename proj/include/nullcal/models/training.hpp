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

#include <algorithm>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "nullcal/rng.hpp"

namespace nullcal {

/// Loss per optimizer step.
struct TrainingHistory {
  std::vector<long> step;
  std::vector<double> loss;

  void record(long s, double l) {
    step.push_back(s);
    loss.push_back(l);
  }
  bool empty() const { return loss.empty(); }
  /// Mean loss over steps [from, to) clamped to the recorded range.
  double mean_loss(std::size_t from, std::size_t to) const {
    to = std::min(to, loss.size());
    double s = 0;
    for (std::size_t i = from; i < to; ++i) s += loss[i];
    return to > from ? s / static_cast<double>(to - from) : 0.0;
  }
};

/// Cycles through shuffled epochs of column indices.
class MinibatchSampler {
 public:
  MinibatchSampler(Eigen::Index count, Rng rng) : count_(count), rng_(rng) {
    order_.resize(static_cast<std::size_t>(count));
    reshuffle();
  }

  std::vector<Eigen::Index> next(int batch) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(batch));
    for (auto& i : idx) {
      if (pos_ == order_.size()) reshuffle();
      i = order_[pos_++];
    }
    return idx;
  }

 private:
  void reshuffle() {
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<Eigen::Index>(i);
    for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng_.below(i)]);
    pos_ = 0;
  }

  Eigen::Index count_;
  Rng rng_;
  std::vector<Eigen::Index> order_;
  std::size_t pos_ = 0;
};

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gather_columns(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& data, const std::vector<Eigen::Index>& idx) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(data.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = data.col(idx[j]);
  return out;
}

}  // namespace nullcal
