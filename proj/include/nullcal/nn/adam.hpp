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
#include <cstddef>
#include <vector>

#include "nullcal/error.hpp"
#include "nullcal/nn/mlp.hpp"

namespace nullcal::nn {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias-corrected moments over a fixed list of parameter blocks.
template <typename Scalar>
class Adam {
 public:
  Adam(const ParameterSpans<Scalar>& params, AdamConfig config) : config_(config) {
    std::size_t total = 0;
    for (const auto& p : params) total += p.size();
    m_.assign(total, Scalar(0));
    v_.assign(total, Scalar(0));
  }

  void step(const ParameterSpans<Scalar>& params, const ParameterSpans<Scalar>& grads) {
    if (params.size() != grads.size()) throw DimensionError("Adam: parameter/gradient block mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    const Scalar step = static_cast<Scalar>(config_.lr * std::sqrt(c2) / c1);
    const Scalar b1 = static_cast<Scalar>(config_.beta1), b2 = static_cast<Scalar>(config_.beta2);
    const Scalar eps_hat = static_cast<Scalar>(config_.eps * std::sqrt(c2));
    std::size_t offset = 0;
    for (std::size_t blk = 0; blk < params.size(); ++blk) {
      auto p = params[blk];
      auto g = grads[blk];
      if (p.size() != g.size()) throw DimensionError("Adam: block size mismatch");
      Scalar* m = m_.data() + offset;
      Scalar* v = v_.data() + offset;
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = b1 * m[i] + (Scalar(1) - b1) * g[i];
        v[i] = b2 * v[i] + (Scalar(1) - b2) * g[i] * g[i];
        p[i] -= step * m[i] / (std::sqrt(v[i]) + eps_hat);
      }
      offset += p.size();
    }
  }

  long steps() const { return t_; }
  void set_lr(double lr) { config_.lr = lr; }
  double lr() const { return config_.lr; }

 private:
  AdamConfig config_;
  std::vector<Scalar> m_, v_;
  long t_ = 0;
};

/// avg <- d avg + (1 - d) current, block by block.
template <typename Scalar>
void ema_update(const ParameterSpans<Scalar>& avg, const ParameterSpans<Scalar>& current, double decay) {
  if (avg.size() != current.size()) throw DimensionError("ema_update: block mismatch");
  const auto d = static_cast<Scalar>(decay);
  for (std::size_t blk = 0; blk < avg.size(); ++blk) {
    auto a = avg[blk];
    auto c = current[blk];
    if (a.size() != c.size()) throw DimensionError("ema_update: block size mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = d * a[i] + (Scalar(1) - d) * c[i];
  }
}

}  // namespace nullcal::nn
