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
#include <cmath>
#include <functional>

#include "nullcal/nn/denoiser.hpp"
#include "nullcal/nn/mlp.hpp"
#include "nullcal/nn/vae.hpp"

namespace nullcal::nn {

struct GradientCheckReport {
  double max_relative_error = 0;
  std::size_t probes = 0;
  double tolerance = 0;
  bool passed = false;
};

/// Compares analytic gradients with central differences on `probe_count`
/// coordinates drawn uniformly from all parameter blocks. Step is
/// 1e-5 * max(1, |theta|); relative error is |g - fd| / max(|g|, |fd|, 1e-8).
inline GradientCheckReport gradient_check(const std::function<double()>& loss,
                                          const std::function<void()>& compute_gradients,
                                          const ParameterSpans<double>& params,
                                          const ParameterSpans<double>& grads, int probe_count,
                                          double tolerance, std::uint64_t seed) {
  compute_gradients();
  std::size_t total = 0;
  for (const auto& p : params) total += p.size();
  GradientCheckReport report;
  report.tolerance = tolerance;
  Rng rng(seed);
  for (int k = 0; k < probe_count && total > 0; ++k) {
    std::size_t idx = rng.below(total);
    std::size_t blk = 0;
    while (idx >= params[blk].size()) idx -= params[blk++].size();
    double& theta = params[blk][idx];
    const double analytic = grads[blk][idx];
    const double saved = theta;
    const double h = 1e-5 * std::max(1.0, std::abs(saved));
    theta = saved + h;
    const double up = loss();
    theta = saved - h;
    const double down = loss();
    theta = saved;
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    report.max_relative_error = std::max(report.max_relative_error, std::abs(analytic - numeric) / denom);
    ++report.probes;
  }
  report.passed = report.max_relative_error <= tolerance;
  return report;
}

/// Squared-error loss 0.5 * ||net(x) - target||^2 / batch.
inline GradientCheckReport gradient_check(Mlp<double>& net, const Eigen::MatrixXd& input,
                                          const Eigen::MatrixXd& target, int probe_count, double tolerance,
                                          std::uint64_t seed) {
  const double inv_b = 1.0 / static_cast<double>(input.cols());
  auto grads = net.zero_gradients();
  auto loss = [&] { return 0.5 * (net.forward(input) - target).squaredNorm() * inv_b; };
  auto grad = [&] {
    Mlp<double>::Tape tape;
    const Eigen::MatrixXd out = net.forward(input, tape);
    net.backward(tape, (out - target) * inv_b, grads);
  };
  ParameterSpans<double> p, g;
  append_spans(net.layers(), p);
  append_spans(grads, g);
  return gradient_check(loss, grad, p, g, probe_count, tolerance, seed);
}

inline GradientCheckReport gradient_check(Denoiser<double>& net, const Eigen::MatrixXd& x_t,
                                          const Eigen::MatrixXd& cond, const Eigen::MatrixXd& temb,
                                          const Eigen::MatrixXd& target, int probe_count, double tolerance,
                                          std::uint64_t seed) {
  const double inv_b = 1.0 / static_cast<double>(x_t.cols());
  auto grads = net.zero_gradients();
  auto loss = [&] { return 0.5 * (net.predict(x_t, cond, temb) - target).squaredNorm() * inv_b; };
  auto grad = [&] {
    Denoiser<double>::Tape tape;
    const Eigen::MatrixXd out = net.forward(x_t, cond, temb, tape);
    net.backward(tape, (out - target) * inv_b, grads);
  };
  return gradient_check(loss, grad, net.parameters(), Denoiser<double>::gradient_spans(grads), probe_count,
                        tolerance, seed);
}

inline GradientCheckReport gradient_check(ConditionalVae<double>& vae, const Eigen::MatrixXd& beta,
                                          const Eigen::MatrixXd& cond, const Eigen::MatrixXd& eps,
                                          double kl_weight, int probe_count, double tolerance,
                                          std::uint64_t seed) {
  auto grads = vae.zero_gradients();
  auto loss = [&] { return vae.loss(beta, cond, eps, kl_weight).total; };
  auto grad = [&] { vae.loss(beta, cond, eps, kl_weight, &grads); };
  return gradient_check(loss, grad, vae.parameters(), ConditionalVae<double>::gradient_spans(grads),
                        probe_count, tolerance, seed);
}

}  // namespace nullcal::nn
