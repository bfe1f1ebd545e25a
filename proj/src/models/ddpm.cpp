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

#include "nullcal/models/ddpm.hpp"

#include <algorithm>
#include <cmath>

#include "nullcal/io/json_io.hpp"
#include "nullcal/nn/adam.hpp"

namespace nullcal {

namespace {

constexpr Eigen::Index kSampleChunk = 512;

Matrix<float> build_time_table(int steps, int dim) {
  Matrix<float> table(dim, steps);
  for (int t = 1; t <= steps; ++t) table.col(t - 1) = nn::time_embedding<float>(t, steps, dim);
  return table;
}

void validate(const DdpmConfig& c) {
  if (c.steps < 1) throw InvalidConfig("ddpm: steps must be >= 1");
  if (c.batch < 1) throw InvalidConfig("ddpm: batch must be >= 1");
  if (!(c.lr > 0)) throw InvalidConfig("ddpm: lr must be > 0");
  if (c.hidden < 1 || c.blocks < 1 || c.time_dim < 2) throw InvalidConfig("ddpm: bad network shape");
  if (!(c.ema_decay >= 0 && c.ema_decay < 1)) throw InvalidConfig("ddpm: ema_decay must lie in [0, 1)");
}

}  // namespace

DdpmNullModel::DdpmNullModel(DdpmConfig config, Net net, nn::Standardizer alpha_norm, nn::Whitener beta_norm,
                             double clip_bound)
    : config_(config),
      schedule_(config.diffusion_steps, config.beta_first, config.beta_last),
      net_(std::move(net)),
      alpha_norm_(std::move(alpha_norm)),
      beta_norm_(std::move(beta_norm)),
      clip_bound_(clip_bound),
      time_table_(build_time_table(config.diffusion_steps, config.time_dim)) {
  require_dims(alpha_norm_.dim() == net_.shape().cond_dim && beta_norm_.latent_dim() == net_.shape().data_dim,
               "DdpmNullModel: normalizer dims do not match the network");
  if (config_.clip_denoised && !(clip_bound_ > 0)) throw InvalidConfig("ddpm: clip_denoised needs a positive bound");
}

Eigen::MatrixXd DdpmNullModel::sample(const Eigen::VectorXd& alpha, Eigen::Index count, std::uint64_t seed) const {
  require_dims(alpha.size() == cond_dim(), "ddpm sample: alpha has wrong length");
  const Eigen::Index q = net_.shape().data_dim;
  Eigen::MatrixXd out(out_dim(), count);
  if (count == 0) return out;

  const Matrix<float> cond = alpha_norm_.forward(alpha).cast<float>();
  const int steps = schedule_.steps();
  const bool cached = net_.supports_cached_condition();
  Vector<float> cond_term;
  if (cached) cond_term = net_.condition_term(cond).col(0);
  std::vector<Vector<float>> shared(static_cast<std::size_t>(steps));
  if (cached) {
    for (int t = 1; t <= steps; ++t)
      shared[static_cast<std::size_t>(t - 1)] = cond_term + net_.time_term(time_table_.col(t - 1));
  }

  const Rng base(seed);
  for (Eigen::Index start = 0, chunk = 0; start < count; start += kSampleChunk, ++chunk) {
    const Eigen::Index b = std::min(kSampleChunk, count - start);
    Rng rng = base.substream(static_cast<std::uint64_t>(chunk));
    Matrix<float> x(q, b);
    fill_normal_float(rng, x);
    Matrix<float> z(q, b);
    Matrix<float> cond_b, temb_b;
    if (!cached) cond_b = cond.replicate(1, b);
    for (int t = steps; t >= 1; --t) {
      Matrix<float> eps;
      if (cached) {
        eps = net_.predict_cached(x, shared[static_cast<std::size_t>(t - 1)]);
      } else {
        temb_b = time_table_.col(t - 1).replicate(1, b);
        eps = net_.predict(x, cond_b, temb_b);
      }
      const double beta_t = schedule_.beta(t);
      if (config_.clip_denoised) {
        const double ab = schedule_.alpha_bar(t);
        const double ab_prev = t > 1 ? schedule_.alpha_bar(t - 1) : 1.0;
        const auto bound = static_cast<float>(clip_bound_);
        const Matrix<float> x0 =
            ((x - static_cast<float>(std::sqrt(1.0 - ab)) * eps) / static_cast<float>(std::sqrt(ab)))
                .cwiseMax(-bound)
                .cwiseMin(bound);
        const auto k0 = static_cast<float>(std::sqrt(ab_prev) * beta_t / (1.0 - ab));
        const auto kt = static_cast<float>(std::sqrt(1.0 - beta_t) * (1.0 - ab_prev) / (1.0 - ab));
        x = k0 * x0 + kt * x;
      } else {
        const auto c1 = static_cast<float>(1.0 / std::sqrt(1.0 - beta_t));
        const auto c2 = static_cast<float>(beta_t / std::sqrt(1.0 - schedule_.alpha_bar(t)));
        x = c1 * (x - c2 * eps);
      }
      if (t > 1) {
        fill_normal_float(rng, z);
        x += static_cast<float>(std::sqrt(beta_t)) * z;
      }
    }
    out.middleCols(start, b) = beta_norm_.inverse(x.cast<double>());
  }
  return out;
}

nlohmann::json DdpmNullModel::checkpoint() const {
  nlohmann::json j;
  j["format_version"] = io::kFormatVersion;
  j["kind"] = kind();
  j["config"] = io::to_json(config_);
  j["shape"] = {{"data_dim", out_dim()}, {"cond_dim", cond_dim()}, {"latent_dim", beta_norm_.latent_dim()}};
  j["schedule"] = {{"T", schedule_.steps()},
                   {"beta_first", schedule_.beta_first()},
                   {"beta_last", schedule_.beta_last()},
                   {"kind", "linear"}};
  j["clip_bound"] = clip_bound_;
  j["layers"] = io::layers_to_json(net_.layers());
  j["normalization"] = {{"alpha", io::standardizer_to_json(alpha_norm_)},
                        {"beta", io::whitener_to_json(beta_norm_)}};
  return j;
}

Eigen::MatrixXd forward_noise(const nn::DiffusionSchedule& schedule, const Eigen::MatrixXd& x0, int t, Rng& rng) {
  if (t < 1 || t > schedule.steps()) throw InvalidConfig("forward_noise: t out of range");
  const double ab = schedule.alpha_bar(t);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * rng.normal_matrix(x0.rows(), x0.cols());
}

DdpmNullModel train_null_ddpm(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& beta, const DdpmConfig& config,
                              TrainingHistory* history) {
  validate(config);
  if (alpha.cols() == 0) throw InvalidConfig("train_null_ddpm: empty dataset");
  require_dims(alpha.cols() == beta.cols(), "train_null_ddpm: alpha/beta count mismatch");

  const auto alpha_norm =
      config.normalization == nn::Normalization::none ? nn::Standardizer::identity(alpha.rows())
                                                      : nn::Standardizer::fit(alpha);
  const auto beta_norm = nn::Whitener::fit(beta, config.normalization, config.pca_tolerance);
  const Matrix<float> cond_all = alpha_norm.forward(alpha).cast<float>();
  const Matrix<float> data_all = beta_norm.forward(beta).cast<float>();

  const nn::DiffusionSchedule schedule(config.diffusion_steps, config.beta_first, config.beta_last);
  const Matrix<float> time_table = build_time_table(config.diffusion_steps, config.time_dim);
  Vector<float> sqrt_ab(schedule.steps()), sqrt_1mab(schedule.steps());
  for (int t = 1; t <= schedule.steps(); ++t) {
    sqrt_ab[t - 1] = static_cast<float>(std::sqrt(schedule.alpha_bar(t)));
    sqrt_1mab[t - 1] = static_cast<float>(std::sqrt(1.0 - schedule.alpha_bar(t)));
  }

  Rng init_rng = Rng(config.seed).substream(1);
  nn::DenoiserShape shape;
  shape.data_dim = static_cast<int>(beta_norm.latent_dim());
  shape.cond_dim = static_cast<int>(alpha.rows());
  shape.time_dim = config.time_dim;
  shape.hidden = config.hidden;
  shape.blocks = config.blocks;
  shape.mode = config.conditioning;
  nn::Denoiser<float> net(shape, init_rng);

  nn::Adam<float> adam(net.parameters(), {config.lr, 0.9, 0.999, 1e-8});
  nn::Denoiser<float> averaged = net;
  auto grads = net.zero_gradients();
  MinibatchSampler batches(alpha.cols(), Rng(config.seed).substream(2));
  Rng noise_rng = Rng(config.seed).substream(3);

  const int b = config.batch;
  const int q = shape.data_dim;
  const float grad_scale = 2.0f / static_cast<float>(static_cast<double>(b) * q);
  Matrix<float> eps(q, b), temb(config.time_dim, b), x_t(q, b);
  std::vector<int> ts(static_cast<std::size_t>(b));
  typename nn::Denoiser<float>::Tape tape;

  for (long step = 1; step <= config.steps; ++step) {
    const auto idx = batches.next(b);
    const Matrix<float> x0 = gather_columns(data_all, idx);
    const Matrix<float> cond = gather_columns(cond_all, idx);
    for (int j = 0; j < b; ++j) {
      const int t = 1 + static_cast<int>(noise_rng.below(static_cast<std::uint64_t>(schedule.steps())));
      ts[static_cast<std::size_t>(j)] = t;
      temb.col(j) = time_table.col(t - 1);
    }
    fill_normal_float(noise_rng, eps);
    for (int j = 0; j < b; ++j) {
      const int t = ts[static_cast<std::size_t>(j)];
      x_t.col(j) = sqrt_ab[t - 1] * x0.col(j) + sqrt_1mab[t - 1] * eps.col(j);
    }
    const Matrix<float> pred = net.forward(x_t, cond, temb, tape);
    const Matrix<float> diff = pred - eps;
    const double loss = static_cast<double>(diff.squaredNorm()) / (static_cast<double>(b) * q);
    if (!std::isfinite(loss)) throw TrainingDiverged("null-ddpm: non-finite loss", step);
    if (history) history->record(step, loss);
    net.backward(tape, diff * grad_scale, grads);
    adam.step(net.parameters(), nn::Denoiser<float>::gradient_spans(grads));
    if (config.ema_decay > 0) {
      // Short warm-up so early iterates do not dominate short runs.
      const double d = std::min(config.ema_decay, (1.0 + step) / (10.0 + step));
      nn::ema_update(averaged.parameters(), net.parameters(), d);
    }
  }
  if (config.ema_decay > 0) net = std::move(averaged);
  // A constant target has bound 0; keep a small positive floor.
  const double clip = std::max(1e-6, static_cast<double>(data_all.cwiseAbs().maxCoeff()));
  return DdpmNullModel(config, std::move(net), alpha_norm, beta_norm, clip);
}

}  // namespace nullcal
