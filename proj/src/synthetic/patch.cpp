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

#include <algorithm>
#include <cmath>

#include "nullcal/calibration/sbc.hpp"
#include "nullcal/error.hpp"
#include "nullcal/rng.hpp"
#include "nullcal/synthetic/problems.hpp"

namespace nullcal {

std::string to_string(LeadfieldKind kind) {
  return kind == LeadfieldKind::gaussian ? "gaussian" : "smoothed-gaussian";
}

LeadfieldKind leadfield_kind_from_string(const std::string& name) {
  if (name == "gaussian") return LeadfieldKind::gaussian;
  if (name == "smoothed-gaussian") return LeadfieldKind::smoothed_gaussian;
  throw InvalidConfig("unknown leadfield kind '" + name + "'");
}

std::string to_string(SourceGeometry geometry) { return geometry == SourceGeometry::ring ? "ring" : "grid"; }

SourceGeometry source_geometry_from_string(const std::string& name) {
  if (name == "ring") return SourceGeometry::ring;
  if (name == "grid") return SourceGeometry::grid;
  throw InvalidConfig("unknown source geometry '" + name + "'");
}

GroundTruthCase case_at(const GroundTruthSet& set, Eigen::Index i) {
  require_dims(i >= 0 && i < set.size(), "case index out of range");
  return {set.x.col(i), set.alpha.col(i), set.beta.col(i), set.y_clean.col(i), set.y_noisy.col(i),
          set.seeds[static_cast<std::size_t>(i)]};
}

GroundTruthSet make_ground_truth(const ForwardOperator<double>& op, const RangeNullBasis<double>& basis,
                                 const Eigen::MatrixXd& x, std::uint64_t noise_seed) {
  require_dims(x.rows() == op.signal_dim() && op.signal_dim() == basis.signal_dim(),
               "make_ground_truth: signal dimension mismatch");
  GroundTruthSet set;
  set.x = x;
  set.alpha = basis.v_range().transpose() * x;
  set.beta = basis.v_null().transpose() * x;
  set.y_clean = op.matrix() * x;
  set.y_noisy = set.y_clean;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const std::uint64_t s = case_seed(noise_seed, i);
    set.seeds.push_back(s);
    if (op.noise_sigma() > 0) set.y_noisy.col(i) = apply_forward(op, x.col(i), s);
  }
  return set;
}

double PatchSourceProblem::distance_mm(int a, int b) const {
  const int n = config.n_sources;
  if (config.geometry == SourceGeometry::ring) {
    const int d = std::abs(a - b);
    return std::min(d, n - d) * config.spacing_mm;
  }
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  const double dy = a / side - b / side, dx = a % side - b % side;
  return std::sqrt(dy * dy + dx * dx) * config.spacing_mm;
}

PatchSourceProblem build_patch_problem(const PatchConfig& config) {
  if (config.n_sensors < 1 || config.n_sources < 1) throw InvalidConfig("patch problem: sizes must be positive");
  if (4 * config.n_sensors > config.n_sources)
    throw InvalidConfig("patch problem: need n_sensors <= n_sources / 4");
  if (!(config.spacing_mm > 0)) throw InvalidConfig("patch problem: spacing_mm must be > 0");
  if (!(config.width_min_mm > 0 && config.width_max_mm >= config.width_min_mm))
    throw InvalidConfig("patch problem: need 0 < width_min_mm <= width_max_mm");
  if (!(config.amp_min >= 0 && config.amp_max >= config.amp_min))
    throw InvalidConfig("patch problem: need 0 <= amp_min <= amp_max");
  if (!(config.flip_prob >= 0 && config.flip_prob <= 1)) throw InvalidConfig("patch problem: flip_prob not in [0, 1]");
  if (config.patch_counts.empty()) throw InvalidConfig("patch problem: patch_counts is empty");
  for (int k : config.patch_counts)
    if (k < 1) throw InvalidConfig("patch problem: patch counts must be >= 1");
  if (!(config.snr > 0)) throw InvalidConfig("patch problem: snr must be > 0");
  if (config.smoothing_radius < 0) throw InvalidConfig("patch problem: smoothing_radius must be >= 0");
  const int n = config.n_sources;
  int side = 0;
  if (config.geometry == SourceGeometry::grid) {
    side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (side * side != n) throw InvalidConfig("patch problem: grid geometry needs a square source count");
  }

  PatchSourceProblem prob;
  prob.config = config;
  Rng rng(config.seed, 1);
  Eigen::MatrixXd lf = rng.normal_matrix(config.n_sensors, n) / std::sqrt(static_cast<double>(n));
  if (config.leadfield == LeadfieldKind::smoothed_gaussian && config.smoothing_radius > 0) {
    const int w = config.smoothing_radius;
    Eigen::MatrixXd smooth = Eigen::MatrixXd::Zero(lf.rows(), n);
    for (int j = 0; j < n; ++j) {
      int used = 0;
      if (config.geometry == SourceGeometry::ring) {
        for (int d = -w; d <= w; ++d, ++used) smooth.col(j) += lf.col(((j + d) % n + n) % n);
      } else {
        const int jy = j / side, jx = j % side;
        for (int dy = -w; dy <= w; ++dy)
          for (int dx = -w; dx <= w; ++dx) {
            const int y = jy + dy, x = jx + dx;
            if (y < 0 || y >= side || x < 0 || x >= side) continue;
            smooth.col(j) += lf.col(y * side + x);
            ++used;
          }
      }
      // Averaging `used` independent entries shrinks the std by sqrt(used).
      smooth.col(j) /= std::sqrt(static_cast<double>(used));
    }
    lf = std::move(smooth);
  }
  prob.op = ForwardOperator<double>(std::move(lf), 0.0);
  prob.basis = decompose_operator(prob.op);
  return prob;
}

Eigen::VectorXd add_noise_snr(const Eigen::VectorXd& y_clean, double snr, std::uint64_t seed, double* sigma_out) {
  if (!(snr > 0)) throw InvalidConfig("add_noise_snr: snr must be > 0");
  const double norm = y_clean.norm();
  if (!(norm > 0)) throw DegenerateInput("add_noise_snr: zero signal");
  const double sigma = norm / std::sqrt(static_cast<double>(y_clean.size()) * snr);
  if (sigma_out) *sigma_out = sigma;
  Rng rng(seed);
  return y_clean + sigma * rng.normal_vector(y_clean.size());
}

PatchSample sample_patch_sources(const PatchSourceProblem& problem, Eigen::Index count, std::uint64_t seed) {
  if (count < 1) throw InvalidConfig("sample_patch_sources: count must be >= 1");
  const auto& cfg = problem.config;
  const int n = cfg.n_sources;
  PatchSample out;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    const int k = cfg.patch_counts[rng.below(cfg.patch_counts.size())];
    out.patch_count.push_back(k);
    std::vector<double> widths, amps;
    for (int p = 0; p < k; ++p) {
      const int center = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      const double w = rng.uniform(cfg.width_min_mm, cfg.width_max_mm);
      double amp = rng.uniform(cfg.amp_min, cfg.amp_max);
      if (rng.uniform() < cfg.flip_prob) amp = -amp;
      for (int j = 0; j < n; ++j) {
        const double d = problem.distance_mm(center, j);
        x(j, i) += amp * std::exp(-d * d / (2 * w * w));
      }
      widths.push_back(w);
      amps.push_back(amp);
    }
    out.widths_mm.push_back(std::move(widths));
    out.amplitudes.push_back(std::move(amps));
  }
  out.truth = make_ground_truth(problem.op, problem.basis, x, seed);
  for (Eigen::Index i = 0; i < count; ++i) {
    double sigma = 0;
    out.truth.y_noisy.col(i) = add_noise_snr(out.truth.y_clean.col(i), cfg.snr, out.truth.seeds[static_cast<std::size_t>(i)], &sigma);
    out.noise_sigma.push_back(sigma);
  }
  return out;
}

}  // namespace nullcal
