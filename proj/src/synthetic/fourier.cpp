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
#include <numbers>

#include "nullcal/error.hpp"
#include "nullcal/rng.hpp"
#include "nullcal/synthetic/problems.hpp"

namespace nullcal {

std::string to_string(MaskKind kind) { return kind == MaskKind::random ? "random" : "centered-lowfreq"; }

MaskKind mask_kind_from_string(const std::string& name) {
  if (name == "random") return MaskKind::random;
  if (name == "centered-lowfreq") return MaskKind::centered_lowfreq;
  throw InvalidConfig("unknown mask kind '" + name + "'");
}

namespace {

int conjugate_index(int k, int side) {
  const int ky = k / side, kx = k % side;
  return ((side - ky) % side) * side + (side - kx) % side;
}

int signed_freq(int k, int side) { return k <= side / 2 ? k : k - side; }

/// Frequency orbits {k, -k} in ascending order of their smallest member.
std::vector<std::vector<int>> conjugate_orbits(int side) {
  const int n = side * side;
  std::vector<std::vector<int>> orbits;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int k = 0; k < n; ++k) {
    if (seen[static_cast<std::size_t>(k)]) continue;
    const int c = conjugate_index(k, side);
    seen[static_cast<std::size_t>(k)] = seen[static_cast<std::size_t>(c)] = true;
    orbits.push_back(c == k ? std::vector<int>{k} : std::vector<int>{k, c});
  }
  return orbits;
}

}  // namespace

Eigen::MatrixXcd dft_matrix(int side) {
  const int n = side * side;
  Eigen::MatrixXcd f(n, n);
  const double scale = 1.0 / side;
  for (int k = 0; k < n; ++k) {
    const int ky = k / side, kx = k % side;
    for (int j = 0; j < n; ++j) {
      const int y = j / side, x = j % side;
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(ky * y + kx * x) / side;
      f(k, j) = std::polar(scale, phase);
    }
  }
  return f;
}

FourierToyProblem build_fourier_toy(const FourierToyConfig& config) {
  if (config.side < 4) throw InvalidConfig("fourier toy: side must be >= 4");
  if (!(config.keep_fraction > 0 && config.keep_fraction <= 1))
    throw InvalidConfig("fourier toy: keep_fraction must lie in (0, 1]");
  if (!(config.k_sigma >= 0)) throw InvalidConfig("fourier toy: k_sigma must be >= 0");
  const int side = config.side;
  const int n = side * side;
  const long target = std::lround(config.keep_fraction * n);
  if (target < 1) throw InvalidConfig("fourier toy: keep_fraction retains no coefficients");

  auto orbits = conjugate_orbits(side);
  if (config.mask == MaskKind::centered_lowfreq) {
    auto radius2 = [side](int k) {
      const int fy = signed_freq(k / side, side), fx = signed_freq(k % side, side);
      return fy * fy + fx * fx;
    };
    std::stable_sort(orbits.begin(), orbits.end(),
                     [&](const auto& a, const auto& b) { return radius2(a[0]) < radius2(b[0]); });
  } else {
    // DC first, the remaining orbits in random order.
    Rng rng(config.seed, 1);
    for (std::size_t i = orbits.size(); i > 2; --i)
      std::swap(orbits[i - 1], orbits[1 + rng.below(i - 1)]);
  }

  FourierToyProblem prob;
  prob.config = config;
  prob.mask.assign(static_cast<std::size_t>(n), 0);
  long count = 0;
  for (const auto& orbit : orbits) {
    if (count >= target) break;
    for (int k : orbit) prob.mask[static_cast<std::size_t>(k)] = 1;
    count += static_cast<long>(orbit.size());
  }
  for (int k = 0; k < n; ++k)
    if (prob.mask[static_cast<std::size_t>(k)]) prob.kept.push_back(k);

  // Re rows for every kept frequency, Im rows except where they vanish
  // identically (self-conjugate frequencies).
  const Eigen::MatrixXcd f = dft_matrix(side);
  std::vector<Eigen::RowVectorXd> rows;
  for (int k : prob.kept) rows.push_back(f.row(k).real());
  for (int k : prob.kept)
    if (conjugate_index(k, side) != k) rows.push_back(f.row(k).imag());
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = rows[i];
  prob.op = ForwardOperator<double>(std::move(a), config.k_sigma);
  prob.basis = decompose_operator(prob.op);
  return prob;
}

Eigen::VectorXd fourier_identifiable_part(const FourierToyProblem& problem, const Eigen::VectorXd& x) {
  require_dims(x.size() == problem.pixels(), "fourier_identifiable_part: image size mismatch");
  const Eigen::MatrixXcd f = dft_matrix(problem.side());
  Eigen::VectorXcd coeff = f * x.cast<std::complex<double>>();
  for (Eigen::Index k = 0; k < coeff.size(); ++k)
    if (!problem.mask[static_cast<std::size_t>(k)]) coeff[k] = 0;
  const Eigen::VectorXcd back = f.adjoint() * coeff;
  if (back.imag().cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, x.cwiseAbs().maxCoeff()))
    throw Error("internal: mask is not conjugate-symmetric");
  return back.real();
}

Eigen::VectorXd fourier_zero_filled(const FourierToyProblem& problem, const Eigen::VectorXd& y) {
  require_dims(y.size() == problem.op.matrix().rows(), "fourier_zero_filled: measurement size mismatch");
  return problem.op.matrix().transpose() * y;
}

double retained_energy_fraction(const FourierToyProblem& problem, const Eigen::VectorXd& x) {
  require_dims(x.size() == problem.pixels(), "retained_energy_fraction: image size mismatch");
  const Eigen::VectorXcd coeff = dft_matrix(problem.side()) * x.cast<std::complex<double>>();
  double kept = 0;
  for (int k : problem.kept) kept += std::norm(coeff[k]);
  const double total = coeff.squaredNorm();
  return total > 0 ? kept / total : 0.0;
}

Eigen::MatrixXd synth_images(int side, Eigen::Index count, std::uint64_t seed) {
  if (side < 1) throw InvalidConfig("synth_images: side must be positive");
  if (count < 1) throw InvalidConfig("synth_images: count must be >= 1");
  const int n = side * side;
  Eigen::MatrixXd images(n, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    Eigen::ArrayXd img = Eigen::ArrayXd::Zero(n);
    const int bumps = 2 + static_cast<int>(rng.below(4));
    for (int b = 0; b < bumps; ++b) {
      const double cy = rng.uniform(0, side), cx = rng.uniform(0, side);
      const double w = rng.uniform(0.12, 0.35) * side;
      const double amp = rng.uniform(0.3, 1.0);
      for (int p = 0; p < n; ++p) {
        const double dy = p / side + 0.5 - cy, dx = p % side + 0.5 - cx;
        img[p] += amp * std::exp(-(dy * dy + dx * dx) / (2 * w * w));
      }
    }
    const int shapes = 1 + static_cast<int>(rng.below(2));
    for (int s = 0; s < shapes; ++s) {
      const double amp = rng.uniform(0.2, 0.6) * (rng.uniform() < 0.3 ? -1.0 : 1.0);
      if (rng.uniform() < 0.5) {
        const double y0 = rng.uniform(0, side - 2), x0 = rng.uniform(0, side - 2);
        const double h = rng.uniform(1.5, 0.6 * side), w = rng.uniform(1.5, 0.6 * side);
        for (int p = 0; p < n; ++p) {
          const double y = p / side + 0.5, x = p % side + 0.5;
          if (y >= y0 && y < y0 + h && x >= x0 && x < x0 + w) img[p] += amp;
        }
      } else {
        const double cy = rng.uniform(0, side), cx = rng.uniform(0, side);
        const double rad = rng.uniform(1.0, 0.35 * side);
        for (int p = 0; p < n; ++p) {
          const double dy = p / side + 0.5 - cy, dx = p % side + 0.5 - cx;
          if (dy * dy + dx * dx <= rad * rad) img[p] += amp;
        }
      }
    }
    const double lo = img.minCoeff(), hi = img.maxCoeff();
    if (hi > lo) {
      images.col(i) = ((img - lo) / (hi - lo)).matrix();
    } else {
      images.col(i).setZero();
    }
  }
  return images;
}

}  // namespace nullcal
