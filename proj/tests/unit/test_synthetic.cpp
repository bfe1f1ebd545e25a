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

#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "nullcal/error.hpp"
#include "nullcal/synthetic/problems.hpp"

using namespace nullcal;

namespace {

FourierToyProblem toy(double keep, MaskKind kind, std::uint64_t seed = 1, int side = 8) {
  FourierToyConfig c;
  c.side = side;
  c.keep_fraction = keep;
  c.mask = kind;
  c.seed = seed;
  return build_fourier_toy(c);
}

double ring_autocorrelation(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  const Eigen::VectorXd c = x.array() - x.mean();
  double num = 0;
  for (Eigen::Index i = 0; i < n; ++i) num += c[i] * c[(i + 3) % n];
  return num / c.squaredNorm();
}

}  // namespace

TEST_CASE("fourier toy defaults and full sampling") {
  FourierToyConfig defaults;
  CHECK(defaults.keep_fraction == 0.25);
  const auto full = toy(1.0, MaskKind::random);
  Rng rng(2);
  for (int k = 0; k < 10; ++k) {
    const Eigen::VectorXd x = rng.normal_vector(64);
    CHECK((fourier_identifiable_part(full, x) - x).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK(full.basis.null_dim() == 0);
}

TEST_CASE("fourier toy null space") {
  for (auto kind : {MaskKind::random, MaskKind::centered_lowfreq}) {
    for (std::uint64_t seed : {1u, 8u, 14u}) {
      const auto p = toy(0.25, kind, seed);
      CHECK(p.basis.v_null().allFinite());
      CHECK(p.kept_fraction() == doctest::Approx(0.25).epsilon(0.3));
      // Mask closed under k -> -k.
      for (int k : p.kept) {
        const int ky = k / 8, kx = k % 8;
        const int mirror = ((8 - ky) % 8) * 8 + (8 - kx) % 8;
        CHECK(p.mask[static_cast<std::size_t>(mirror)] == 1);
      }
      const Eigen::MatrixXd& a = p.op.matrix();
      CHECK((a.transpose() * a * a.transpose() * a - a.transpose() * a).norm() < 1e-10);
      Rng rng(seed);
      for (int k = 0; k < 100; ++k) {
        const Eigen::VectorXd x = rng.normal_vector(64);
        const Eigen::VectorXd xa = fourier_identifiable_part(p, x);
        REQUIRE((a * (x - xa)).cwiseAbs().maxCoeff() < 1e-10);
        REQUIRE((p.basis.v_range() * (p.basis.v_range().transpose() * x) - xa).cwiseAbs().maxCoeff() < 1e-10);
      }
      CHECK(p.basis.rank() == static_cast<Eigen::Index>(p.kept.size()));
    }
  }
}

TEST_CASE("zero filled estimate equals the identifiable part") {
  const auto p = toy(0.25, MaskKind::centered_lowfreq);
  Rng rng(4);
  const Eigen::VectorXd x = rng.normal_vector(64);
  const Eigen::VectorXd y = p.op.matrix() * x;
  CHECK((fourier_zero_filled(p, y) - fourier_identifiable_part(p, x)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("phantoms") {
  const Eigen::MatrixXd a = synth_images(16, 50, 1);
  CHECK(a.minCoeff() >= 0.0);
  CHECK(a.maxCoeff() <= 1.0);
  const Eigen::MatrixXd b = synth_images(16, 50, 2);
  CHECK((a - b).cwiseAbs().maxCoeff() > 0.1);
  CHECK(synth_images(16, 3, 1) == a.leftCols(3));

  const auto centered = toy(0.25, MaskKind::centered_lowfreq, 1, 16);
  const auto random = toy(0.25, MaskKind::random, 1, 16);
  double ec = 0, er = 0;
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    ec += retained_energy_fraction(centered, a.col(i));
    er += retained_energy_fraction(random, a.col(i));
  }
  CHECK(ec > er);

  // Independent spectral oracle on one image via the dense DFT.
  const Eigen::MatrixXcd f = dft_matrix(16);
  const Eigen::VectorXcd k = f * a.col(0).cast<std::complex<double>>();
  double kept = 0;
  for (int i : centered.kept) kept += std::norm(k[i]);
  CHECK(retained_energy_fraction(centered, a.col(0)) == doctest::Approx(kept / k.squaredNorm()));
}

TEST_CASE("fourier toy validation") {
  FourierToyConfig c;
  c.keep_fraction = 0;
  CHECK_THROWS_AS(build_fourier_toy(c), InvalidConfig);
  c = FourierToyConfig{};
  c.side = 1;
  CHECK_THROWS_AS(build_fourier_toy(c), InvalidConfig);
}

TEST_CASE("patch problem shape") {
  PatchConfig c;
  CHECK(c.n_sensors == 16);
  CHECK(c.n_sources == 256);
  for (auto kind : {LeadfieldKind::gaussian, LeadfieldKind::smoothed_gaussian}) {
    c.leadfield = kind;
    const auto p = build_patch_problem(c);
    CHECK(p.basis.rank() == 16);
    CHECK(p.basis.null_dim() == 240);
  }
  PatchConfig bad;
  bad.n_sensors = 100;
  CHECK_THROWS_AS(build_patch_problem(bad), InvalidConfig);
  PatchConfig grid;
  grid.geometry = SourceGeometry::grid;
  grid.n_sources = 250;
  CHECK_THROWS_AS(build_patch_problem(grid), InvalidConfig);
}

TEST_CASE("patch sources") {
  PatchConfig c;
  c.flip_prob = 0.0;
  const auto p = build_patch_problem(c);
  const auto s = sample_patch_sources(p, 200, 3);
  for (const auto& amps : s.amplitudes)
    for (double a : amps) CHECK(a > 0);
  CHECK(s.truth.size() == 200);
  CHECK((s.truth.x - (p.basis.v_range() * s.truth.alpha + p.basis.v_null() * s.truth.beta)).cwiseAbs().maxCoeff() <
        1e-10);

  PatchConfig counts;
  const auto many = sample_patch_sources(build_patch_problem(counts), 10000, 4);
  std::array<int, 4> freq{};
  for (int k : many.patch_count) ++freq[static_cast<std::size_t>(k)];
  for (int k = 1; k <= 3; ++k) CHECK(std::abs(freq[static_cast<std::size_t>(k)] / 10000.0 - 1.0 / 3.0) < 0.02);
}

TEST_CASE("wider patches are smoother") {
  auto mean_corr = [](double width) {
    PatchConfig c;
    c.width_min_mm = width;
    c.width_max_mm = width;
    c.patch_counts = {1};
    const auto s = sample_patch_sources(build_patch_problem(c), 1000, 5);
    double sum = 0;
    for (Eigen::Index i = 0; i < s.truth.size(); ++i) sum += ring_autocorrelation(s.truth.x.col(i));
    return sum / static_cast<double>(s.truth.size());
  };
  CHECK(mean_corr(20.0) > mean_corr(5.0));
}

TEST_CASE("noise at a target snr") {
  Rng rng(1);
  const Eigen::VectorXd y = rng.normal_vector(16);
  CHECK((add_noise_snr(y, 1e12, 3) - y).norm() <= 1e-5 * y.norm());
  CHECK(add_noise_snr(y, 5, 3) == add_noise_snr(y, 5, 3));
  double ratio = 0;
  const int draws = 10000;
  for (int s = 0; s < draws; ++s) {
    const Eigen::VectorXd noise = add_noise_snr(y, 5, static_cast<std::uint64_t>(s)) - y;
    ratio += noise.squaredNorm();
  }
  ratio = y.squaredNorm() / (ratio / draws);
  CHECK(ratio == doctest::Approx(5.0).epsilon(0.03));
  CHECK_THROWS_AS(add_noise_snr(Eigen::VectorXd::Zero(4), 5, 1), DegenerateInput);
}

TEST_CASE("ground truth sets") {
  const auto p = toy(0.25, MaskKind::random);
  const Eigen::MatrixXd x = synth_images(8, 4, 2);
  const auto set = make_ground_truth(p.op, p.basis, x, 5);
  const auto one = case_at(set, 2);
  CHECK(one.x == x.col(2));
  CHECK((p.op.matrix() * x.col(2) - one.y_clean).norm() < 1e-12);
}
