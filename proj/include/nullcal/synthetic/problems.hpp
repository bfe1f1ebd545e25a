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

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nullcal/operator.hpp"

namespace nullcal {

/// Signals with their oracle coefficients and measurements; one column per
/// case.
struct GroundTruthSet {
  Eigen::MatrixXd x;        // p x N
  Eigen::MatrixXd alpha;    // r x N
  Eigen::MatrixXd beta;     // (p - r) x N
  Eigen::MatrixXd y_clean;  // n x N
  Eigen::MatrixXd y_noisy;  // n x N
  std::vector<std::uint64_t> seeds;

  Eigen::Index size() const { return x.cols(); }
};

/// Single case view of a GroundTruthSet.
struct GroundTruthCase {
  Eigen::VectorXd x, alpha_star, beta_star, y_clean, y_noisy;
  std::uint64_t seed = 0;
};

GroundTruthCase case_at(const GroundTruthSet& set, Eigen::Index i);

/// Projects each column of x and measures it with op; case i draws its
/// measurement noise (std op.noise_sigma()) from case_seed(noise_seed, i).
GroundTruthSet make_ground_truth(const ForwardOperator<double>& op, const RangeNullBasis<double>& basis,
                                 const Eigen::MatrixXd& x, std::uint64_t noise_seed);

// ---------------------------------------------------------------------------
// Undersampled Fourier toy

enum class MaskKind { random, centered_lowfreq };

std::string to_string(MaskKind kind);
MaskKind mask_kind_from_string(const std::string& name);

struct FourierToyConfig {
  int side = 8;
  double keep_fraction = 0.25;
  MaskKind mask = MaskKind::centered_lowfreq;
  double k_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Real images of side x side pixels (row-major) observed through the
/// retained rows of the unitary 2D DFT, realified as
///   A = [Re F_M; Im F_M]   (2 N_kept x N_v).
/// Masks are closed under k -> -k, so F^{-1} M F x is real for real x and
/// A^T A is the orthogonal projector onto the retained subspace.
struct FourierToyProblem {
  FourierToyConfig config;
  std::vector<int> mask;             // length N_v over frequencies (ky * side + kx)
  std::vector<int> kept;             // retained frequency indices, ascending
  ForwardOperator<double> op{Eigen::MatrixXd::Zero(1, 1)};
  RangeNullBasis<double> basis{Eigen::MatrixXd::Zero(1, 0), Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd()};

  int side() const { return config.side; }
  int pixels() const { return config.side * config.side; }
  int kept_count() const { return static_cast<int>(kept.size()); }
  double kept_fraction() const { return static_cast<double>(kept.size()) / pixels(); }
};

FourierToyProblem build_fourier_toy(const FourierToyConfig& config);

/// Unitary 2D DFT as a dense complex matrix (oracle path, N_v x N_v).
Eigen::MatrixXcd dft_matrix(int side);

/// x_alpha* = F^{-1} M F x evaluated with complex arithmetic; the imaginary
/// part is discarded after checking it is negligible.
Eigen::VectorXd fourier_identifiable_part(const FourierToyProblem& problem, const Eigen::VectorXd& x);

/// Zero-filled estimate of the identifiable part from realified k-space
/// data: A^T y.
Eigen::VectorXd fourier_zero_filled(const FourierToyProblem& problem, const Eigen::VectorXd& y);

/// Fraction of spectral energy |F x|^2 on the retained frequencies.
double retained_energy_fraction(const FourierToyProblem& problem, const Eigen::VectorXd& x);

/// Piecewise-smooth phantoms (smooth bumps plus a few sharp-edged shapes)
/// scaled to [0, 1]; columns are images, case i uses stream i of seed.
Eigen::MatrixXd synth_images(int side, Eigen::Index count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Patch sources

enum class LeadfieldKind { gaussian, smoothed_gaussian };
enum class SourceGeometry { ring, grid };

std::string to_string(LeadfieldKind kind);
LeadfieldKind leadfield_kind_from_string(const std::string& name);
std::string to_string(SourceGeometry geometry);
SourceGeometry source_geometry_from_string(const std::string& name);

struct PatchConfig {
  int n_sensors = 16;
  int n_sources = 256;
  LeadfieldKind leadfield = LeadfieldKind::smoothed_gaussian;
  SourceGeometry geometry = SourceGeometry::ring;
  double spacing_mm = 2.0;
  int smoothing_radius = 3;  // neighbours on each side averaged into a column
  double width_min_mm = 5.0;
  double width_max_mm = 20.0;
  double amp_min = 0.5;
  double amp_max = 2.0;
  double flip_prob = 0.5;
  std::vector<int> patch_counts{1, 2, 3};
  double snr = 5.0;
  std::uint64_t seed = 0;
};

struct PatchSourceProblem {
  PatchConfig config;
  ForwardOperator<double> op{Eigen::MatrixXd::Zero(1, 1)};
  RangeNullBasis<double> basis{Eigen::MatrixXd::Zero(1, 0), Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd()};

  /// Source-to-source distance in mm.
  double distance_mm(int a, int b) const;
};

/// Leadfield entries i.i.d. N(0, 1 / n_sources); the smoothed kind averages
/// each row over geometric neighbours. Throws InvalidConfig unless
/// n_sensors <= n_sources / 4 (and a square source count for the grid).
PatchSourceProblem build_patch_problem(const PatchConfig& config);

struct PatchSample {
  GroundTruthSet truth;
  std::vector<int> patch_count;                 // per case
  std::vector<std::vector<double>> widths_mm;   // per case, per patch
  std::vector<std::vector<double>> amplitudes;  // signed, per case, per patch
  std::vector<double> noise_sigma;              // per case
};

/// Sums k Gaussian bumps exp(-d^2 / (2 w^2)) per case with k drawn from
/// patch_counts, projects to (alpha*, beta*) and adds noise at the
/// configured SNR.
PatchSample sample_patch_sources(const PatchSourceProblem& problem, Eigen::Index count, std::uint64_t seed);

/// y_clean + sigma w with sigma = ||y_clean|| / sqrt(n snr). Throws
/// DegenerateInput for a zero signal.
Eigen::VectorXd add_noise_snr(const Eigen::VectorXd& y_clean, double snr, std::uint64_t seed,
                              double* sigma_out = nullptr);

}  // namespace nullcal
