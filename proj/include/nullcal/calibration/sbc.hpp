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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nullcal/calibration/statistic.hpp"
#include "nullcal/models/null_model.hpp"

namespace nullcal {

struct SbcOptions {
  Eigen::Index samples = 200;  // L
  int bins = 20;               // B
  double band_level = 0.99;
  std::uint64_t seed = 0;
};

struct SbcReport {
  std::string statistic;
  Eigen::Index samples = 0;     // L
  Eigen::Index case_count = 0;  // N
  int bins = 0;
  double band_level = 0;
  std::vector<long> ranks;               // each in [0, L]
  std::vector<double> normalized_ranks;  // rank / L
  std::vector<long> histogram;           // B counts, summing to N
  std::vector<double> bin_probability;   // exact P(bin) under uniform ranks
  std::vector<long> band_lower, band_upper;
  int bins_outside_band = 0;
  double mean_normalized_rank = 0;
  double chi_square = 0;
  int dof = 0;
  double p_value = 0;
  long ties = 0;
  long comparisons = 0;
  bool tie_flag = false;  // ties above 0.1% of comparisons
};

/// Bin of a normalized rank u in [0, 1]: min(floor(u B), B - 1).
int rank_bin(long rank, Eigen::Index samples, int bins);

/// Builds histogram, exact binomial band and Pearson chi-square from ranks.
/// Ties and comparisons are copied through.
SbcReport summarize_ranks(const std::string& statistic, const std::vector<long>& ranks, Eigen::Index samples,
                          int bins, double band_level, long ties = 0, long comparisons = 0);

/// Receives each case's samples (out_dim x L). Called concurrently from
/// worker threads with distinct case indices.
using SampleObserver = std::function<void(Eigen::Index case_index, const Eigen::MatrixXd& samples)>;

/// For each case k draws L samples at alpha*_k with seed derived from
/// (options.seed, k) and ranks T(beta*_k) among T(samples) by strict
/// less-than. One report per statistic; all statistics share samples.
std::vector<SbcReport> sbc_run(const NullModel& sampler, const Eigen::MatrixXd& alpha_star,
                               const Eigen::MatrixXd& beta_star, const std::vector<TestStatistic>& stats,
                               const SbcOptions& options, const SampleObserver& observer = {});

SbcReport sbc_run(const NullModel& sampler, const Eigen::MatrixXd& alpha_star, const Eigen::MatrixXd& beta_star,
                  const TestStatistic& stat, const SbcOptions& options);

/// Seed of case k's samples.
std::uint64_t case_seed(std::uint64_t seed, Eigen::Index case_index);

}  // namespace nullcal
