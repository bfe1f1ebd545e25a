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

#include "nullcal/calibration/sbc.hpp"

#include <cmath>
#include <numeric>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "nullcal/error.hpp"
#include "nullcal/parallel.hpp"
#include "nullcal/rng.hpp"

namespace nullcal {

std::string TestStatistic::name() const {
  switch (kind) {
    case Kind::l2_norm:
      return "l2";
    case Kind::peak_ratio:
      return "peak";
    case Kind::coordinate:
      return "coord" + std::to_string(index);
  }
  return "l2";
}

TestStatistic TestStatistic::parse(const std::string& name) {
  if (name == "l2") return l2();
  if (name == "peak") return peak();
  if (name.rfind("coord", 0) == 0 && name.size() > 5) {
    try {
      return coordinate(std::stol(name.substr(5)));
    } catch (const std::exception&) {
    }
  }
  throw InvalidConfig("unknown statistic '" + name + "'");
}

double evaluate_statistic(const TestStatistic& stat, const Eigen::Ref<const Eigen::VectorXd>& beta) {
  if (beta.size() < 1) throw DimensionError("statistic of an empty vector");
  switch (stat.kind) {
    case TestStatistic::Kind::l2_norm:
      return beta.norm();
    case TestStatistic::Kind::peak_ratio: {
      const double norm = beta.norm();
      if (!(norm > 0)) throw DegenerateInput("peak ratio of the zero vector");
      return beta.cwiseAbs().maxCoeff() / norm;
    }
    case TestStatistic::Kind::coordinate:
      require_dims(stat.index >= 0 && stat.index < beta.size(), "coordinate statistic index out of range");
      return beta[stat.index];
  }
  return 0;
}

std::uint64_t case_seed(std::uint64_t seed, Eigen::Index case_index) {
  return combine_stream(seed, static_cast<std::uint64_t>(case_index));
}

int rank_bin(long rank, Eigen::Index samples, int bins) {
  const double u = static_cast<double>(rank) / static_cast<double>(samples);
  return std::min(static_cast<int>(std::floor(u * bins)), bins - 1);
}

SbcReport summarize_ranks(const std::string& statistic, const std::vector<long>& ranks, Eigen::Index samples,
                          int bins, double band_level, long ties, long comparisons) {
  if (samples < 1 || bins < 2) throw InvalidConfig("SBC needs L >= 1 and at least two bins");
  if (!(band_level > 0 && band_level < 1)) throw InvalidConfig("band level must lie in (0, 1)");
  SbcReport rep;
  rep.statistic = statistic;
  rep.samples = samples;
  rep.case_count = static_cast<Eigen::Index>(ranks.size());
  rep.bins = bins;
  rep.band_level = band_level;
  rep.ranks = ranks;
  rep.histogram.assign(static_cast<std::size_t>(bins), 0);
  rep.bin_probability.assign(static_cast<std::size_t>(bins), 0.0);
  for (long r = 0; r <= samples; ++r)
    rep.bin_probability[static_cast<std::size_t>(rank_bin(r, samples, bins))] += 1.0 / static_cast<double>(samples + 1);
  double sum_u = 0;
  for (long r : ranks) {
    if (r < 0 || r > samples) throw Error("rank out of range");
    const double u = static_cast<double>(r) / static_cast<double>(samples);
    rep.normalized_ranks.push_back(u);
    sum_u += u;
    ++rep.histogram[static_cast<std::size_t>(rank_bin(r, samples, bins))];
  }
  const double n = static_cast<double>(ranks.size());
  rep.mean_normalized_rank = ranks.empty() ? 0.0 : sum_u / n;

  const double tail = 0.5 * (1.0 - band_level);
  rep.dof = bins - 1;
  for (int b = 0; b < bins; ++b) {
    const double p = rep.bin_probability[static_cast<std::size_t>(b)];
    long lo = 0, hi = 0;
    if (!ranks.empty()) {
      const boost::math::binomial_distribution<double> dist(n, p);
      lo = static_cast<long>(boost::math::quantile(dist, tail));
      hi = static_cast<long>(boost::math::quantile(boost::math::complement(dist, tail)));
    }
    rep.band_lower.push_back(lo);
    rep.band_upper.push_back(hi);
    const long c = rep.histogram[static_cast<std::size_t>(b)];
    if (c < lo || c > hi) ++rep.bins_outside_band;
    if (!ranks.empty()) {
      const double e = n * p;
      rep.chi_square += (static_cast<double>(c) - e) * (static_cast<double>(c) - e) / e;
    }
  }
  rep.p_value = ranks.empty() ? 1.0
                              : boost::math::cdf(boost::math::complement(
                                    boost::math::chi_squared_distribution<double>(rep.dof), rep.chi_square));
  rep.ties = ties;
  rep.comparisons = comparisons;
  rep.tie_flag = comparisons > 0 && static_cast<double>(ties) > 1e-3 * static_cast<double>(comparisons);
  return rep;
}

std::vector<SbcReport> sbc_run(const NullModel& sampler, const Eigen::MatrixXd& alpha_star,
                               const Eigen::MatrixXd& beta_star, const std::vector<TestStatistic>& stats,
                               const SbcOptions& options, const SampleObserver& observer) {
  if (options.samples < 2) throw InvalidConfig("SBC needs L >= 2");
  if (alpha_star.cols() < 1) throw InvalidConfig("SBC needs at least one case");
  if (stats.empty()) throw InvalidConfig("SBC needs at least one statistic");
  require_dims(alpha_star.cols() == beta_star.cols(), "SBC: alpha*/beta* case count mismatch");
  require_dims(alpha_star.rows() == sampler.cond_dim() && beta_star.rows() == sampler.out_dim(),
               "SBC: truth dims do not match the sampler");

  const auto cases = static_cast<std::size_t>(alpha_star.cols());
  const std::size_t ns = stats.size();
  std::vector<long> ranks(cases * ns, 0), ties(cases * ns, 0);
  parallel_for(cases, [&](std::size_t k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const Eigen::MatrixXd samples = sampler.sample(alpha_star.col(kk), options.samples, case_seed(options.seed, kk));
    if (observer) observer(kk, samples);
    for (std::size_t s = 0; s < ns; ++s) {
      try {
        const double truth = evaluate_statistic(stats[s], beta_star.col(kk));
        long below = 0, equal = 0;
        for (Eigen::Index m = 0; m < samples.cols(); ++m) {
          const double v = evaluate_statistic(stats[s], samples.col(m));
          below += v < truth;
          equal += v == truth;
        }
        ranks[k * ns + s] = below;
        ties[k * ns + s] = equal;
      } catch (const DegenerateInput& e) {
        throw DegenerateInput("case " + std::to_string(k) + ": " + e.what());
      }
    }
  });

  std::vector<SbcReport> reports;
  for (std::size_t s = 0; s < ns; ++s) {
    std::vector<long> r(cases);
    long t = 0;
    for (std::size_t k = 0; k < cases; ++k) {
      r[k] = ranks[k * ns + s];
      t += ties[k * ns + s];
    }
    reports.push_back(summarize_ranks(stats[s].name(), r, options.samples, options.bins, options.band_level, t,
                                      static_cast<long>(cases) * options.samples));
  }
  return reports;
}

SbcReport sbc_run(const NullModel& sampler, const Eigen::MatrixXd& alpha_star, const Eigen::MatrixXd& beta_star,
                  const TestStatistic& stat, const SbcOptions& options) {
  return sbc_run(sampler, alpha_star, beta_star, std::vector<TestStatistic>{stat}, options).front();
}

}  // namespace nullcal
