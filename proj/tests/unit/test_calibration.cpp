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

#include "nullcal/calibration/ambiguity.hpp"
#include "nullcal/calibration/sbc.hpp"
#include "nullcal/calibration/statistic.hpp"
#include "nullcal/calibration/sweep.hpp"
#include "nullcal/error.hpp"
#include "nullcal/gaussian.hpp"
#include "nullcal/models/null_model.hpp"

using namespace nullcal;

namespace {

GaussianProblemSpec small_spec(std::uint64_t seed = 1) {
  GaussianConfig c;
  c.r = 8;
  c.q = 16;
  c.n = 8;
  c.seed = seed;
  return build_problem(c);
}

}  // namespace

TEST_CASE("statistics") {
  CHECK(evaluate_statistic(TestStatistic::l2(), Eigen::Vector2d(3, 4)) == doctest::Approx(5.0));
  Eigen::VectorXd spike = Eigen::VectorXd::Zero(7);
  spike[2] = -3.5;
  CHECK(evaluate_statistic(TestStatistic::peak(), spike) == doctest::Approx(1.0));
  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(16, 2.0);
  CHECK(evaluate_statistic(TestStatistic::peak(), flat) == doctest::Approx(0.25));
  CHECK_THROWS_AS(evaluate_statistic(TestStatistic::peak(), Eigen::VectorXd::Zero(3)), DegenerateInput);
  CHECK(TestStatistic::parse("coord3").index == 3);
  CHECK(TestStatistic::parse("peak").name() == "peak");
  CHECK_THROWS_AS(TestStatistic::parse("median"), InvalidConfig);
}

TEST_CASE("peak ratio bounds over random vectors") {
  for (int d : {2, 64, 4096}) {
    Rng rng(static_cast<std::uint64_t>(d));
    const double lo = 1.0 / std::sqrt(static_cast<double>(d));
    const int draws = d == 4096 ? 2000 : 20000;
    for (int k = 0; k < draws; ++k) {
      const double v = evaluate_statistic(TestStatistic::peak(), rng.normal_vector(d));
      REQUIRE(v >= lo * (1 - 1e-12));
      REQUIRE(v <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("l2 energy under the oracle") {
  const auto spec = small_spec();
  const OracleNullModel oracle(spec);
  Rng rng(3);
  const Eigen::VectorXd alpha = rng.normal_vector(spec.r());
  const Eigen::MatrixXd s = oracle.sample(alpha, 100000, 7);
  const double mean_sq = s.colwise().squaredNorm().mean();
  CHECK(mean_sq == doctest::Approx((spec.c * alpha).squaredNorm() + spec.sigma_eta.trace()).epsilon(0.02));
}

TEST_CASE("rank summary and binomial band") {
  std::vector<long> ranks;
  for (long r = 0; r <= 199; ++r) ranks.push_back(r);
  const auto rep = summarize_ranks("l2", ranks, 199, 20, 0.99);
  long total = 0;
  for (long h : rep.histogram) total += h;
  CHECK(total == 200);
  double p = 0;
  for (double b : rep.bin_probability) p += b;
  CHECK(p == doctest::Approx(1.0));
  CHECK(rep.bins_outside_band == 0);
  CHECK(rep.p_value > 0.99);
  CHECK(rep.mean_normalized_rank == doctest::Approx(0.5));
  CHECK(rank_bin(0, 200, 20) == 0);
  CHECK(rank_bin(200, 200, 20) == 19);
  CHECK(rank_bin(10, 200, 20) == 1);

  std::vector<long> piled(200, 0);
  const auto bad = summarize_ranks("l2", piled, 200, 20, 0.99);
  CHECK(bad.p_value < 1e-10);
  CHECK(bad.bins_outside_band == 20);
  CHECK(bad.mean_normalized_rank == 0.0);
}

TEST_CASE("sbc self consistency and direction") {
  const auto spec = small_spec(2);
  const auto data = sample_joint(spec, 300, 5);
  SbcOptions opt;
  opt.samples = 100;
  opt.seed = 9;
  const std::vector<TestStatistic> stats{TestStatistic::l2(), TestStatistic::peak()};

  const auto exact = sbc_run(OracleNullModel(spec), data.alpha, data.beta, stats, opt);
  REQUIRE(exact.size() == 2);
  for (const auto& r : exact) {
    CHECK(r.p_value > 0.01);
    CHECK(r.case_count == 300);
    CHECK(r.ranks.size() == 300);
  }
  const auto narrow = sbc_run(OracleNullModel(spec, 0.25), data.alpha, data.beta, TestStatistic::l2(), opt);
  CHECK(narrow.mean_normalized_rank > 0.8);
  const auto wide = sbc_run(OracleNullModel(spec, 4.0), data.alpha, data.beta, TestStatistic::l2(), opt);
  CHECK(wide.mean_normalized_rank < 0.2);

  const auto again = sbc_run(OracleNullModel(spec), data.alpha, data.beta, stats, opt);
  CHECK(again[0].ranks == exact[0].ranks);
}

TEST_CASE("sbc rejects mismatched inputs") {
  const auto spec = small_spec();
  const auto data = sample_joint(spec, 10, 1);
  SbcOptions opt;
  CHECK_THROWS(sbc_run(OracleNullModel(spec), data.alpha.topRows(3), data.beta, TestStatistic::l2(), opt));
}

TEST_CASE("variance calibration") {
  const auto spec = small_spec(4);
  const Eigen::VectorXd diag = spec.sigma_eta.diagonal();
  const Eigen::VectorXd alpha = Eigen::VectorXd::Ones(spec.r());
  const auto exact = variance_calibration(OracleNullModel(spec), alpha, diag, 10000, 3);
  CHECK(exact.mean_ratio >= 0.97);
  CHECK(exact.mean_ratio <= 1.03);
  const auto scaled = variance_calibration(OracleNullModel(spec, 0.25), alpha, diag, 10000, 3);
  CHECK(scaled.mean_ratio == doctest::Approx(0.25).epsilon(0.05));
  CHECK_THROWS_AS(variance_ratios(Eigen::MatrixXd::Ones(2, 5), Eigen::Vector2d(1, 0)), InvalidReference);
}

TEST_CASE("ambiguity maps") {
  const auto spec = small_spec(5);
  const auto basis = spec.embedded_basis();
  const Eigen::VectorXd alpha = Eigen::VectorXd::Ones(spec.r());

  const auto point = ambiguity_map(OracleNullModel(spec, 0.0), alpha, basis, 50, 1);
  CHECK(point.variance.cwiseAbs().maxCoeff() <= 1e-10);

  const auto map = ambiguity_map(OracleNullModel(spec), alpha, basis, 10000, 2);
  const Eigen::VectorXd analytic = null_variance_diagonal(basis.v_null(), spec.sigma_eta);
  for (Eigen::Index i = 0; i < analytic.size(); ++i)
    CHECK(std::abs(map.variance[i] - analytic[i]) <= 0.05 * analytic[i] + 1e-12);

  const auto elsewhere = ambiguity_map(OracleNullModel(spec), -3.0 * alpha, basis, 10000, 2);
  CHECK((elsewhere.variance - map.variance).norm() < 1e-10 * map.variance.norm());

  const Eigen::MatrixXd v = basis.v_null();
  const Eigen::VectorXd brute = (v * spec.sigma_eta * v.transpose()).diagonal();
  CHECK((brute - analytic).norm() < 1e-12);

  Eigen::MatrixXd alphas(spec.r(), 3);
  alphas << alpha, 2 * alpha, -alpha;
  const auto avg = ambiguity_map_average(OracleNullModel(spec), alphas, basis, 200, 4);
  CHECK(avg.cases == 3);
  CHECK(avg.samples == 200);
}

TEST_CASE("loglog slope") {
  const std::vector<double> x{0.1, 0.2, 0.4, 0.8};
  std::vector<double> y;
  for (double v : x) y.push_back(3 * v * v);
  CHECK(loglog_slope(x, y) == doctest::Approx(2.0));
}

TEST_CASE("noise sweep and bound on the embedded gaussian problem") {
  GaussianConfig c;
  c.r = 4;
  c.q = 8;
  c.n = 4;
  c.seed = 11;
  const auto spec = build_problem(c);
  const auto op = spec.embedded_operator();
  const auto basis = spec.embedded_basis();
  const OracleNullModel oracle(spec);
  const auto data = sample_joint(spec, 30, 2);

  NoiseSweepOptions so;
  so.sigmas = {0.0, 0.05, 0.1, 0.2, 0.4};
  so.samples = 32;
  so.intrinsic_samples = 64;
  so.seed = 3;
  const auto rows = noise_sweep(oracle, op, basis, data.alpha, so);
  REQUIRE(rows.size() == 5);
  CHECK(std::abs(rows[0].total - rows[0].intrinsic) <= 3 * std::hypot(rows[0].total_se, rows[0].intrinsic_se));
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].total >= rows[i - 1].total);
  std::vector<double> s, prop;
  for (const auto& r : rows)
    if (r.sigma > 0) {
      s.push_back(r.sigma);
      prop.push_back(r.propagated);
    }
  const double slope = loglog_slope(s, prop);
  CHECK(slope >= 1.5);
  CHECK(slope <= 2.5);

  // m(alpha) = C alpha, so the local Lipschitz constant is ||C||_2.
  BoundCheckOptions bo;
  bo.mean_samples = 4000;
  bo.seed = 5;
  const auto rep = propagated_bound_check(oracle, op, basis, data.alpha.leftCols(5), 0.1, bo);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(spec.c);
  CHECK(rep.lipschitz_jacobian == doctest::Approx(svd.singularValues()[0]).epsilon(0.1));
  CHECK(rep.lhs <= 1.2 * rep.rhs);

  const auto zero = propagated_bound_check(oracle, op, basis, data.alpha.leftCols(5), 0.0, bo);
  CHECK(zero.lhs <= zero.mc_floor + 1e-12);
}
