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

#include <Eigen/Dense>

#include "nullcal/error.hpp"
#include "nullcal/operator.hpp"
#include "nullcal/parallel.hpp"
#include "nullcal/rng.hpp"

using namespace nullcal;

TEST_CASE("philox known answer") {
  // Random123 reference vector: counter and key zero.
  Rng rng(0, 0);
  const auto first = rng();
  CHECK(first == ((std::uint64_t{0x6627e8d5u} << 32) | 0xe169c58du));
}

TEST_CASE("rng streams are order free") {
  Rng a(42, 7), b(42, 7), c(42, 8);
  CHECK(a() == b());
  CHECK(a() != c());
  CHECK(Rng(1).substream(3)() == Rng(1).substream(3)());
  CHECK(Rng(1).substream(3)() != Rng(1).substream(4)());
}

TEST_CASE("rng uniform stays in the open interval") {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("fill_normal_float moments") {
  Rng rng(11);
  Eigen::ArrayXf x(200001);
  fill_normal_float(rng, x);
  const double mean = x.cast<double>().mean();
  const double var = (x.cast<double>() - mean).square().mean();
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) REQUIRE(h == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 3) throw DegenerateInput("boom");
                  }),
                  DegenerateInput);
}

TEST_CASE("identity operator has an empty null space") {
  const auto basis = decompose_operator(ForwardOperator<double>(Eigen::MatrixXd::Identity(3, 3)));
  CHECK(basis.rank() == 3);
  CHECK(basis.null_dim() == 0);
}

TEST_CASE("coordinate mask has an exact null space") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, 3);
  a(0, 1) = 1.0;
  const ForwardOperator<double> op(a);
  const auto basis = decompose_operator(op);
  CHECK(basis.rank() == 1);
  CHECK(basis.null_dim() == 2);
  CHECK((a * basis.v_null()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("orthonormal rows give a rank-r projector") {
  Rng rng(3);
  const Eigen::MatrixXd g = rng.normal_matrix(96, 32);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() * Eigen::MatrixXd::Identity(96, 32);
  const Eigen::MatrixXd a = q.transpose();  // 32 x 96
  const auto basis = decompose_operator(ForwardOperator<double>(a));
  CHECK(basis.rank() == 32);
  for (Eigen::Index i = 0; i < 32; ++i) CHECK(std::abs(basis.singular_values()[i] - 1.0) < 1e-10);
  // Independent check: eigenvalues of A^T A are 32 ones and 64 zeros.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.transpose() * a);
  const auto& ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < 64; ++i) CHECK(std::abs(ev[i]) < 1e-10);
  for (Eigen::Index i = 64; i < 96; ++i) CHECK(std::abs(ev[i] - 1.0) < 1e-10);
}

TEST_CASE("zero operator is all null space") {
  const auto basis = decompose_operator(ForwardOperator<double>(Eigen::MatrixXd::Zero(2, 4)));
  CHECK(basis.rank() == 0);
  CHECK(basis.null_dim() == 4);
}

TEST_CASE("operator validation") {
  CHECK_THROWS_AS(ForwardOperator<double>(Eigen::MatrixXd(0, 3)), InvalidOperator);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ForwardOperator<double>{bad}, InvalidOperator);
  CHECK_THROWS_AS(ForwardOperator<double>(Eigen::MatrixXd::Ones(2, 2), -1.0), InvalidOperator);
  CHECK_THROWS_AS(decompose_operator(ForwardOperator<double>(Eigen::MatrixXd::Ones(2, 2)), 0.0), InvalidConfig);
}

TEST_CASE("project and reconstruct") {
  Rng rng(9);
  const Eigen::MatrixXd a = rng.normal_matrix(20, 50);
  const auto basis = decompose_operator(ForwardOperator<double>(a));

  const auto zero = project(Eigen::VectorXd::Zero(50), basis);
  CHECK(zero.alpha.isZero(0));
  CHECK(zero.beta.isZero(0));

  const auto pair = project(basis.v_null().col(4), basis);
  CHECK(pair.alpha.cwiseAbs().maxCoeff() < 1e-12);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(basis.null_dim());
  e[4] = 1;
  CHECK((pair.beta - e).cwiseAbs().maxCoeff() < 1e-12);

  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd x = rng.normal_vector(50);
    REQUIRE((reconstruct(project(x, basis), basis) - x).cwiseAbs().maxCoeff() <= 1e-10);
  }

  CHECK(reconstruct(CoefficientPair<double>{Eigen::VectorXd::Zero(20), Eigen::VectorXd::Zero(30)}, basis).isZero(0));
  Eigen::VectorXd a1 = Eigen::VectorXd::Zero(20);
  a1[0] = 1;
  CHECK((reconstruct(CoefficientPair<double>{a1, Eigen::VectorXd::Zero(30)}, basis) - basis.v_range().col(0))
            .norm() == 0.0);

  const CoefficientPair<double> any{rng.normal_vector(20), rng.normal_vector(30)};
  const Eigen::VectorXd lhs = a * reconstruct(any, basis);
  const Eigen::VectorXd rhs = a * basis.v_range() * any.alpha;
  CHECK((lhs - rhs).norm() <= 1e-8 * rhs.norm());

  CHECK_THROWS_AS(project(Eigen::VectorXd::Zero(49), basis), DimensionError);
}

TEST_CASE("apply_forward noise") {
  const ForwardOperator<double> noiseless(Eigen::MatrixXd::Identity(3, 3));
  CHECK(apply_forward(noiseless, Eigen::VectorXd::Zero(3)).isZero(0));

  const double sigma = 0.7;
  const ForwardOperator<double> op(Eigen::MatrixXd::Identity(4, 4), sigma);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(4, -1, 1);
  CHECK(apply_forward(op, x, 5) == apply_forward(op, x, 5));
  CHECK(apply_forward(op, x, 5) != apply_forward(op, x, 6));

  const int draws = 100000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(4), sq = Eigen::VectorXd::Zero(4);
  for (int s = 0; s < draws; ++s) {
    const Eigen::VectorXd e = apply_forward(op, x, static_cast<std::uint64_t>(s)) - x;
    sum += e;
    sq += e.cwiseProduct(e);
  }
  const Eigen::VectorXd var = sq / draws - (sum / draws).cwiseProduct(sum / draws);
  for (int i = 0; i < 4; ++i) CHECK(var[i] == doctest::Approx(sigma * sigma).epsilon(0.02));
}
