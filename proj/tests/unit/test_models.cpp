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
#include "nullcal/gaussian.hpp"
#include "nullcal/io/json_io.hpp"
#include "nullcal/models/cascade.hpp"
#include "nullcal/models/ddpm.hpp"
#include "nullcal/models/range_model.hpp"
#include "nullcal/models/vae.hpp"

using namespace nullcal;

namespace {

GaussianProblemSpec small_spec(std::uint64_t seed = 1) {
  GaussianConfig c;
  c.r = 4;
  c.q = 8;
  c.n = 6;
  c.seed = seed;
  return build_problem(c);
}

DdpmConfig quick_ddpm(long steps) {
  DdpmConfig c;
  c.steps = steps;
  c.batch = 64;
  c.hidden = 32;
  c.time_dim = 16;
  c.diffusion_steps = 100;
  c.lr = 1e-3;
  c.seed = 3;
  return c;
}

VaeConfig quick_vae(int epochs) {
  VaeConfig c;
  c.epochs = epochs;
  c.batch = 64;
  c.hidden = 32;
  c.latent_dim = 4;
  c.seed = 4;
  return c;
}

}  // namespace

TEST_CASE("ridge recovers a linear map") {
  Rng rng(1);
  const Eigen::MatrixXd m = rng.normal_matrix(3, 5);
  const Eigen::MatrixXd y = rng.normal_matrix(5, 400);
  const Eigen::MatrixXd alpha = m * y;
  RangeConfig c;
  c.kind = "ridge";
  const auto model = train_range(y, alpha, c);
  const auto* ridge = dynamic_cast<const RidgeRangeModel*>(model.get());
  REQUIRE(ridge != nullptr);
  CHECK((ridge->weight() - m).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(ridge->bias().cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("mlp range model learns a constant") {
  Rng rng(2);
  const Eigen::MatrixXd y = rng.normal_matrix(4, 512);
  const Eigen::MatrixXd alpha = Eigen::Vector2d(0.7, -1.3).replicate(1, 512);
  RangeConfig c;
  c.epochs = 16000;
  c.hidden = 32;
  c.batch = 512;
  c.lr = 1e-2;
  c.seed = 5;
  const auto model = train_range(y, alpha, c);
  const Eigen::MatrixXd pred = model->predict_batch(rng.normal_matrix(4, 20));
  CHECK((pred - alpha.leftCols(20)).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("mlp range model reaches the bayes floor") {
  GaussianConfig gc;
  gc.r = 8;
  gc.q = 4;
  gc.n = 8;
  gc.seed = 2;
  const auto spec = build_problem(gc);
  const auto train = sample_joint(spec, 20000, 1);
  const auto test = sample_joint(spec, 2000, 2);
  RangeConfig c;
  c.epochs = 40;
  c.hidden = 64;
  c.seed = 6;
  const auto model = train_range(train.y, train.alpha, c);
  const double mse = (model->predict_batch(test.y) - test.alpha).colwise().squaredNorm().mean();
  const double floor = posterior_alpha(spec, test.y.col(0)).covariance.trace();
  CHECK(mse <= 1.05 * floor);
}

TEST_CASE("ddpm defaults") {
  const DdpmConfig c;
  CHECK(c.diffusion_steps == 1000);
  CHECK(c.beta_first == 1e-4);
  CHECK(c.beta_last == 0.02);
  CHECK(c.hidden == 256);
  CHECK(c.blocks == 2);
  CHECK(c.lr == 3e-4);
  CHECK(c.batch == 256);
}

TEST_CASE("ddpm sampling contracts") {
  const auto spec = small_spec();
  const auto data = sample_joint(spec, 512, 1);
  const auto model = train_null_ddpm(data.alpha, data.beta, quick_ddpm(1));
  const Eigen::VectorXd alpha = data.alpha.col(0);
  CHECK(model.sample(alpha, 0, 1).cols() == 0);
  CHECK(model.sample(alpha, 0, 1).rows() == spec.q());
  CHECK(model.sample(alpha, 5, 9) == model.sample(alpha, 5, 9));
  CHECK(model.sample(alpha, 5, 9) != model.sample(alpha, 5, 10));
  CHECK(model.sample(alpha, 1000, 2).allFinite());
  CHECK_THROWS_AS(model.sample(Eigen::VectorXd::Zero(2), 3, 1), DimensionError);
}

TEST_CASE("ddpm on a point mass target") {
  const auto spec = small_spec();
  const auto data = sample_joint(spec, 512, 1);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(spec.q(), 512);
  const auto model = train_null_ddpm(data.alpha, zero, quick_ddpm(300));
  const Eigen::MatrixXd s = model.sample(data.alpha.col(3), 200, 4);
  CHECK(s.colwise().norm().maxCoeff() <= 0.05 * std::sqrt(static_cast<double>(spec.q())));
}

TEST_CASE("ddpm loss decreases and training is reproducible") {
  const auto spec = small_spec(2);
  const auto data = sample_joint(spec, 2000, 1);
  TrainingHistory h1, h2;
  const auto a = train_null_ddpm(data.alpha, data.beta, quick_ddpm(1500), &h1);
  train_null_ddpm(data.alpha, data.beta, quick_ddpm(1500), &h2);
  CHECK(h1.loss == h2.loss);
  CHECK(h1.mean_loss(1400, 1500) < h1.mean_loss(0, 50));
  CHECK(a.out_dim() == spec.q());
}

TEST_CASE("ddpm config validation") {
  const auto spec = small_spec();
  const auto data = sample_joint(spec, 64, 1);
  auto bad = quick_ddpm(1);
  bad.beta_last = 2.0;
  CHECK_THROWS_AS(train_null_ddpm(data.alpha, data.beta, bad), InvalidConfig);
  bad = quick_ddpm(1);
  bad.ema_decay = 1.0;
  CHECK_THROWS_AS(train_null_ddpm(data.alpha, data.beta, bad), InvalidConfig);
  CHECK_THROWS_AS(train_null_ddpm(data.alpha, data.beta.leftCols(10), quick_ddpm(1)), DimensionError);
}

TEST_CASE("vae defaults and kl trade-off") {
  CHECK(VaeConfig{}.kl_weight == 1.0);
  const auto spec = small_spec(3);
  const auto data = sample_joint(spec, 2000, 1);
  auto c1 = quick_vae(30);
  auto c0 = c1;
  c0.kl_weight = 0.0;
  const auto with_kl = train_null_vae(data.alpha, data.beta, c1);
  const auto without = train_null_vae(data.alpha, data.beta, c0);
  CHECK(without.reconstruction_mse(data.alpha, data.beta) < with_kl.reconstruction_mse(data.alpha, data.beta));
  CHECK(with_kl.sample(data.alpha.col(0), 4, 1) == with_kl.sample(data.alpha.col(0), 4, 1));
  CHECK(with_kl.sample(data.alpha.col(0), 0, 1).cols() == 0);
}

TEST_CASE("vae on a constant target") {
  const auto spec = small_spec(3);
  const auto data = sample_joint(spec, 1024, 1);
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(spec.q(), -1, 1);
  const Eigen::MatrixXd beta = c.replicate(1, 1024);
  const auto model = train_null_vae(data.alpha, beta, quick_vae(20));
  const Eigen::MatrixXd s = model.sample(data.alpha.col(0), 50, 2);
  const double tol = 0.05 * c.norm() + 0.05 * std::sqrt(static_cast<double>(spec.q()));
  CHECK((s.colwise() - c).colwise().norm().maxCoeff() <= tol);
}

TEST_CASE("checkpoints round trip") {
  const auto spec = small_spec(4);
  const auto data = sample_joint(spec, 512, 1);
  const Eigen::VectorXd alpha = data.alpha.col(1);

  const auto ddpm = train_null_ddpm(data.alpha, data.beta, quick_ddpm(20));
  const auto ddpm2 = io::null_model_from_json(nlohmann::json::parse(ddpm.checkpoint().dump()));
  CHECK(ddpm2->sample(alpha, 3, 5) == ddpm.sample(alpha, 3, 5));

  const auto vae = train_null_vae(data.alpha, data.beta, quick_vae(2));
  const auto vae2 = io::null_model_from_json(nlohmann::json::parse(vae.checkpoint().dump()));
  CHECK(vae2->sample(alpha, 3, 5) == vae.sample(alpha, 3, 5));

  const OracleNullModel oracle(spec, 0.5);
  const auto oracle2 = io::null_model_from_json(oracle.checkpoint(), &spec);
  CHECK(oracle2->kind() == "scaled-oracle");
  CHECK(oracle2->sample(alpha, 3, 5) == oracle.sample(alpha, 3, 5));

  RangeConfig rc;
  rc.epochs = 1;
  rc.hidden = 16;
  const auto range = train_range(data.y, data.alpha, rc);
  const auto range2 = io::range_model_from_json(nlohmann::json::parse(range->checkpoint().dump()));
  CHECK(range2->predict_batch(data.y.leftCols(4)) == range->predict_batch(data.y.leftCols(4)));

  auto broken = ddpm.checkpoint();
  broken["kind"] = "flow";
  CHECK_THROWS_AS(io::null_model_from_json(broken), CompatibilityError);
}

TEST_CASE("cascade sampling") {
  const auto spec = small_spec(5);
  const auto data = sample_joint(spec, 400, 1);
  RangeConfig rc;
  rc.kind = "ridge";
  const auto range = train_range(data.y, data.alpha, rc);
  const auto basis = spec.embedded_basis();
  const auto op = spec.embedded_operator();
  const Eigen::VectorXd y = data.y.col(0);

  const OracleNullModel point(spec, 0.0);
  const auto cs = cascade_sample(*range, point, basis, y, 20, 1);
  Eigen::VectorXd expected(spec.r() + spec.q());
  expected << cs.alpha_hat, spec.c * cs.alpha_hat;
  for (Eigen::Index k = 0; k < 20; ++k) CHECK((cs.samples.col(k) - expected).norm() < 1e-12);

  const OracleNullModel oracle(spec);
  const auto full = cascade_sample(*range, oracle, basis, y, 200, 2);
  const Eigen::MatrixXd resid = (op.matrix() * full.samples).colwise() - y;
  const Eigen::VectorXd norms = resid.colwise().norm().transpose();
  CHECK(norms.maxCoeff() - norms.minCoeff() < 1e-10);
  CHECK(cascade_sample(*range, oracle, basis, y, 200, 2).mean == full.mean);
}
