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

#include "nullcal/calibration/sweep.hpp"

#include <cmath>

#include "nullcal/calibration/sbc.hpp"
#include "nullcal/error.hpp"
#include "nullcal/linalg.hpp"
#include "nullcal/parallel.hpp"
#include "nullcal/rng.hpp"

namespace nullcal {

namespace {

constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;
constexpr std::uint64_t kIntrinsicStream = 0x696e7472ULL;
constexpr std::uint64_t kTotalStream = 0x746f74ULL;
constexpr std::uint64_t kMeanStream = 0x6d65616eULL;
constexpr std::uint64_t kPairStream = 0x70616972ULL;

struct MeanSe {
  double mean = 0;
  double se = 0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe out;
  const double n = static_cast<double>(v.size());
  for (double x : v) out.mean += x;
  out.mean /= n;
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (n - 1) / n);
  }
  return out;
}

void check_inputs(const NullModel& null, const ForwardOperator<double>& op, const RangeNullBasis<double>& basis,
                  const Eigen::MatrixXd& alpha_star) {
  require_dims(op.signal_dim() == basis.signal_dim(), "operator and basis disagree on the signal dimension");
  require_dims(null.cond_dim() == basis.rank() && null.out_dim() == basis.null_dim(),
               "null model does not match the basis");
  require_dims(alpha_star.rows() == basis.rank(), "alpha* rows do not match the basis rank");
  if (alpha_star.cols() < 1) throw InvalidConfig("need at least one case");
}

/// Sum over rows of the unbiased variance across columns.
double trace_variance(const Eigen::MatrixXd& columns) { return row_variance(columns).sum(); }

}  // namespace

Eigen::MatrixXd identifiable_estimator(const ForwardOperator<double>& op, const RangeNullBasis<double>& basis) {
  require_dims(op.signal_dim() == basis.signal_dim(), "identifiable_estimator: dimension mismatch");
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(op.matrix());
  return basis.v_range().transpose() * cod.pseudoInverse();
}

std::vector<NoiseSweepRow> noise_sweep(const NullModel& null, const ForwardOperator<double>& op,
                                       const RangeNullBasis<double>& basis, const Eigen::MatrixXd& alpha_star,
                                       const NoiseSweepOptions& options) {
  check_inputs(null, op, basis, alpha_star);
  if (options.sigmas.empty()) throw InvalidConfig("noise_sweep needs at least one sigma");
  if (options.samples < 2 || options.intrinsic_samples < 2 || options.noise_pairs < 1)
    throw InvalidConfig("noise_sweep needs K >= 2 and at least one noise pair");
  for (double s : options.sigmas)
    if (!(s >= 0) || !std::isfinite(s)) throw InvalidConfig("noise_sweep: sigma must be finite and >= 0");

  const Eigen::MatrixXd g = identifiable_estimator(op, basis);
  const auto p = static_cast<double>(basis.signal_dim());
  const auto cases = static_cast<std::size_t>(alpha_star.cols());
  const std::size_t ns = options.sigmas.size();
  const int draws = 2 * options.noise_pairs;
  const double k = static_cast<double>(options.samples);

  // Column ns holds the sigma = 0 reference.
  std::vector<std::vector<double>> intrinsic(ns + 1, std::vector<double>(cases));
  std::vector<std::vector<double>> total(ns + 1, std::vector<double>(cases));

  parallel_for(cases, [&](std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const std::uint64_t base = case_seed(options.seed, ii);
    const Eigen::VectorXd a_star = alpha_star.col(ii);
    Rng noise_rng(base, kNoiseStream);
    Eigen::MatrixXd eps(g.rows(), draws);
    for (int j = 0; j < options.noise_pairs; ++j) {
      const Eigen::VectorXd e = g * noise_rng.normal_vector(op.matrix().rows());
      eps.col(2 * j) = e;
      eps.col(2 * j + 1) = -e;
    }
    auto total_at = [&](double sigma) {
      double within = 0;
      Eigen::MatrixXd means(null.out_dim(), draws);
      for (int j = 0; j < draws; ++j) {
        const Eigen::VectorXd a_hat = a_star + sigma * eps.col(j);
        const Eigen::MatrixXd beta =
            null.sample(a_hat, options.samples, combine_stream(base ^ kTotalStream, static_cast<std::uint64_t>(j)));
        within += trace_variance(beta);
        means.col(j) = beta.rowwise().mean();
      }
      within /= draws;
      return (within + trace_variance(means) - within / k) / p;
    };
    auto intrinsic_at = [&](std::uint64_t stream) {
      return trace_variance(null.sample(a_star, options.intrinsic_samples,
                                        combine_stream(base ^ kIntrinsicStream, stream))) /
             p;
    };

    std::size_t ref = ns;
    for (std::size_t s = 0; s < ns; ++s) {
      intrinsic[s][i] = intrinsic_at(s);
      total[s][i] = total_at(options.sigmas[s]);
      if (ref == ns && options.sigmas[s] == 0) ref = s;
    }
    if (ref == ns) {
      intrinsic[ns][i] = intrinsic_at(ns);
      total[ns][i] = total_at(0.0);
    } else {
      intrinsic[ns][i] = intrinsic[ref][i];
      total[ns][i] = total[ref][i];
    }
  });

  std::vector<NoiseSweepRow> rows;
  for (std::size_t s = 0; s < ns; ++s) {
    NoiseSweepRow row;
    row.sigma = options.sigmas[s];
    const auto in = mean_se(intrinsic[s]);
    const auto tot = mean_se(total[s]);
    row.intrinsic = in.mean;
    row.intrinsic_se = in.se;
    row.total = tot.mean;
    row.total_se = tot.se;
    std::vector<double> shift(cases), prop(cases);
    for (std::size_t i = 0; i < cases; ++i) {
      shift[i] = intrinsic[s][i] - intrinsic[ns][i];
      prop[i] = total[s][i] - total[ns][i];
    }
    row.intrinsic_shift_se = mean_se(shift).se;
    const auto pr = mean_se(prop);
    row.propagated = pr.mean;
    row.propagated_se = pr.se;
    rows.push_back(row);
  }
  return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require_dims(x.size() == y.size(), "loglog_slope: length mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0 && y[i] > 0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) throw DegenerateInput("loglog_slope needs two positive points");
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (!(sxx > 0)) throw DegenerateInput("loglog_slope needs distinct x values");
  return sxy / sxx;
}

std::vector<BoundCheckReport> propagated_bound_check(const NullModel& null, const ForwardOperator<double>& op,
                                                     const RangeNullBasis<double>& basis,
                                                     const Eigen::MatrixXd& alpha_star,
                                                     const std::vector<double>& sigmas,
                                                     const BoundCheckOptions& options) {
  check_inputs(null, op, basis, alpha_star);
  if (options.probes < 10) throw InvalidConfig("propagated_bound_check needs at least 10 probes");
  if (options.mean_samples < 2 || !(options.jacobian_step > 0))
    throw InvalidConfig("propagated_bound_check: bad sample count or step");

  const Eigen::MatrixXd g = identifiable_estimator(op, basis);
  const auto cases = static_cast<std::size_t>(alpha_star.cols());
  const std::size_t ns = sigmas.size();
  const Eigen::Index r = basis.rank();
  const Eigen::Index n = op.matrix().rows();
  const double h = options.jacobian_step;

  std::vector<double> jac(cases), floor(cases);
  std::vector<std::vector<double>> pairs(ns, std::vector<double>(cases)), lhs = pairs, dist = pairs;

  parallel_for(cases, [&](std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const std::uint64_t base = case_seed(options.seed, ii);
    const std::uint64_t mean_seed = combine_stream(base, kMeanStream);
    auto m = [&](const Eigen::VectorXd& a) -> Eigen::VectorXd {
      return null.sample(a, options.mean_samples, mean_seed).rowwise().mean();
    };
    const Eigen::VectorXd a_star = alpha_star.col(ii);
    floor[i] = trace_variance(null.sample(a_star, options.mean_samples, mean_seed)) /
               static_cast<double>(options.mean_samples);

    Eigen::MatrixXd jacobian(null.out_dim(), r);
    for (Eigen::Index c = 0; c < r; ++c) {
      Eigen::VectorXd plus = a_star, minus = a_star;
      plus[c] += h;
      minus[c] -= h;
      jacobian.col(c) = (m(plus) - m(minus)) / (2 * h);
    }
    jac[i] = r > 0 && jacobian.size() > 0 ? Eigen::JacobiSVD<Eigen::MatrixXd>(jacobian).singularValues()[0] : 0.0;

    Rng noise_rng(base, kNoiseStream);
    Rng pair_rng(base, kPairStream);
    Eigen::MatrixXd eps(r, options.probes), eps_pair(r, options.probes);
    for (int j = 0; j < options.probes; ++j) {
      eps.col(j) = g * noise_rng.normal_vector(n);
      eps_pair.col(j) = g * pair_rng.normal_vector(n);
    }
    for (std::size_t s = 0; s < ns; ++s) {
      const double sigma = sigmas[s];
      Eigen::MatrixXd means(null.out_dim(), options.probes);
      double d2 = 0, best = 0;
      for (int j = 0; j < options.probes; ++j) {
        const Eigen::VectorXd a_hat = a_star + sigma * eps.col(j);
        means.col(j) = m(a_hat);
        d2 += (a_hat - a_star).squaredNorm();
        if (sigma > 0) {
          const Eigen::VectorXd b = a_star + sigma * eps_pair.col(j);
          const double gap = (a_hat - b).norm();
          if (gap > 0) best = std::max(best, (means.col(j) - m(b)).norm() / gap);
        }
      }
      lhs[s][i] = trace_variance(means);
      dist[s][i] = d2 / options.probes;
      pairs[s][i] = best;
    }
  });

  std::vector<BoundCheckReport> reports;
  for (std::size_t s = 0; s < ns; ++s) {
    BoundCheckReport rep;
    rep.sigma = sigmas[s];
    rep.cases = static_cast<Eigen::Index>(cases);
    for (std::size_t i = 0; i < cases; ++i) {
      const double l = std::max(jac[i], pairs[s][i]);
      rep.lipschitz_jacobian = std::max(rep.lipschitz_jacobian, jac[i]);
      rep.lipschitz_pairs = std::max(rep.lipschitz_pairs, pairs[s][i]);
      rep.lipschitz_estimate = std::max(rep.lipschitz_estimate, l);
      rep.lhs += lhs[s][i];
      rep.rhs += l * l * dist[s][i];
      rep.mc_floor += floor[i];
    }
    rep.lhs /= static_cast<double>(cases);
    rep.rhs /= static_cast<double>(cases);
    rep.mc_floor /= static_cast<double>(cases);
    reports.push_back(rep);
  }
  return reports;
}

BoundCheckReport propagated_bound_check(const NullModel& null, const ForwardOperator<double>& op,
                                        const RangeNullBasis<double>& basis, const Eigen::MatrixXd& alpha_star,
                                        double sigma, const BoundCheckOptions& options) {
  return propagated_bound_check(null, op, basis, alpha_star, std::vector<double>{sigma}, options).front();
}

}  // namespace nullcal
