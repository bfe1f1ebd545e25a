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

#include "nullcal/models/range_model.hpp"

#include <cmath>
#include <numbers>

#include "nullcal/io/json_io.hpp"
#include "nullcal/nn/adam.hpp"

namespace nullcal {

RidgeRangeModel::RidgeRangeModel(Eigen::MatrixXd weight, Eigen::VectorXd bias, double lambda)
    : weight_(std::move(weight)), bias_(std::move(bias)), lambda_(lambda) {
  require_dims(weight_.rows() == bias_.size(), "RidgeRangeModel: bias length mismatch");
}

Eigen::MatrixXd RidgeRangeModel::predict_batch(const Eigen::MatrixXd& y) const {
  require_dims(y.rows() == in_dim(), "ridge predict: y has wrong length");
  Eigen::MatrixXd out = weight_ * y;
  out.colwise() += bias_;
  return out;
}

nlohmann::json RidgeRangeModel::checkpoint() const {
  nlohmann::json j;
  j["format_version"] = io::kFormatVersion;
  j["kind"] = kind();
  j["config"] = {{"ridge_lambda", lambda_}};
  j["shape"] = {{"in_dim", in_dim()}, {"out_dim", out_dim()}};
  j["schedule"] = nullptr;
  j["layers"] = nlohmann::json::array(
      {{{"rows", weight_.rows()}, {"cols", weight_.cols()}, {"w", io::matrix_to_json(weight_)},
        {"b", io::vector_to_json(bias_)}}});
  return j;
}

MlpRangeModel::MlpRangeModel(RangeConfig config, nn::Mlp<float> net, nn::Standardizer y_norm,
                             nn::Standardizer alpha_norm)
    : config_(std::move(config)), net_(std::move(net)), y_norm_(std::move(y_norm)), alpha_norm_(std::move(alpha_norm)) {
  require_dims(y_norm_.dim() == net_.input_dim() && alpha_norm_.dim() == net_.output_dim(),
               "MlpRangeModel: normalizer dims do not match the network");
}

Eigen::MatrixXd MlpRangeModel::predict_batch(const Eigen::MatrixXd& y) const {
  require_dims(y.rows() == in_dim(), "mlp predict: y has wrong length");
  return alpha_norm_.inverse(net_.forward(y_norm_.forward(y).cast<float>()).cast<double>());
}

nlohmann::json MlpRangeModel::checkpoint() const {
  nlohmann::json j;
  j["format_version"] = io::kFormatVersion;
  j["kind"] = kind();
  j["config"] = io::to_json(config_);
  j["shape"] = {{"in_dim", in_dim()}, {"out_dim", out_dim()}};
  j["schedule"] = nullptr;
  j["layers"] = io::layers_to_json(net_.layers());
  j["normalization"] = {{"y", io::standardizer_to_json(y_norm_)}, {"alpha", io::standardizer_to_json(alpha_norm_)}};
  return j;
}

namespace {

std::unique_ptr<RangeModel> fit_ridge(const Eigen::MatrixXd& y, const Eigen::MatrixXd& alpha, double lambda) {
  if (lambda < 0) throw InvalidConfig("ridge_lambda must be >= 0");
  const Eigen::VectorXd y_mean = y.rowwise().mean();
  const Eigen::VectorXd a_mean = alpha.rowwise().mean();
  const Eigen::MatrixXd yc = y.colwise() - y_mean;
  const Eigen::MatrixXd ac = alpha.colwise() - a_mean;
  Eigen::MatrixXd gram = yc * yc.transpose();
  gram.diagonal().array() += lambda;
  // W gram = ac yc^T  =>  gram W^T = yc ac^T (gram symmetric)
  const Eigen::MatrixXd wt = gram.ldlt().solve(yc * ac.transpose());
  Eigen::MatrixXd w = wt.transpose();
  Eigen::VectorXd b = a_mean - w * y_mean;
  if (!w.allFinite()) throw TrainingDiverged("range ridge: singular normal equations", 0);
  return std::make_unique<RidgeRangeModel>(std::move(w), std::move(b), lambda);
}

std::unique_ptr<RangeModel> fit_mlp(const Eigen::MatrixXd& y, const Eigen::MatrixXd& alpha, const RangeConfig& config,
                                    TrainingHistory* history) {
  if (config.epochs < 1 || config.batch < 1 || !(config.lr > 0) || config.hidden < 1 || config.blocks < 1)
    throw InvalidConfig("range mlp: invalid config");
  const auto y_norm = nn::Standardizer::fit(y);
  const auto a_norm = nn::Standardizer::fit(alpha);
  const Matrix<float> in_all = y_norm.forward(y).cast<float>();
  const Matrix<float> out_all = a_norm.forward(alpha).cast<float>();

  Rng init_rng = Rng(config.seed).substream(1);
  nn::Mlp<float> net(nn::block_widths(static_cast<int>(y.rows()), config.hidden, config.blocks,
                                      static_cast<int>(alpha.rows())),
                     nn::Activation::silu, init_rng);
  nn::Adam<float> adam([&] {
    nn::ParameterSpans<float> s;
    nn::append_spans(net.layers(), s);
    return s;
  }(), {config.lr, 0.9, 0.999, 1e-8});
  auto grads = net.zero_gradients();
  MinibatchSampler batches(y.cols(), Rng(config.seed).substream(2));

  const int b = static_cast<int>(std::min<Eigen::Index>(config.batch, y.cols()));
  const long per_epoch = std::max<long>(1, static_cast<long>(y.cols() / b));
  const long total = per_epoch * config.epochs;
  const float scale = 2.0f / static_cast<float>(static_cast<double>(b) * alpha.rows());
  typename nn::Mlp<float>::Tape tape;
  for (long step = 1; step <= total; ++step) {
    if (config.cosine_decay)
      adam.set_lr(config.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step - 1) / total)));
    const auto idx = batches.next(b);
    const Matrix<float> diff = net.forward(gather_columns(in_all, idx), tape) - gather_columns(out_all, idx);
    const double loss = static_cast<double>(diff.squaredNorm()) / (static_cast<double>(b) * alpha.rows());
    if (!std::isfinite(loss)) throw TrainingDiverged("range mlp: non-finite loss", step);
    if (history) history->record(step, loss);
    net.backward(tape, diff * scale, grads);
    nn::ParameterSpans<float> p, g;
    nn::append_spans(net.layers(), p);
    nn::append_spans(grads, g);
    adam.step(p, g);
  }
  return std::make_unique<MlpRangeModel>(config, std::move(net), y_norm, a_norm);
}

}  // namespace

std::unique_ptr<RangeModel> train_range(const Eigen::MatrixXd& y, const Eigen::MatrixXd& alpha,
                                        const RangeConfig& config, TrainingHistory* history) {
  if (y.cols() == 0) throw InvalidConfig("train_range: empty dataset");
  require_dims(y.cols() == alpha.cols(), "train_range: y/alpha count mismatch");
  if (config.kind == "ridge") return fit_ridge(y, alpha, config.ridge_lambda);
  if (config.kind == "mlp") return fit_mlp(y, alpha, config, history);
  throw InvalidConfig("unknown range model kind '" + config.kind + "'");
}

}  // namespace nullcal
