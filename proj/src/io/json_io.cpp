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

#include "nullcal/io/json_io.hpp"

#include <fstream>
#include <sstream>

#include "nullcal/models/ddpm.hpp"
#include "nullcal/models/vae.hpp"
#include "nullcal/io/config_reader.hpp"

namespace nullcal::io {

namespace {

std::string to_string_any(nn::Conditioning c) { return nn::to_string(c); }
std::string to_string_any(nn::Normalization n) { return nn::to_string(n); }

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw CompatibilityError(std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

json matrix_to_json(const Eigen::MatrixXd& m) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) arr.push_back(m(i, k));
  return arr;
}

Eigen::MatrixXd matrix_from_json(const json& values, Eigen::Index rows, Eigen::Index cols) {
  if (!values.is_array() || static_cast<Eigen::Index>(values.size()) != rows * cols)
    throw CompatibilityError("matrix array has wrong length");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = values[static_cast<std::size_t>(i * cols + k)].get<double>();
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from_json(const json& values) {
  if (!values.is_array()) throw CompatibilityError("expected an array");
  const auto v = values.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json layers_to_json(const std::vector<nn::DenseLayer<float>>& layers) {
  json arr = json::array();
  for (const auto& l : layers) {
    arr.push_back({{"rows", l.weight.rows()},
                   {"cols", l.weight.cols()},
                   {"w", matrix_to_json(l.weight.cast<double>())},
                   {"b", vector_to_json(l.bias.cast<double>())}});
  }
  return arr;
}

std::vector<nn::DenseLayer<float>> layers_from_json(const json& layers) {
  if (!layers.is_array()) throw CompatibilityError("layers must be an array");
  std::vector<nn::DenseLayer<float>> out;
  for (const auto& l : layers) {
    const auto rows = require(l, "rows").get<Eigen::Index>();
    const auto cols = require(l, "cols").get<Eigen::Index>();
    nn::DenseLayer<float> layer{matrix_from_json(require(l, "w"), rows, cols).cast<float>(),
                                vector_from_json(require(l, "b")).cast<float>()};
    if (layer.bias.size() != rows) throw CompatibilityError("layer bias length mismatch");
    out.push_back(std::move(layer));
  }
  return out;
}

json standardizer_to_json(const nn::Standardizer& s) {
  return {{"mean", vector_to_json(s.mean)}, {"scale", vector_to_json(s.scale)}};
}

nn::Standardizer standardizer_from_json(const json& j) {
  nn::Standardizer s{vector_from_json(require(j, "mean")), vector_from_json(require(j, "scale"))};
  if (s.mean.size() != s.scale.size()) throw CompatibilityError("standardizer length mismatch");
  return s;
}

json operator_to_json(const ForwardOperator<double>& op, const RangeNullBasis<double>& basis) {
  return {{"format_version", kFormatVersion},
          {"n", op.matrix().rows()},
          {"p", op.matrix().cols()},
          {"r", basis.rank()},
          {"noise_sigma", op.noise_sigma()},
          {"matrix", matrix_to_json(op.matrix())},
          {"singular_values", vector_to_json(basis.singular_values())},
          {"v_r", matrix_to_json(basis.v_range())},
          {"v_n", matrix_to_json(basis.v_null())}};
}

ForwardOperator<double> operator_from_json(const json& j) {
  const auto n = require(j, "n").get<Eigen::Index>();
  const auto p = require(j, "p").get<Eigen::Index>();
  return ForwardOperator<double>(matrix_from_json(require(j, "matrix"), n, p),
                                 j.value("noise_sigma", 0.0));
}

RangeNullBasis<double> basis_from_json(const json& j) {
  const auto p = require(j, "p").get<Eigen::Index>();
  const auto r = require(j, "r").get<Eigen::Index>();
  return RangeNullBasis<double>(matrix_from_json(require(j, "v_r"), p, r),
                                matrix_from_json(require(j, "v_n"), p, p - r),
                                vector_from_json(require(j, "singular_values")));
}

json to_json(const GaussianConfig& c) {
  return {{"r", c.r},
          {"q", c.q},
          {"n", c.n},
          {"lambda_max", c.lambda_max},
          {"lambda_min", c.lambda_min},
          {"sigma_y", c.sigma_y},
          {"seed", c.seed}};
}

json whitener_to_json(const nn::Whitener& w) {
  return {{"kind", nn::to_string(w.kind)},
          {"dim", w.dim()},
          {"latent_dim", w.latent_dim()},
          {"mean", vector_to_json(w.mean)},
          {"to_latent", matrix_to_json(w.to_latent)},
          {"from_latent", matrix_to_json(w.from_latent)}};
}

nn::Whitener whitener_from_json(const json& j) {
  nn::Whitener w;
  w.kind = nn::normalization_from_string(require(j, "kind").get<std::string>());
  const auto d = require(j, "dim").get<Eigen::Index>();
  const auto k = require(j, "latent_dim").get<Eigen::Index>();
  if (d < 1 || k < 1 || k > d) throw CompatibilityError("normalizer: bad dimensions");
  w.mean = vector_from_json(require(j, "mean"));
  if (w.mean.size() != d) throw CompatibilityError("normalizer: mean length mismatch");
  w.to_latent = matrix_from_json(require(j, "to_latent"), k, d);
  w.from_latent = matrix_from_json(require(j, "from_latent"), d, k);
  return w;
}

json to_json(const DdpmConfig& c) {
  return {{"steps", c.steps},
          {"batch", c.batch},
          {"lr", c.lr},
          {"diffusion_steps", c.diffusion_steps},
          {"beta_first", c.beta_first},
          {"beta_last", c.beta_last},
          {"hidden", c.hidden},
          {"blocks", c.blocks},
          {"time_dim", c.time_dim},
          {"clip_denoised", c.clip_denoised},
          {"ema_decay", c.ema_decay},
          {"conditioning", nn::to_string(c.conditioning)},
          {"normalization", nn::to_string(c.normalization)},
          {"pca_tolerance", c.pca_tolerance},
          {"seed", c.seed}};
}

json to_json(const VaeConfig& c) {
  return {{"epochs", c.epochs},
          {"batch", c.batch},
          {"lr", c.lr},
          {"latent_dim", c.latent_dim},
          {"kl_weight", c.kl_weight},
          {"hidden", c.hidden},
          {"blocks", c.blocks},
          {"normalization", nn::to_string(c.normalization)},
          {"pca_tolerance", c.pca_tolerance},
          {"decode_noise", c.decode_noise},
          {"seed", c.seed}};
}

json to_json(const RangeConfig& c) {
  return {{"kind", c.kind},
          {"epochs", c.epochs},
          {"batch", c.batch},
          {"lr", c.lr},
          {"cosine_decay", c.cosine_decay},
          {"hidden", c.hidden},
          {"blocks", c.blocks},
          {"ridge_lambda", c.ridge_lambda},
          {"seed", c.seed}};
}

namespace {

template <typename Enum, typename Parse>
void read_enum(ObjectReader& r, const std::string& key, Enum& out, Parse parse) {
  std::string name = to_string_any(out);
  r.get(key, name);
  try {
    out = parse(name);
  } catch (const InvalidConfig& e) {
    throw ConfigError(r.path_of(key), e.what());
  }
}

}  // namespace

GaussianConfig gaussian_config_from_json(const json& j, const std::string& path) {
  GaussianConfig c;
  ObjectReader r(j, path);
  r.get("r", c.r);
  r.get("q", c.q);
  r.get("n", c.n);
  r.get("lambda_max", c.lambda_max);
  r.get("lambda_min", c.lambda_min);
  r.get("sigma_y", c.sigma_y);
  r.get("seed", c.seed);
  r.finish();
  return c;
}

DdpmConfig ddpm_config_from_json(const json& j, const std::string& path) {
  DdpmConfig c;
  ObjectReader r(j, path);
  r.get("steps", c.steps);
  r.get("batch", c.batch);
  r.get("lr", c.lr);
  r.get("diffusion_steps", c.diffusion_steps);
  r.get("beta_first", c.beta_first);
  r.get("beta_last", c.beta_last);
  r.get("hidden", c.hidden);
  r.get("blocks", c.blocks);
  r.get("time_dim", c.time_dim);
  r.get("clip_denoised", c.clip_denoised);
  r.get("ema_decay", c.ema_decay);
  read_enum(r, "conditioning", c.conditioning, nn::conditioning_from_string);
  read_enum(r, "normalization", c.normalization, nn::normalization_from_string);
  r.get("pca_tolerance", c.pca_tolerance);
  r.get("seed", c.seed);
  r.finish();
  return c;
}

VaeConfig vae_config_from_json(const json& j, const std::string& path) {
  VaeConfig c;
  ObjectReader r(j, path);
  r.get("epochs", c.epochs);
  r.get("batch", c.batch);
  r.get("lr", c.lr);
  r.get("latent_dim", c.latent_dim);
  r.get("kl_weight", c.kl_weight);
  r.get("hidden", c.hidden);
  r.get("blocks", c.blocks);
  read_enum(r, "normalization", c.normalization, nn::normalization_from_string);
  r.get("pca_tolerance", c.pca_tolerance);
  r.get("decode_noise", c.decode_noise);
  r.get("seed", c.seed);
  r.finish();
  return c;
}

RangeConfig range_config_from_json(const json& j, const std::string& path) {
  RangeConfig c;
  ObjectReader r(j, path);
  r.get("kind", c.kind);
  r.get("epochs", c.epochs);
  r.get("batch", c.batch);
  r.get("lr", c.lr);
  r.get("cosine_decay", c.cosine_decay);
  r.get("hidden", c.hidden);
  r.get("blocks", c.blocks);
  r.get("ridge_lambda", c.ridge_lambda);
  r.get("seed", c.seed);
  r.finish();
  if (c.kind != "mlp" && c.kind != "ridge") throw ConfigError(r.path_of("kind"), "expected 'mlp' or 'ridge'");
  return c;
}

json gaussian_spec_to_json(const GaussianProblemSpec& spec) {
  return {{"format_version", kFormatVersion},
          {"config", to_json(spec.config)},
          {"a", matrix_to_json(spec.a)},
          {"c", matrix_to_json(spec.c)},
          {"sigma_eta", matrix_to_json(spec.sigma_eta)},
          {"cholesky_l", matrix_to_json(spec.cholesky_l)},
          {"eigenvalues", vector_to_json(spec.eigenvalues)}};
}

GaussianProblemSpec gaussian_spec_from_json(const json& j) {
  GaussianProblemSpec spec;
  spec.config = gaussian_config_from_json(require(j, "config"));
  const auto& c = spec.config;
  spec.a = matrix_from_json(require(j, "a"), c.n, c.r);
  spec.c = matrix_from_json(require(j, "c"), c.q, c.r);
  spec.sigma_eta = matrix_from_json(require(j, "sigma_eta"), c.q, c.q);
  spec.cholesky_l = matrix_from_json(require(j, "cholesky_l"), c.q, c.q);
  spec.eigenvalues = vector_from_json(require(j, "eigenvalues"));
  return spec;
}

std::unique_ptr<NullModel> null_model_from_json(const json& j, const GaussianProblemSpec* spec) {
  const auto kind = require(j, "kind").get<std::string>();
  if (require(j, "format_version").get<int>() != kFormatVersion)
    throw CompatibilityError("unsupported checkpoint format_version");
  const auto& shape = require(j, "shape");
  const int data_dim = require(shape, "data_dim").get<int>();
  const int cond_dim = require(shape, "cond_dim").get<int>();
  const auto& config = require(j, "config");
  if (kind == "oracle" || kind == "scaled-oracle") {
    if (!spec) throw CompatibilityError("oracle checkpoint needs the Gaussian problem spec");
    if (spec->q() != data_dim || spec->r() != cond_dim) throw CompatibilityError("oracle checkpoint dims mismatch");
    return std::make_unique<OracleNullModel>(*spec, require(config, "covariance_scale").get<double>());
  }
  const auto& norm = require(j, "normalization");
  auto alpha_norm = standardizer_from_json(require(norm, "alpha"));
  auto beta_norm = whitener_from_json(require(norm, "beta"));
  if (beta_norm.dim() != data_dim) throw CompatibilityError("checkpoint: normalizer dim mismatch");
  const int latent_dim = static_cast<int>(beta_norm.latent_dim());
  auto layers = layers_from_json(require(j, "layers"));
  if (kind == "ddpm") {
    const DdpmConfig cfg = ddpm_config_from_json(config);
    nn::DenoiserShape s{latent_dim, cond_dim, cfg.time_dim, cfg.hidden, cfg.blocks, cfg.conditioning};
    return std::make_unique<DdpmNullModel>(cfg, nn::Denoiser<float>(s, layers), std::move(alpha_norm),
                                           std::move(beta_norm), j.value("clip_bound", 0.0));
  }
  if (kind == "vae") {
    const VaeConfig cfg = vae_config_from_json(config);
    const auto nl = static_cast<std::size_t>(cfg.blocks) + 1;
    if (layers.size() != 2 * nl) throw CompatibilityError("vae checkpoint: wrong layer count");
    nn::VaeShape s{latent_dim, cond_dim, cfg.latent_dim, cfg.hidden, cfg.blocks};
    nn::Mlp<float> enc(nn::block_widths(latent_dim + cond_dim, cfg.hidden, cfg.blocks, 2 * cfg.latent_dim),
                       nn::Activation::silu, std::vector<nn::DenseLayer<float>>(layers.begin(), layers.begin() + nl));
    nn::Mlp<float> dec(nn::block_widths(cfg.latent_dim + cond_dim, cfg.hidden, cfg.blocks, latent_dim),
                       nn::Activation::silu, std::vector<nn::DenseLayer<float>>(layers.begin() + nl, layers.end()));
    return std::make_unique<VaeNullModel>(cfg, nn::ConditionalVae<float>(s, std::move(enc), std::move(dec)),
                                          std::move(alpha_norm), std::move(beta_norm));
  }
  throw CompatibilityError("unknown null checkpoint kind '" + kind + "'");
}

std::unique_ptr<RangeModel> range_model_from_json(const json& j) {
  const auto kind = require(j, "kind").get<std::string>();
  if (require(j, "format_version").get<int>() != kFormatVersion)
    throw CompatibilityError("unsupported checkpoint format_version");
  const auto& layers = require(j, "layers");
  if (kind == "ridge") {
    if (!layers.is_array() || layers.size() != 1) throw CompatibilityError("ridge checkpoint: expected one layer");
    const auto& l = layers[0];
    const auto rows = require(l, "rows").get<Eigen::Index>();
    const auto cols = require(l, "cols").get<Eigen::Index>();
    return std::make_unique<RidgeRangeModel>(matrix_from_json(require(l, "w"), rows, cols),
                                             vector_from_json(require(l, "b")),
                                             require(j, "config").value("ridge_lambda", 0.0));
  }
  if (kind == "mlp") {
    const RangeConfig cfg = range_config_from_json(require(j, "config"));
    const auto& shape = require(j, "shape");
    const int in = require(shape, "in_dim").get<int>();
    const int out = require(shape, "out_dim").get<int>();
    const auto& norm = require(j, "normalization");
    nn::Mlp<float> net(nn::block_widths(in, cfg.hidden, cfg.blocks, out), nn::Activation::silu,
                       layers_from_json(layers));
    return std::make_unique<MlpRangeModel>(cfg, std::move(net), standardizer_from_json(require(norm, "y")),
                                           standardizer_from_json(require(norm, "alpha")));
  }
  throw CompatibilityError("unknown range checkpoint kind '" + kind + "'");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(1) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace nullcal::io
