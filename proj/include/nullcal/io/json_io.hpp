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

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nullcal/gaussian.hpp"
#include "nullcal/models/ddpm.hpp"
#include "nullcal/models/null_model.hpp"
#include "nullcal/models/range_model.hpp"
#include "nullcal/models/vae.hpp"
#include "nullcal/nn/diffusion.hpp"
#include "nullcal/nn/whitener.hpp"
#include "nullcal/nn/mlp.hpp"
#include "nullcal/operator.hpp"

namespace nullcal::io {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;

/// Row-major flat float64 array.
json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& values, Eigen::Index rows, Eigen::Index cols);
json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const json& values);

json layers_to_json(const std::vector<nn::DenseLayer<float>>& layers);
std::vector<nn::DenseLayer<float>> layers_from_json(const json& layers);

json standardizer_to_json(const nn::Standardizer& s);
nn::Standardizer standardizer_from_json(const json& j);
json whitener_to_json(const nn::Whitener& w);
nn::Whitener whitener_from_json(const json& j);

/// {"format_version", "n", "p", "r", "noise_sigma", "matrix", "singular_values", "v_r", "v_n"}
json operator_to_json(const ForwardOperator<double>& op, const RangeNullBasis<double>& basis);
ForwardOperator<double> operator_from_json(const json& j);
RangeNullBasis<double> basis_from_json(const json& j);

json to_json(const GaussianConfig& c);
json to_json(const DdpmConfig& c);
json to_json(const VaeConfig& c);
json to_json(const RangeConfig& c);
/// Missing keys keep their defaults; unknown keys and type errors throw
/// ConfigError naming path.key.
GaussianConfig gaussian_config_from_json(const json& j, const std::string& path = "");
DdpmConfig ddpm_config_from_json(const json& j, const std::string& path = "");
VaeConfig vae_config_from_json(const json& j, const std::string& path = "");
RangeConfig range_config_from_json(const json& j, const std::string& path = "");

json gaussian_spec_to_json(const GaussianProblemSpec& spec);
GaussianProblemSpec gaussian_spec_from_json(const json& j);

/// Null checkpoints; oracle kinds need the Gaussian spec they refer to.
std::unique_ptr<NullModel> null_model_from_json(const json& j, const GaussianProblemSpec* spec = nullptr);
std::unique_ptr<RangeModel> range_model_from_json(const json& j);

json read_json_file(const std::string& path);
/// Pretty-printed with a trailing newline; throws IoError.
void write_json_file(const std::string& path, const json& j);

}  // namespace nullcal::io
