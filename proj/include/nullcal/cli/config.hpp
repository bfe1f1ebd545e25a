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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nullcal/gaussian.hpp"
#include "nullcal/models/ddpm.hpp"
#include "nullcal/models/range_model.hpp"
#include "nullcal/models/vae.hpp"
#include "nullcal/synthetic/problems.hpp"

namespace nullcal::cli {

enum class ExperimentKind { gaussian, fourier_toy, patch_source };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct DataSection {
  long count = 0;  // 0 selects the per-experiment default
  double test_fraction = 0.1;
};

struct SbcSection {
  long samples = 200;  // L
  long cases = 500;    // capped by the test split
  int bins = 20;
  double band_level = 0.99;
  std::vector<std::string> statistics{"l2", "peak"};
};

struct MapSection {
  long samples = 200;
  long cases = 450;
};

struct SweepSection {
  std::vector<double> sigmas{0.0, 0.025, 0.05, 0.1, 0.2, 0.4};
  long cases = 50;
  long samples = 32;
  int noise_pairs = 4;
  long intrinsic_samples = 64;
  long bound_cases = 10;  // leading sweep cases used by the bound check
  int probes = 10;
  long mean_samples = 64;
  double jacobian_step = 0.05;
};

struct ReportSection {
  long samples = 200;
  long cases = 500;
};

/// Everything a run depends on. Sub-sections carry no seeds of their own;
/// each stage derives its seed from `seed`.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::gaussian;
  std::uint64_t seed = 0;
  std::string output_dir = "nullcal-out";
  DataSection data;
  GaussianConfig gaussian;
  FourierToyConfig fourier;
  PatchConfig patch;
  std::vector<std::string> range_models{"mlp"};
  RangeConfig range;
  std::vector<std::string> null_models{"ddpm", "vae"};
  DdpmConfig ddpm;
  VaeConfig vae;
  double oracle_scale = 1.0;
  SbcSection sbc;
  MapSection map;
  SweepSection sweep;
  ReportSection report;

  long data_count() const;
  long test_count() const;
  long train_count() const { return data_count() - test_count(); }
};

enum class Stage : std::uint64_t { problem = 1, data, range, ddpm, vae, sbc, map, sweep, report };

std::uint64_t stage_seed(const ExperimentConfig& config, Stage stage);

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// ConfigError naming the field path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Canonical form with every field present; hashed into output headers.
nlohmann::json to_json(const ExperimentConfig& config);

nlohmann::json to_json(const FourierToyConfig& c);
nlohmann::json to_json(const PatchConfig& c);

}  // namespace nullcal::cli
