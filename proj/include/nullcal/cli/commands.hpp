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

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nullcal/cli/config.hpp"
#include "nullcal/io/output.hpp"
#include "nullcal/models/null_model.hpp"
#include "nullcal/models/range_model.hpp"
#include "nullcal/operator.hpp"

namespace nullcal::cli {

/// Output directory layout and headers for one experiment config.
class Workspace {
 public:
  explicit Workspace(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  const nlohmann::json& canonical() const { return canonical_; }
  const std::filesystem::path& out() const { return out_; }
  io::OutputHeader header(std::string what) const { return io::OutputHeader::make(std::move(what), canonical_); }
  /// Path relative to the output directory, '/'-separated.
  std::string relative(const std::filesystem::path& p) const;

  std::filesystem::path problem_path() const { return out_ / "problem.json"; }
  std::filesystem::path split_path(const std::string& split) const { return out_ / "data" / (split + ".csv"); }
  std::filesystem::path checkpoint_path(const std::string& name) const {
    return out_ / "checkpoints" / (name + ".json");
  }

 private:
  ExperimentConfig config_;
  nlohmann::json canonical_;
  std::filesystem::path out_;
};

/// Operator, basis and (gaussian only) the analytic spec.
struct Problem {
  ForwardOperator<double> op{Eigen::MatrixXd::Zero(1, 1)};
  RangeNullBasis<double> basis{Eigen::MatrixXd::Zero(1, 0), Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd()};
  std::optional<GaussianProblemSpec> spec;
  int image_width = 0;  // > 0 when the signal is a 2D image
  int image_height = 0;

  Eigen::Index r() const { return basis.rank(); }
  Eigen::Index q() const { return basis.null_dim(); }
};

/// Columns are cases.
struct Split {
  Eigen::MatrixXd alpha, beta, y;
  Eigen::Index size() const { return alpha.cols(); }
};

struct StageResult {
  std::string stage;
  std::vector<std::string> files;  // relative to the output directory
  double seconds = 0;
};

Problem make_problem(const ExperimentConfig& config);
Problem load_problem(const Workspace& ws);
Split load_split(const Workspace& ws, const std::string& split);

/// Null checkpoints keyed by label (file stem); oracle kinds use the
/// problem's spec.
std::unique_ptr<NullModel> load_null(const Workspace& ws, const Problem& problem, const std::filesystem::path& path);
std::unique_ptr<RangeModel> load_range(const std::filesystem::path& path);

StageResult cmd_gen(const Workspace& ws);
/// stage: range, null-ddpm, null-vae, null-oracle, null (every configured
/// null model) or all.
std::vector<StageResult> cmd_train(const Workspace& ws, const std::string& stage);
StageResult cmd_sbc(const Workspace& ws, const std::optional<std::string>& checkpoint,
                    const std::vector<std::string>& statistics);
StageResult cmd_map(const Workspace& ws, const std::optional<std::string>& checkpoint,
                    const std::optional<long>& case_index, bool average);
StageResult cmd_sweep(const Workspace& ws, const std::optional<std::string>& checkpoint);
StageResult cmd_report(const Workspace& ws);
/// gen, train, sbc, map (averaged), sweep (fourier-toy only), report.
std::vector<StageResult> cmd_run_all(const Workspace& ws);

/// Merges stage file lists into manifest.json and wall-clock times into
/// timings.json (kept apart so the manifest stays byte-reproducible).
std::vector<std::string> record_stages(const Workspace& ws, const std::vector<StageResult>& stages);

}  // namespace nullcal::cli
