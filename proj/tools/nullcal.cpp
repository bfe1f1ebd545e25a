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

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nullcal/cli/commands.hpp"
#include "nullcal/error.hpp"

namespace {

using namespace nullcal;

struct Options {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::string stage = "all";
  std::string stat;
  bool average = false;
  std::optional<std::string> checkpoint;
  std::optional<long> case_index;
};

cli::Workspace open_workspace(const Options& o) {
  cli::ExperimentConfig config = o.config_path.empty() ? cli::parse_config(nlohmann::json::object())
                                                       : cli::load_config(o.config_path);
  if (o.out) config.output_dir = *o.out;
  if (o.seed) config.seed = *o.seed;
  return cli::Workspace(std::move(config));
}

std::vector<std::string> stats_from_flag(const std::string& flag) {
  if (flag.empty()) return {};
  if (flag == "both") return {"l2", "peak"};
  return {flag};
}

void report(const cli::Workspace& ws, const std::vector<cli::StageResult>& stages) {
  const auto extra = cli::record_stages(ws, stages);
  for (const auto& s : stages) {
    std::printf("%s: %zu file(s) in %.2fs\n", s.stage.c_str(), s.files.size(), s.seconds);
    for (const auto& f : s.files) std::printf("  %s\n", (ws.out() / f).string().c_str());
  }
  for (const auto& f : extra) std::printf("  %s\n", (ws.out() / f).string().c_str());
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidConfig*>(&e)) return 2;
  if (dynamic_cast<const CompatibilityError*>(&e) || dynamic_cast<const DimensionError*>(&e)) return 3;
  if (dynamic_cast<const TrainingDiverged*>(&e)) return 4;
  if (dynamic_cast<const IoError*>(&e)) return 5;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nullcal: null-space calibration experiments"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (overrides output_dir)");
    sub->add_option("--seed", o.seed, "top-level seed (overrides seed)");
  };
  auto model_flags = [&](CLI::App* sub) {
    sub->add_option("--checkpoint", o.checkpoint, "null checkpoint (default: every configured null model)");
  };

  auto* gen = app.add_subcommand("gen", "write the problem and the train/test splits");
  common(gen);
  auto* train = app.add_subcommand("train", "train range and null models");
  common(train);
  train->add_option("--stage", o.stage, "range, null-ddpm, null-vae, null-oracle, null or all");
  auto* sbc = app.add_subcommand("sbc", "simulation-based calibration on the test split");
  common(sbc);
  model_flags(sbc);
  sbc->add_option("--stat", o.stat, "test statistic")->check(CLI::IsMember({"l2", "peak", "both"}));
  auto* map = app.add_subcommand("map", "intrinsic ambiguity map");
  common(map);
  model_flags(map);
  map->add_flag("--average", o.average, "average over the test split");
  map->add_option("--case", o.case_index, "test case index (default 0)");
  auto* sweep = app.add_subcommand("sweep", "noise-level sweep (fourier-toy)");
  common(sweep);
  model_flags(sweep);
  auto* rep = app.add_subcommand("report", "range x null evaluation grid");
  common(rep);
  auto* all = app.add_subcommand("run-all", "gen, train, sbc, map, sweep and report");
  common(all);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const cli::Workspace ws = open_workspace(o);
    std::vector<cli::StageResult> stages;
    if (gen->parsed()) {
      stages.push_back(cli::cmd_gen(ws));
    } else if (train->parsed()) {
      stages = cli::cmd_train(ws, o.stage);
    } else if (sbc->parsed()) {
      stages.push_back(cli::cmd_sbc(ws, o.checkpoint, stats_from_flag(o.stat)));
    } else if (map->parsed()) {
      stages.push_back(cli::cmd_map(ws, o.checkpoint, o.case_index, o.average));
    } else if (sweep->parsed()) {
      stages.push_back(cli::cmd_sweep(ws, o.checkpoint));
    } else if (rep->parsed()) {
      stages.push_back(cli::cmd_report(ws));
    } else if (all->parsed()) {
      stages = cli::cmd_run_all(ws);
    }
    report(ws, stages);
  } catch (const std::exception& e) {
    std::cerr << "nullcal: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
