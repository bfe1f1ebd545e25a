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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nullcal/cli/commands.hpp"
#include "nullcal/cli/config.hpp"
#include "nullcal/error.hpp"
#include "nullcal/io/json_io.hpp"

using namespace nullcal;
using namespace nullcal::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

nlohmann::json small_gaussian(const std::string& name) {
  const fs::path out = fs::temp_directory_path() / ("nullcal-cli-" + name);
  fs::remove_all(out);
  return {{"experiment", "gaussian"},
          {"seed", 5},
          {"output_dir", out.string()},
          {"data", {{"count", 400}, {"test_fraction", 0.25}}},
          {"gaussian", {{"r", 4}, {"q", 8}, {"n", 6}}},
          {"range_models", {"ridge"}},
          {"null_models", {"oracle"}},
          {"sbc", {{"cases", 100}, {"samples", 100}, {"bins", 10}}},
          {"map", {{"cases", 10}, {"samples", 4000}}},
          {"report", {{"cases", 20}, {"samples", 20}}}};
}

// Report rows are label,label,number...; returns column `col` of every row.
std::vector<std::string> report_column(const fs::path& p, std::size_t col) {
  std::ifstream in(p);
  std::string line;
  std::vector<std::string> out;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t i = 0; i <= col; ++i) std::getline(ss, cell, ',');
    out.push_back(cell);
  }
  return out;
}

}  // namespace

TEST_CASE("config parsing is strict") {
  const auto defaults = parse_config(nlohmann::json::object());
  CHECK(defaults.experiment == ExperimentKind::gaussian);
  CHECK(defaults.data_count() == 100000);

  auto expect_path = [](const nlohmann::json& j, const std::string& path) {
    try {
      parse_config(j);
      FAIL("no error for " << j.dump());
    } catch (const ConfigError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(path) != std::string::npos, e.what());
    }
  };
  expect_path({{"bogus", 1}}, "bogus");
  expect_path({{"ddpm", {{"steps", 1.5}}}}, "ddpm.steps");
  expect_path({{"ddpm", {{"seed", 3}}}}, "ddpm.seed");
  expect_path({{"experiment", "fourier-toy"}, {"null_models", {"oracle"}}}, "null_models");
  expect_path({{"experiment", "mri"}}, "experiment");
  expect_path({{"data", {{"test_fraction", 1.5}}}}, "data.test_fraction");

  const auto round = parse_config(to_json(defaults));
  CHECK(to_json(round) == to_json(defaults));
  CHECK(stage_seed(defaults, Stage::ddpm) != stage_seed(defaults, Stage::vae));
}

TEST_CASE("gen writes reproducible splits") {
  auto j = small_gaussian("gen");
  const Workspace ws(parse_config(j));
  const auto res = cmd_gen(ws);
  CHECK(res.stage == "gen");
  const auto train = io::read_csv(ws.split_path("train"));
  CHECK(train.columns.size() == 4 + 8 + 6);
  CHECK(train.rows.rows() == 300);
  CHECK(io::read_csv(ws.split_path("test")).rows.rows() == 100);
  const std::string first = slurp(ws.split_path("train"));
  cmd_gen(ws);
  CHECK(slurp(ws.split_path("train")) == first);

  // Full-size gaussian problem: r + q + n columns.
  auto big = small_gaussian("gen-big");
  big.erase("gaussian");
  big["data"] = {{"count", 1}, {"test_fraction", 0.0}};
  const Workspace wb(parse_config(big));
  cmd_gen(wb);
  const auto one = io::read_csv(wb.split_path("train"));
  CHECK(one.columns.size() == 128);
  CHECK(one.rows.rows() == 1);
  CHECK_THROWS_AS(cmd_sbc(wb, std::nullopt, {}), ConfigError);
}

TEST_CASE("stale workspaces are rejected") {
  auto j = small_gaussian("stale");
  cmd_gen(Workspace(parse_config(j)));
  j["seed"] = 6;
  const Workspace changed(parse_config(j));
  CHECK_THROWS_AS(load_problem(changed), CompatibilityError);
  CHECK_THROWS_AS(cmd_train(Workspace(parse_config(small_gaussian("fresh"))), "all"), IoError);
}

TEST_CASE("oracle pipeline on a small gaussian problem") {
  auto j = small_gaussian("oracle");
  const Workspace ws(parse_config(j));
  cmd_gen(ws);
  CHECK_THROWS_AS(cmd_report(ws), CompatibilityError);
  cmd_train(ws, "all");
  CHECK_THROWS_AS(cmd_train(ws, "null-flow"), ConfigError);
  CHECK(fs::exists(ws.checkpoint_path("null-oracle")));

  cmd_sbc(ws, std::nullopt, {"l2"});
  const auto rep = io::read_json_file((ws.out() / "sbc" / "null-oracle_l2.json").string());
  CHECK(rep["p_value"].get<double>() > 0.01);
  CHECK(rep["case_count"] == 100);

  cmd_map(ws, std::nullopt, std::nullopt, true);
  const auto map = io::read_csv(ws.out() / "map" / "null-oracle_average.csv");
  REQUIRE(map.columns.size() == 3);
  for (Eigen::Index i = 0; i < map.rows.rows(); ++i)
    CHECK(std::abs(map.rows(i, 1) - map.rows(i, 2)) <= 0.05 * map.rows(i, 2) + 1e-12);
  CHECK_THROWS_AS(cmd_map(ws, std::nullopt, 0L, true), ConfigError);
  CHECK_THROWS_AS(cmd_map(ws, std::nullopt, 1000L, false), ConfigError);
  CHECK_THROWS_AS(cmd_sweep(ws, std::nullopt), ConfigError);

  cmd_report(ws);
  CHECK(report_column(ws.out() / "report.csv", 1) == std::vector<std::string>{"null-oracle"});

  const auto files = record_stages(ws, {{"gen", {"problem.json"}, 1.0}});
  const auto manifest = io::read_json_file((ws.out() / "manifest.json").string());
  CHECK(manifest["header"]["config_hash"] == io::config_hash(ws.canonical()));
  CHECK(!files.empty());
}

TEST_CASE("scaled oracle is detected as overconfident") {
  auto j = small_gaussian("scaled");
  j.erase("gaussian");
  j["data"] = {{"count", 600}, {"test_fraction", 0.5}};
  j["sbc"] = {{"cases", 300}, {"samples", 100}};
  j["oracle_scale"] = 0.5;
  const Workspace ws(parse_config(j));
  cmd_gen(ws);
  cmd_train(ws, "null");
  cmd_sbc(ws, std::nullopt, {"l2"});
  const auto rep = io::read_json_file((ws.out() / "sbc" / "null-oracle_l2.json").string());
  CHECK(rep["mean_normalized_rank"].get<double>() > 0.8);
}

TEST_CASE("report residuals do not depend on the null model") {
  auto j = small_gaussian("resid");
  j["null_models"] = {"oracle", "vae"};
  j["vae"] = {{"epochs", 1}};
  j["oracle_scale"] = 2.0;
  const Workspace ws(parse_config(j));
  cmd_gen(ws);
  cmd_train(ws, "all");
  cmd_report(ws);
  const auto labels = report_column(ws.out() / "report.csv", 1);
  const auto resid = report_column(ws.out() / "report.csv", 6);
  REQUIRE(labels.size() == 2);
  CHECK(std::abs(std::stod(resid[0]) - std::stod(resid[1])) <= 1e-8);
}
