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

#include "nullcal/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "nullcal/calibration/ambiguity.hpp"
#include "nullcal/calibration/sbc.hpp"
#include "nullcal/calibration/sweep.hpp"
#include "nullcal/error.hpp"
#include "nullcal/io/json_io.hpp"
#include "nullcal/models/cascade.hpp"
#include "nullcal/parallel.hpp"
#include "nullcal/synthetic/problems.hpp"

#ifndef NULLCAL_VERSION
#define NULLCAL_VERSION "0.0.0"
#endif

namespace nullcal::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string build_id() { return std::string("nullcal ") + NULLCAL_VERSION + " (" + __VERSION__ + ")"; }

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < n; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

std::string num(double v) { return io::format_double(v); }

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd x = a.array() - a.mean();
  const Eigen::VectorXd y = b.array() - b.mean();
  const double d = x.norm() * y.norm();
  return d > 0 ? x.dot(y) / d : 0.0;
}

struct MeanSe {
  double mean = 0, se = 0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return m;
}

void write_split(const Workspace& ws, const std::string& name, const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& beta,
                 const Eigen::MatrixXd& y, StageResult& result) {
  std::vector<std::string> cols = numbered("alpha_", alpha.rows());
  for (auto& c : numbered("beta_", beta.rows())) cols.push_back(c);
  for (auto& c : numbered("y_", y.rows())) cols.push_back(c);
  Eigen::MatrixXd rows(alpha.cols(), alpha.rows() + beta.rows() + y.rows());
  rows << alpha.transpose(), beta.transpose(), y.transpose();
  const auto path = ws.split_path(name);
  io::write_csv(path, ws.header(name + " split: one case per row"), cols, rows);
  result.files.push_back(ws.relative(path));
}

json sbc_to_json(const SbcReport& r) {
  return {{"statistic", r.statistic},
          {"samples", r.samples},
          {"case_count", r.case_count},
          {"bins", r.bins},
          {"band_level", r.band_level},
          {"ranks", r.ranks},
          {"normalized_ranks", r.normalized_ranks},
          {"histogram", r.histogram},
          {"bin_probability", r.bin_probability},
          {"band_lower", r.band_lower},
          {"band_upper", r.band_upper},
          {"bins_outside_band", r.bins_outside_band},
          {"mean_normalized_rank", r.mean_normalized_rank},
          {"chi_square", r.chi_square},
          {"dof", r.dof},
          {"p_value", r.p_value},
          {"ties", r.ties},
          {"comparisons", r.comparisons},
          {"tie_flag", r.tie_flag}};
}

struct NamedNull {
  std::string label;
  std::unique_ptr<NullModel> model;
};

std::vector<NamedNull> select_nulls(const Workspace& ws, const Problem& problem,
                                    const std::optional<std::string>& checkpoint) {
  std::vector<NamedNull> out;
  if (checkpoint) {
    out.push_back({fs::path(*checkpoint).stem().string(), load_null(ws, problem, *checkpoint)});
  } else {
    for (const auto& kind : ws.config().null_models) {
      const auto path = ws.checkpoint_path("null-" + kind);
      out.push_back({"null-" + kind, load_null(ws, problem, path)});
    }
  }
  for (const auto& n : out)
    if (n.model->cond_dim() != problem.r() || n.model->out_dim() != problem.q())
      throw CompatibilityError("checkpoint '" + n.label + "' has dims (" + std::to_string(n.model->cond_dim()) + ", " +
                               std::to_string(n.model->out_dim()) + ") but the problem has (r, q) = (" +
                               std::to_string(problem.r()) + ", " + std::to_string(problem.q()) + ")");
  return out;
}

Split require_test(const Workspace& ws) {
  Split test = load_split(ws, "test");
  if (test.size() == 0) throw ConfigError("data.test_fraction", "the test split is empty");
  return test;
}

void write_checkpoint(const Workspace& ws, const std::string& name, const json& checkpoint,
                      const TrainingHistory* history, StageResult& result) {
  const auto path = ws.checkpoint_path(name);
  io::write_json_document(path, ws.header(name + " checkpoint"), checkpoint);
  result.files.push_back(ws.relative(path));
  if (history && !history->empty()) {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(history->loss.size()), 2);
    for (std::size_t i = 0; i < history->loss.size(); ++i) {
      rows(static_cast<Eigen::Index>(i), 0) = static_cast<double>(history->step[i]);
      rows(static_cast<Eigen::Index>(i), 1) = history->loss[i];
    }
    const auto loss_path = ws.out() / "checkpoints" / (name + "_loss.csv");
    io::write_csv(loss_path, ws.header(name + " training loss"), {"step", "loss"}, rows);
    result.files.push_back(ws.relative(loss_path));
  }
}

template <typename Fn>
auto with_stage(const std::string& stage, Fn fn) {
  try {
    return fn();
  } catch (const TrainingDiverged& e) {
    std::string what = e.what();
    const auto suffix = " (step " + std::to_string(e.step()) + ")";
    if (what.size() >= suffix.size() && what.compare(what.size() - suffix.size(), suffix.size(), suffix) == 0)
      what.resize(what.size() - suffix.size());
    throw TrainingDiverged(stage + ": " + what, e.step());
  }
}

}  // namespace

Workspace::Workspace(ExperimentConfig config)
    : config_(std::move(config)), canonical_(to_json(config_)), out_(config_.output_dir) {}

std::string Workspace::relative(const fs::path& p) const { return p.lexically_relative(out_).generic_string(); }

Problem make_problem(const ExperimentConfig& config) {
  Problem p;
  const auto seed = stage_seed(config, Stage::problem);
  switch (config.experiment) {
    case ExperimentKind::gaussian: {
      GaussianConfig gc = config.gaussian;
      gc.seed = seed;
      p.spec = build_problem(gc);
      p.op = p.spec->embedded_operator();
      p.basis = p.spec->embedded_basis();
      break;
    }
    case ExperimentKind::fourier_toy: {
      FourierToyConfig fc = config.fourier;
      fc.seed = seed;
      auto toy = build_fourier_toy(fc);
      p.op = toy.op;
      p.basis = toy.basis;
      p.image_width = p.image_height = fc.side;
      break;
    }
    case ExperimentKind::patch_source: {
      PatchConfig pc = config.patch;
      pc.seed = seed;
      auto prob = build_patch_problem(pc);
      p.op = prob.op;
      p.basis = prob.basis;
      if (pc.geometry == SourceGeometry::grid)
        p.image_width = p.image_height = static_cast<int>(std::lround(std::sqrt(static_cast<double>(pc.n_sources))));
      break;
    }
  }
  return p;
}

Problem load_problem(const Workspace& ws) {
  const json j = io::read_json_file(ws.problem_path().string());
  if (!j.contains("header") || j["header"].value("config_hash", "") != io::config_hash(ws.canonical()))
    throw CompatibilityError("problem.json was generated from a different config; rerun gen");
  Problem p = make_problem(ws.config());
  const auto op = io::operator_from_json(j.at("operator"));
  if (op.matrix().rows() != p.op.matrix().rows() || op.matrix().cols() != p.op.matrix().cols())
    throw CompatibilityError("problem.json operator does not match the config");
  p.op = op;
  p.basis = io::basis_from_json(j.at("operator"));
  if (j.contains("gaussian_spec")) p.spec = io::gaussian_spec_from_json(j.at("gaussian_spec"));
  return p;
}

Split load_split(const Workspace& ws, const std::string& split) {
  const auto path = ws.split_path(split);
  if (!fs::exists(path)) throw CompatibilityError("missing dataset '" + path.string() + "'; run gen first");
  const auto table = io::read_csv(path);
  Split s;
  s.alpha = table.block(table.columns_with_prefix("alpha_"));
  s.beta = table.block(table.columns_with_prefix("beta_"));
  s.y = table.block(table.columns_with_prefix("y_"));
  return s;
}

std::unique_ptr<NullModel> load_null(const Workspace&, const Problem& problem, const fs::path& path) {
  if (!fs::exists(path)) throw CompatibilityError("missing checkpoint '" + path.string() + "'; run train first");
  const json j = io::read_json_file(path.string());
  return io::null_model_from_json(j, problem.spec ? &*problem.spec : nullptr);
}

std::unique_ptr<RangeModel> load_range(const fs::path& path) {
  if (!fs::exists(path)) throw CompatibilityError("missing checkpoint '" + path.string() + "'; run train first");
  return io::range_model_from_json(io::read_json_file(path.string()));
}

StageResult cmd_gen(const Workspace& ws) {
  Stopwatch clock;
  const auto& cfg = ws.config();
  StageResult result{"gen", {}, 0};
  const Problem problem = make_problem(cfg);
  const auto data_seed = stage_seed(cfg, Stage::data);
  const Eigen::Index count = cfg.data_count();

  json body;
  body["experiment"] = to_string(cfg.experiment);
  body["operator"] = io::operator_to_json(problem.op, problem.basis);
  Eigen::MatrixXd alpha, beta, y;
  switch (cfg.experiment) {
    case ExperimentKind::gaussian: {
      body["gaussian_spec"] = io::gaussian_spec_to_json(*problem.spec);
      const auto data = sample_joint(*problem.spec, count, data_seed);
      alpha = data.alpha;
      beta = data.beta;
      y = data.y;
      break;
    }
    case ExperimentKind::fourier_toy: {
      FourierToyConfig fc = cfg.fourier;
      fc.seed = stage_seed(cfg, Stage::problem);
      const auto toy = build_fourier_toy(fc);
      body["fourier"] = {{"mask", toy.mask}, {"kept", toy.kept}, {"kept_fraction", toy.kept_fraction()}};
      const Eigen::MatrixXd x = synth_images(fc.side, count, data_seed);
      const auto truth = make_ground_truth(problem.op, problem.basis, x, combine_stream(data_seed, 1));
      alpha = truth.alpha;
      beta = truth.beta;
      y = truth.y_noisy;
      const auto pgm = ws.out() / "data" / "test_image_0.pgm";
      const Eigen::Index first_test = count - cfg.test_count();
      if (first_test < count) {
        io::write_pgm(pgm, ws.header("first test phantom"), x.col(first_test), fc.side, fc.side);
      } else {
        io::write_pgm(pgm, ws.header("first phantom"), x.col(0), fc.side, fc.side);
      }
      result.files.push_back(ws.relative(pgm));
      break;
    }
    case ExperimentKind::patch_source: {
      PatchConfig pc = cfg.patch;
      pc.seed = stage_seed(cfg, Stage::problem);
      const auto prob = build_patch_problem(pc);
      body["patch"] = {{"units", "abstract geometry, spacing_mm per source index"}};
      const auto sample = sample_patch_sources(prob, count, data_seed);
      alpha = sample.truth.alpha;
      beta = sample.truth.beta;
      y = sample.truth.y_noisy;
      Eigen::MatrixXd meta(count, 3);
      for (Eigen::Index i = 0; i < count; ++i) {
        meta(i, 0) = static_cast<double>(i);
        meta(i, 1) = sample.patch_count[static_cast<std::size_t>(i)];
        meta(i, 2) = sample.noise_sigma[static_cast<std::size_t>(i)];
      }
      const auto meta_path = ws.out() / "data" / "patch_cases.csv";
      io::write_csv(meta_path, ws.header("patch case metadata"), {"case", "patch_count", "noise_sigma"}, meta);
      result.files.push_back(ws.relative(meta_path));
      break;
    }
  }
  io::write_json_document(ws.problem_path(), ws.header("problem"), body);
  result.files.insert(result.files.begin(), ws.relative(ws.problem_path()));

  const Eigen::Index n_train = cfg.train_count();
  const Eigen::Index n_test = count - n_train;
  write_split(ws, "train", alpha.leftCols(n_train), beta.leftCols(n_train), y.leftCols(n_train), result);
  write_split(ws, "test", alpha.rightCols(n_test), beta.rightCols(n_test), y.rightCols(n_test), result);
  result.seconds = clock.seconds();
  return result;
}

std::vector<StageResult> cmd_train(const Workspace& ws, const std::string& stage) {
  const auto& cfg = ws.config();
  std::vector<StageResult> results;
  auto want = [&](const std::string& s) {
    return stage == "all" || stage == s || (stage == "null" && s.rfind("null-", 0) == 0);
  };
  bool matched = false;
  std::optional<Problem> problem;
  std::optional<Split> train;
  auto need = [&] {
    if (!problem) problem = load_problem(ws);
    if (!train) train = load_split(ws, "train");
    if (train->size() == 0) throw ConfigError("data.count", "the training split is empty");
  };

  if (want("range")) {
    matched = true;
    need();
    Stopwatch clock;
    StageResult r{"train:range", {}, 0};
    for (std::size_t k = 0; k < cfg.range_models.size(); ++k) {
      RangeConfig rc = cfg.range;
      rc.kind = cfg.range_models[k];
      rc.seed = combine_stream(stage_seed(cfg, Stage::range), k);
      TrainingHistory h;
      auto model = with_stage("train:range-" + rc.kind, [&] { return train_range(train->y, train->alpha, rc, &h); });
      write_checkpoint(ws, "range-" + rc.kind, model->checkpoint(), &h, r);
    }
    r.seconds = clock.seconds();
    results.push_back(std::move(r));
  }
  for (const auto& kind : cfg.null_models) {
    const std::string name = "null-" + kind;
    if (!want(name)) continue;
    matched = true;
    need();
    Stopwatch clock;
    StageResult r{"train:" + name, {}, 0};
    TrainingHistory h;
    if (kind == "ddpm") {
      DdpmConfig dc = cfg.ddpm;
      dc.seed = stage_seed(cfg, Stage::ddpm);
      auto m = with_stage("train:" + name, [&] { return train_null_ddpm(train->alpha, train->beta, dc, &h); });
      write_checkpoint(ws, name, m.checkpoint(), &h, r);
    } else if (kind == "vae") {
      VaeConfig vc = cfg.vae;
      vc.seed = stage_seed(cfg, Stage::vae);
      auto m = with_stage("train:" + name, [&] { return train_null_vae(train->alpha, train->beta, vc, &h); });
      write_checkpoint(ws, name, m.checkpoint(), &h, r);
    } else {
      if (!problem->spec) throw ConfigError("null_models", "the oracle needs the gaussian experiment");
      write_checkpoint(ws, name, OracleNullModel(*problem->spec, cfg.oracle_scale).checkpoint(), nullptr, r);
    }
    r.seconds = clock.seconds();
    results.push_back(std::move(r));
  }
  if (!matched)
    throw ConfigError("--stage", "'" + stage + "' matches no configured model (range, null, null-<kind> or all)");
  return results;
}

StageResult cmd_sbc(const Workspace& ws, const std::optional<std::string>& checkpoint,
                    const std::vector<std::string>& statistics) {
  Stopwatch clock;
  const auto& cfg = ws.config();
  StageResult result{"sbc", {}, 0};
  const Problem problem = load_problem(ws);
  const Split test = require_test(ws);
  const auto nulls = select_nulls(ws, problem, checkpoint);
  std::vector<TestStatistic> stats;
  for (const auto& s : statistics.empty() ? cfg.sbc.statistics : statistics) {
    try {
      stats.push_back(TestStatistic::parse(s));
    } catch (const InvalidConfig& e) {
      throw ConfigError("--stat", e.what());
    }
  }
  const Eigen::Index cases = std::min<Eigen::Index>(cfg.sbc.cases, test.size());
  SbcOptions opt;
  opt.samples = cfg.sbc.samples;
  opt.bins = cfg.sbc.bins;
  opt.band_level = cfg.sbc.band_level;
  opt.seed = stage_seed(cfg, Stage::sbc);

  std::vector<std::vector<std::string>> summary;
  const fs::path dir = ws.out() / "sbc";
  for (const auto& n : nulls) {
    const auto reports = sbc_run(*n.model, test.alpha.leftCols(cases), test.beta.leftCols(cases), stats, opt);
    for (const auto& rep : reports) {
      const std::string base = n.label + "_" + rep.statistic;
      const auto json_path = dir / (base + ".json");
      io::write_json_document(json_path, ws.header("sbc report " + base), sbc_to_json(rep));

      Eigen::MatrixXd ranks(static_cast<Eigen::Index>(rep.ranks.size()), 3);
      for (std::size_t i = 0; i < rep.ranks.size(); ++i)
        ranks.row(static_cast<Eigen::Index>(i)) << static_cast<double>(i), static_cast<double>(rep.ranks[i]),
            rep.normalized_ranks[i];
      const auto ranks_path = dir / (base + "_ranks.csv");
      io::write_csv(ranks_path, ws.header("sbc ranks " + base), {"case", "rank", "normalized_rank"}, ranks);

      Eigen::MatrixXd hist(rep.bins, 7);
      for (int b = 0; b < rep.bins; ++b)
        hist.row(b) << b, static_cast<double>(b) / rep.bins, static_cast<double>(b + 1) / rep.bins,
            static_cast<double>(rep.histogram[b]), rep.bin_probability[b] * static_cast<double>(rep.case_count),
            static_cast<double>(rep.band_lower[b]), static_cast<double>(rep.band_upper[b]);
      const auto hist_path = dir / (base + "_hist.csv");
      io::write_csv(hist_path, ws.header("sbc histogram " + base),
                    {"bin", "lower_edge", "upper_edge", "count", "expected", "band_lower", "band_upper"}, hist);

      const auto svg_path = dir / (base + ".svg");
      io::write_svg_histogram(svg_path, ws.header("sbc histogram " + base), rep);
      for (const auto& p : {json_path, ranks_path, hist_path, svg_path}) result.files.push_back(ws.relative(p));
      summary.push_back({n.label, rep.statistic, std::to_string(rep.case_count), std::to_string(rep.samples),
                         num(rep.mean_normalized_rank), num(rep.chi_square), num(rep.p_value),
                         std::to_string(rep.bins_outside_band), rep.tie_flag ? "1" : "0"});
    }
  }
  const auto summary_path = dir / "summary.csv";
  io::write_csv(summary_path, ws.header("sbc summary"),
                {"model", "statistic", "cases", "samples", "mean_normalized_rank", "chi_square", "p_value",
                 "bins_outside_band", "tie_flag"},
                summary);
  result.files.push_back(ws.relative(summary_path));
  result.seconds = clock.seconds();
  return result;
}

StageResult cmd_map(const Workspace& ws, const std::optional<std::string>& checkpoint,
                    const std::optional<long>& case_index, bool average) {
  Stopwatch clock;
  const auto& cfg = ws.config();
  if (case_index && average) throw ConfigError("--case", "use either --case or --average");
  StageResult result{"map", {}, 0};
  const Problem problem = load_problem(ws);
  const Split test = require_test(ws);
  const auto nulls = select_nulls(ws, problem, checkpoint);
  const long index = case_index.value_or(0);
  if (!average && (index < 0 || index >= test.size()))
    throw ConfigError("--case", "case index " + std::to_string(index) + " is outside the test split (size " +
                                    std::to_string(test.size()) + ")");
  const auto seed = stage_seed(cfg, Stage::map);

  Eigen::VectorXd analytic;
  if (problem.spec) analytic = null_variance_diagonal(problem.basis.v_null(), problem.spec->sigma_eta);

  for (const auto& n : nulls) {
    AmbiguityMap map;
    std::string tag;
    if (average) {
      const Eigen::Index cases = std::min<Eigen::Index>(cfg.map.cases, test.size());
      map = ambiguity_map_average(*n.model, test.alpha.leftCols(cases), problem.basis, cfg.map.samples, seed);
      tag = "average";
    } else {
      map = ambiguity_map(*n.model, test.alpha.col(index), problem.basis, cfg.map.samples, case_seed(seed, index));
      tag = "case" + std::to_string(index);
    }
    const std::string base = n.label + "_" + tag;
    const auto p = map.variance.size();
    const bool with_analytic = analytic.size() == p;
    Eigen::MatrixXd rows(p, with_analytic ? 3 : 2);
    for (Eigen::Index i = 0; i < p; ++i) {
      rows(i, 0) = static_cast<double>(i);
      rows(i, 1) = map.variance[i];
      if (with_analytic) rows(i, 2) = analytic[i];
    }
    std::vector<std::string> cols{"index", "variance"};
    if (with_analytic) cols.push_back("analytic");
    const auto csv_path = ws.out() / "map" / (base + ".csv");
    io::write_csv(csv_path, ws.header("ambiguity map " + base + " (" + map.conditioning + ", K=" +
                                      std::to_string(map.samples) + ")"),
                  cols, rows);
    result.files.push_back(ws.relative(csv_path));
    if (problem.image_width > 0) {
      const auto pgm_path = ws.out() / "map" / (base + ".pgm");
      io::write_pgm(pgm_path, ws.header("ambiguity map " + base), map.variance, problem.image_width,
                    problem.image_height);
      result.files.push_back(ws.relative(pgm_path));
    }
  }
  result.seconds = clock.seconds();
  return result;
}

StageResult cmd_sweep(const Workspace& ws, const std::optional<std::string>& checkpoint) {
  Stopwatch clock;
  const auto& cfg = ws.config();
  if (cfg.experiment != ExperimentKind::fourier_toy)
    throw ConfigError("experiment", "sweep needs the fourier-toy experiment");
  StageResult result{"sweep", {}, 0};
  const Problem problem = load_problem(ws);
  const Split test = require_test(ws);
  const auto nulls = select_nulls(ws, problem, checkpoint);
  const Eigen::Index cases = std::min<Eigen::Index>(cfg.sweep.cases, test.size());
  const Eigen::MatrixXd alpha = test.alpha.leftCols(cases);
  const auto seed = stage_seed(cfg, Stage::sweep);

  NoiseSweepOptions so;
  so.sigmas = cfg.sweep.sigmas;
  so.samples = cfg.sweep.samples;
  so.noise_pairs = cfg.sweep.noise_pairs;
  so.intrinsic_samples = cfg.sweep.intrinsic_samples;
  so.seed = combine_stream(seed, 1);
  BoundCheckOptions bo;
  bo.probes = cfg.sweep.probes;
  bo.mean_samples = cfg.sweep.mean_samples;
  bo.jacobian_step = cfg.sweep.jacobian_step;
  bo.seed = combine_stream(seed, 2);

  const fs::path dir = ws.out() / "sweep";
  for (const auto& n : nulls) {
    const auto rows = noise_sweep(*n.model, problem.op, problem.basis, alpha, so);
    const Eigen::Index bound_cases = std::min<Eigen::Index>(cfg.sweep.bound_cases, cases);
    const auto bounds = propagated_bound_check(*n.model, problem.op, problem.basis, alpha.leftCols(bound_cases),
                                               cfg.sweep.sigmas, bo);

    Eigen::MatrixXd table(static_cast<Eigen::Index>(rows.size()), 8);
    std::vector<double> s_pos, prop_pos;
    io::Curve intrinsic{"intrinsic", {}, {}}, total{"total", {}, {}}, propagated{"total - intrinsic(0)", {}, {}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      table.row(static_cast<Eigen::Index>(i)) << r.sigma, r.intrinsic, r.intrinsic_se, r.intrinsic_shift_se, r.total,
          r.total_se, r.propagated, r.propagated_se;
      intrinsic.x.push_back(r.sigma);
      intrinsic.y.push_back(r.intrinsic);
      total.x.push_back(r.sigma);
      total.y.push_back(r.total);
      propagated.x.push_back(r.sigma);
      propagated.y.push_back(r.propagated);
      if (r.sigma > 0) {
        s_pos.push_back(r.sigma);
        prop_pos.push_back(r.propagated);
      }
    }
    const auto csv_path = dir / (n.label + "_sweep.csv");
    io::write_csv(csv_path, ws.header("noise sweep " + n.label + " (" + std::to_string(cases) + " cases)"),
                  {"sigma", "intrinsic", "intrinsic_se", "intrinsic_shift_se", "total", "total_se", "propagated",
                   "propagated_se"},
                  table);

    Eigen::MatrixXd btable(static_cast<Eigen::Index>(bounds.size()), 8);
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      const auto& b = bounds[i];
      btable.row(static_cast<Eigen::Index>(i)) << b.sigma, b.lipschitz_estimate, b.lipschitz_jacobian,
          b.lipschitz_pairs, b.lhs, b.rhs, b.mc_floor, b.rhs > 0 ? b.lhs / b.rhs : 0.0;
    }
    const auto bound_path = dir / (n.label + "_bound.csv");
    io::write_csv(bound_path,
                  ws.header("propagated-uncertainty bound " + n.label + " (" + std::to_string(bound_cases) + " cases)"),
                  {"sigma", "lipschitz", "lipschitz_jacobian", "lipschitz_pairs", "lhs", "rhs", "mc_floor",
                   "lhs_over_rhs"},
                  btable);

    json summary;
    summary["cases"] = cases;
    summary["bound_cases"] = bound_cases;
    summary["propagated_loglog_slope"] = s_pos.size() >= 2 ? loglog_slope(s_pos, prop_pos) : 0.0;
    json jr = json::array();
    for (const auto& r : rows)
      jr.push_back({{"sigma", r.sigma},
                    {"intrinsic", r.intrinsic},
                    {"intrinsic_se", r.intrinsic_se},
                    {"intrinsic_shift_se", r.intrinsic_shift_se},
                    {"total", r.total},
                    {"total_se", r.total_se},
                    {"propagated", r.propagated},
                    {"propagated_se", r.propagated_se}});
    summary["rows"] = jr;
    json jb = json::array();
    for (const auto& b : bounds)
      jb.push_back({{"sigma", b.sigma},
                    {"lipschitz", b.lipschitz_estimate},
                    {"lhs", b.lhs},
                    {"rhs", b.rhs},
                    {"mc_floor", b.mc_floor}});
    summary["bound"] = jb;
    const auto json_path = dir / (n.label + "_sweep.json");
    io::write_json_document(json_path, ws.header("noise sweep summary " + n.label), summary);

    const auto svg_path = dir / (n.label + "_sweep.svg");
    io::write_svg_curves(svg_path, ws.header("noise sweep " + n.label), "null-space variance vs noise level",
                         "sigma", "mean per-pixel variance", {intrinsic, total, propagated}, false);
    for (const auto& p : {csv_path, bound_path, json_path, svg_path}) result.files.push_back(ws.relative(p));
  }
  result.seconds = clock.seconds();
  return result;
}

StageResult cmd_report(const Workspace& ws) {
  Stopwatch clock;
  const auto& cfg = ws.config();
  StageResult result{"report", {}, 0};
  const Problem problem = load_problem(ws);
  const Split test = require_test(ws);
  const auto nulls = select_nulls(ws, problem, std::nullopt);
  const Eigen::Index cases = std::min<Eigen::Index>(cfg.report.cases, test.size());
  const Eigen::MatrixXd x = problem.basis.v_range() * test.alpha + problem.basis.v_null() * test.beta;
  const auto seed = stage_seed(cfg, Stage::report);

  std::vector<std::vector<std::string>> rows;
  for (const auto& kind : cfg.range_models) {
    const auto range = load_range(ws.checkpoint_path("range-" + kind));
    if (range->in_dim() != test.y.rows() || range->out_dim() != problem.r())
      throw CompatibilityError("range checkpoint 'range-" + kind + "' does not match the problem");
    for (const auto& n : nulls) {
      std::vector<double> corr(static_cast<std::size_t>(cases)), resid(static_cast<std::size_t>(cases));
      parallel_for(static_cast<std::size_t>(cases), [&](std::size_t i) {
        const auto k = static_cast<Eigen::Index>(i);
        const Eigen::VectorXd y = test.y.col(k);
        const auto cs = cascade_sample(*range, *n.model, problem.basis, y, cfg.report.samples, case_seed(seed, k));
        corr[i] = pearson(cs.mean, x.col(k));
        const double ny = y.norm();
        resid[i] = ny > 0 ? (y - problem.op.matrix() * cs.mean).norm() / ny : 0.0;
      });
      const auto c = mean_se(corr), r = mean_se(resid);
      rows.push_back({"range-" + kind, n.label, std::to_string(cases), std::to_string(cfg.report.samples), num(c.mean),
                      num(c.se), num(r.mean), num(r.se)});
    }
  }
  const auto path = ws.out() / "report.csv";
  io::write_csv(path, ws.header("range x null report on the test split"),
                {"range", "null", "cases", "samples", "correlation_mean", "correlation_se", "residual_mean",
                 "residual_se"},
                rows);
  result.files.push_back(ws.relative(path));
  result.seconds = clock.seconds();
  return result;
}

std::vector<StageResult> cmd_run_all(const Workspace& ws) {
  std::vector<StageResult> all;
  all.push_back(cmd_gen(ws));
  for (auto& r : cmd_train(ws, "all")) all.push_back(std::move(r));
  all.push_back(cmd_sbc(ws, std::nullopt, {}));
  all.push_back(cmd_map(ws, std::nullopt, std::nullopt, true));
  if (ws.config().experiment == ExperimentKind::fourier_toy) all.push_back(cmd_sweep(ws, std::nullopt));
  all.push_back(cmd_report(ws));
  return all;
}

std::vector<std::string> record_stages(const Workspace& ws, const std::vector<StageResult>& stages) {
  const auto manifest_path = ws.out() / "manifest.json";
  const auto timings_path = ws.out() / "timings.json";
  json files = json::object(), seconds = json::object();
  auto load = [&](const fs::path& p, const char* key, json& into) {
    if (!fs::exists(p)) return;
    try {
      const json j = io::read_json_file(p.string());
      if (j.contains("header") && j["header"].value("config_hash", "") == io::config_hash(ws.canonical()) &&
          j.contains(key))
        into = j[key];
    } catch (const Error&) {
      // A stale or unreadable manifest is replaced.
    }
  };
  load(manifest_path, "stages", files);
  load(timings_path, "seconds", seconds);
  for (const auto& s : stages) {
    files[s.stage] = s.files;
    seconds[s.stage] = s.seconds;
  }
  for (const auto& [stage, list] : files.items())
    for (const auto& f : list)
      if (!fs::exists(ws.out() / f.get<std::string>()))
        throw IoError("manifest lists '" + f.get<std::string>() + "' but it does not exist");
  io::write_json_document(manifest_path, ws.header("run manifest"),
                          {{"config_hash", io::config_hash(ws.canonical())}, {"build_id", build_id()}, {"stages", files}});
  io::write_json_document(timings_path, ws.header("wall-clock seconds per stage"), {{"seconds", seconds}});
  return {ws.relative(manifest_path), ws.relative(timings_path)};
}

}  // namespace nullcal::cli
