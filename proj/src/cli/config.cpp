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

#include "nullcal/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "nullcal/calibration/statistic.hpp"
#include "nullcal/error.hpp"
#include "nullcal/io/config_reader.hpp"
#include "nullcal/io/json_io.hpp"
#include "nullcal/rng.hpp"

namespace nullcal::cli {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::gaussian:
      return "gaussian";
    case ExperimentKind::fourier_toy:
      return "fourier-toy";
    case ExperimentKind::patch_source:
      return "patch-source";
  }
  return "gaussian";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "gaussian") return ExperimentKind::gaussian;
  if (name == "fourier-toy") return ExperimentKind::fourier_toy;
  if (name == "patch-source") return ExperimentKind::patch_source;
  throw InvalidConfig("unknown experiment '" + name + "' (expected gaussian, fourier-toy or patch-source)");
}

long ExperimentConfig::data_count() const {
  if (data.count > 0) return data.count;
  switch (experiment) {
    case ExperimentKind::gaussian:
      return 100000;
    case ExperimentKind::fourier_toy:
      return 4000;
    case ExperimentKind::patch_source:
      return 20000;
  }
  return 0;
}

long ExperimentConfig::test_count() const {
  return static_cast<long>(std::floor(static_cast<double>(data_count()) * data.test_fraction));
}

std::uint64_t stage_seed(const ExperimentConfig& config, Stage stage) {
  return combine_stream(config.seed, static_cast<std::uint64_t>(stage));
}

namespace {

json strip(json j, std::initializer_list<const char*> keys) {
  for (const char* k : keys) j.erase(k);
  return j;
}

void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

// Sub-configs shared with the library carry their own seed field; the CLI
// owns seeding, so those keys are refused here.
json section(io::ObjectReader& r, const char* key, std::initializer_list<const char*> refused) {
  const json* j = r.child(key);
  if (!j) return json::object();
  if (!j->is_object()) throw ConfigError(r.path_of(key), "expected an object");
  for (const char* k : refused)
    if (j->contains(k))
      throw ConfigError(r.path_of(key) + "." + k,
                        std::string(k) == "seed" ? "stage seeds derive from the top-level seed" : "not settable here");
  return *j;
}

template <typename Parse>
auto wrap(const std::string& path, Parse parse) {
  try {
    return parse();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidConfig& e) {
    throw ConfigError(path, e.what());
  }
}

FourierToyConfig fourier_from_json(const json& j, const std::string& path) {
  FourierToyConfig c;
  io::ObjectReader r(j, path);
  r.get("side", c.side);
  r.get("keep_fraction", c.keep_fraction);
  std::string mask = to_string(c.mask);
  r.get("mask", mask);
  c.mask = wrap(r.path_of("mask"), [&] { return mask_kind_from_string(mask); });
  r.get("k_sigma", c.k_sigma);
  r.finish();
  return c;
}

PatchConfig patch_from_json(const json& j, const std::string& path) {
  PatchConfig c;
  io::ObjectReader r(j, path);
  r.get("n_sensors", c.n_sensors);
  r.get("n_sources", c.n_sources);
  std::string lf = to_string(c.leadfield);
  r.get("leadfield", lf);
  c.leadfield = wrap(r.path_of("leadfield"), [&] { return leadfield_kind_from_string(lf); });
  std::string geom = to_string(c.geometry);
  r.get("geometry", geom);
  c.geometry = wrap(r.path_of("geometry"), [&] { return source_geometry_from_string(geom); });
  r.get("spacing_mm", c.spacing_mm);
  r.get("smoothing_radius", c.smoothing_radius);
  r.get("width_min_mm", c.width_min_mm);
  r.get("width_max_mm", c.width_max_mm);
  r.get("amp_min", c.amp_min);
  r.get("amp_max", c.amp_max);
  r.get("flip_prob", c.flip_prob);
  r.get("patch_counts", c.patch_counts);
  r.get("snr", c.snr);
  r.finish();
  return c;
}

void check_names(const std::vector<std::string>& names, const std::set<std::string>& allowed,
                 const std::string& path) {
  check(!names.empty(), path, "must not be empty");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto p = path + "[" + std::to_string(i) + "]";
    check(allowed.count(names[i]) > 0, p, "unknown model '" + names[i] + "'");
    check(seen.insert(names[i]).second, p, "duplicate model '" + names[i] + "'");
  }
}

}  // namespace

json to_json(const FourierToyConfig& c) {
  return {{"side", c.side}, {"keep_fraction", c.keep_fraction}, {"mask", to_string(c.mask)}, {"k_sigma", c.k_sigma}};
}

json to_json(const PatchConfig& c) {
  return {{"n_sensors", c.n_sensors},       {"n_sources", c.n_sources},
          {"leadfield", to_string(c.leadfield)}, {"geometry", to_string(c.geometry)},
          {"spacing_mm", c.spacing_mm},     {"smoothing_radius", c.smoothing_radius},
          {"width_min_mm", c.width_min_mm}, {"width_max_mm", c.width_max_mm},
          {"amp_min", c.amp_min},           {"amp_max", c.amp_max},
          {"flip_prob", c.flip_prob},       {"patch_counts", c.patch_counts},
          {"snr", c.snr}};
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["data"] = {{"count", c.data_count()}, {"test_fraction", c.data.test_fraction}};
  j["gaussian"] = strip(io::to_json(c.gaussian), {"seed"});
  j["fourier"] = to_json(c.fourier);
  j["patch"] = to_json(c.patch);
  j["range_models"] = c.range_models;
  j["range"] = strip(io::to_json(c.range), {"seed", "kind"});
  j["null_models"] = c.null_models;
  j["ddpm"] = strip(io::to_json(c.ddpm), {"seed"});
  j["vae"] = strip(io::to_json(c.vae), {"seed"});
  j["oracle_scale"] = c.oracle_scale;
  j["sbc"] = {{"samples", c.sbc.samples},
              {"cases", c.sbc.cases},
              {"bins", c.sbc.bins},
              {"band_level", c.sbc.band_level},
              {"statistics", c.sbc.statistics}};
  j["map"] = {{"samples", c.map.samples}, {"cases", c.map.cases}};
  j["sweep"] = {{"sigmas", c.sweep.sigmas},
                {"cases", c.sweep.cases},
                {"samples", c.sweep.samples},
                {"noise_pairs", c.sweep.noise_pairs},
                {"intrinsic_samples", c.sweep.intrinsic_samples},
                {"bound_cases", c.sweep.bound_cases},
                {"probes", c.sweep.probes},
                {"mean_samples", c.sweep.mean_samples},
                {"jacobian_step", c.sweep.jacobian_step}};
  j["report"] = {{"samples", c.report.samples}, {"cases", c.report.cases}};
  return j;
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  io::ObjectReader r(j, "");
  std::string kind = to_string(c.experiment);
  r.get("experiment", kind);
  c.experiment = wrap("experiment", [&] { return experiment_kind_from_string(kind); });
  r.get("seed", c.seed);
  r.get("output_dir", c.output_dir);
  check(!c.output_dir.empty(), "output_dir", "must not be empty");

  if (const json* d = r.child("data")) {
    io::ObjectReader dr(*d, "data");
    dr.get("count", c.data.count);
    dr.get("test_fraction", c.data.test_fraction);
    dr.finish();
    check(c.data.count >= 0, "data.count", "must be >= 1 (or 0 for the experiment default)");
    check(c.data.test_fraction >= 0 && c.data.test_fraction < 1, "data.test_fraction", "must lie in [0, 1)");
  }

  c.gaussian = io::gaussian_config_from_json(section(r, "gaussian", {"seed"}), "gaussian");
  c.fourier = fourier_from_json(section(r, "fourier", {}), "fourier");
  c.patch = patch_from_json(section(r, "patch", {}), "patch");
  r.get("range_models", c.range_models);
  c.range = io::range_config_from_json(section(r, "range", {"seed", "kind"}), "range");
  r.get("null_models", c.null_models);
  c.ddpm = io::ddpm_config_from_json(section(r, "ddpm", {"seed"}), "ddpm");
  c.vae = io::vae_config_from_json(section(r, "vae", {"seed"}), "vae");
  r.get("oracle_scale", c.oracle_scale);

  if (const json* s = r.child("sbc")) {
    io::ObjectReader sr(*s, "sbc");
    sr.get("samples", c.sbc.samples);
    sr.get("cases", c.sbc.cases);
    sr.get("bins", c.sbc.bins);
    sr.get("band_level", c.sbc.band_level);
    sr.get("statistics", c.sbc.statistics);
    sr.finish();
  }
  if (const json* s = r.child("map")) {
    io::ObjectReader sr(*s, "map");
    sr.get("samples", c.map.samples);
    sr.get("cases", c.map.cases);
    sr.finish();
  }
  if (const json* s = r.child("sweep")) {
    io::ObjectReader sr(*s, "sweep");
    sr.get("sigmas", c.sweep.sigmas);
    sr.get("cases", c.sweep.cases);
    sr.get("samples", c.sweep.samples);
    sr.get("noise_pairs", c.sweep.noise_pairs);
    sr.get("intrinsic_samples", c.sweep.intrinsic_samples);
    sr.get("bound_cases", c.sweep.bound_cases);
    sr.get("probes", c.sweep.probes);
    sr.get("mean_samples", c.sweep.mean_samples);
    sr.get("jacobian_step", c.sweep.jacobian_step);
    sr.finish();
  }
  if (const json* s = r.child("report")) {
    io::ObjectReader sr(*s, "report");
    sr.get("samples", c.report.samples);
    sr.get("cases", c.report.cases);
    sr.finish();
  }
  r.finish();

  check_names(c.range_models, {"mlp", "ridge"}, "range_models");
  check_names(c.null_models, {"ddpm", "vae", "oracle"}, "null_models");
  if (c.experiment != ExperimentKind::gaussian &&
      std::find(c.null_models.begin(), c.null_models.end(), "oracle") != c.null_models.end())
    throw ConfigError("null_models", "the oracle null model exists only for the gaussian experiment");
  check(c.oracle_scale >= 0, "oracle_scale", "must be >= 0");
  check(c.sbc.samples >= 1, "sbc.samples", "must be >= 1");
  check(c.sbc.cases >= 1, "sbc.cases", "must be >= 1");
  check(c.sbc.bins >= 1, "sbc.bins", "must be >= 1");
  check(c.sbc.band_level > 0 && c.sbc.band_level < 1, "sbc.band_level", "must lie in (0, 1)");
  check(!c.sbc.statistics.empty(), "sbc.statistics", "must not be empty");
  for (std::size_t i = 0; i < c.sbc.statistics.size(); ++i)
    wrap("sbc.statistics[" + std::to_string(i) + "]", [&] { return TestStatistic::parse(c.sbc.statistics[i]); });
  check(c.map.samples >= 2, "map.samples", "must be >= 2");
  check(c.map.cases >= 1, "map.cases", "must be >= 1");
  check(!c.sweep.sigmas.empty(), "sweep.sigmas", "must not be empty");
  for (std::size_t i = 0; i < c.sweep.sigmas.size(); ++i)
    check(c.sweep.sigmas[i] >= 0, "sweep.sigmas[" + std::to_string(i) + "]", "must be >= 0");
  check(c.sweep.cases >= 1, "sweep.cases", "must be >= 1");
  check(c.sweep.samples >= 2, "sweep.samples", "must be >= 2");
  check(c.sweep.noise_pairs >= 1, "sweep.noise_pairs", "must be >= 1");
  check(c.sweep.intrinsic_samples >= 2, "sweep.intrinsic_samples", "must be >= 2");
  check(c.sweep.bound_cases >= 1, "sweep.bound_cases", "must be >= 1");
  check(c.sweep.probes >= 10, "sweep.probes", "must be >= 10");
  check(c.sweep.mean_samples >= 2, "sweep.mean_samples", "must be >= 2");
  check(c.sweep.jacobian_step > 0, "sweep.jacobian_step", "must be > 0");
  check(c.report.samples >= 1, "report.samples", "must be >= 1");
  check(c.report.cases >= 1, "report.cases", "must be >= 1");
  return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(io::read_json_file(path)); }

}  // namespace nullcal::cli
