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
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nullcal/calibration/sbc.hpp"

namespace nullcal::io {

/// Provenance written at the top of every output file.
struct OutputHeader {
  std::string what;        // short description of the file
  nlohmann::json config;   // canonical experiment config
  std::string config_hash;

  static OutputHeader make(std::string what, const nlohmann::json& config);
  OutputHeader with(std::string other) const { return {std::move(other), config, config_hash}; }
};

/// FNV-1a 64 over the bytes of s.
std::uint64_t fnv1a64(const std::string& s);
/// "fnv1a64:" followed by 16 hex digits of the compact dump.
std::string config_hash(const nlohmann::json& config);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

void ensure_parent_dir(const std::filesystem::path& path);

/// Header lines prefixed with '#', one header row of column names, then
/// one line per matrix row.
void write_csv(const std::filesystem::path& path, const OutputHeader& header, const std::vector<std::string>& columns,
               const Eigen::MatrixXd& rows);

/// Same layout with preformatted cells (for tables that mix labels and
/// numbers).
void write_csv(const std::filesystem::path& path, const OutputHeader& header, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

struct CsvTable {
  std::vector<std::string> columns;
  Eigen::MatrixXd rows;

  /// Column indices whose names start with prefix, in file order.
  std::vector<Eigen::Index> columns_with_prefix(const std::string& prefix) const;
  /// rows restricted to the given columns and transposed (one case per column).
  Eigen::MatrixXd block(const std::vector<Eigen::Index>& cols) const;
};

/// Skips '#' lines; every data row must have one numeric field per column.
CsvTable read_csv(const std::filesystem::path& path);

/// {"header": {...}, <body keys in body order>}.
void write_json_document(const std::filesystem::path& path, const OutputHeader& header, const nlohmann::json& body);

/// Rank histogram with the per-bin band and the uniform expectation.
void write_svg_histogram(const std::filesystem::path& path, const OutputHeader& header, const SbcReport& report);

struct Curve {
  std::string name;
  std::vector<double> x, y;
};

/// Polyline chart; log axes drop non-positive points.
void write_svg_curves(const std::filesystem::path& path, const OutputHeader& header, const std::string& title,
                      const std::string& x_label, const std::string& y_label, const std::vector<Curve>& curves,
                      bool log_axes);

/// Plain PGM (P2) of a row-major image, linearly scaled so the maximum
/// maps to 255. Comment lines follow the magic number.
void write_pgm(const std::filesystem::path& path, const OutputHeader& header, const Eigen::VectorXd& values,
               int width, int height);

}  // namespace nullcal::io
