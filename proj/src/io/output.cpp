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

#include "nullcal/io/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nullcal/error.hpp"
#include "nullcal/io/json_io.hpp"

namespace nullcal::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// "--" may not appear inside an XML comment.
std::string comment_safe(std::string s) {
  for (std::size_t pos; (pos = s.find("--")) != std::string::npos;) s.replace(pos, 2, "- -");
  return s;
}

std::vector<std::string> header_lines(const OutputHeader& h) {
  return {"nullcal " + h.what, "format_version: " + std::to_string(kFormatVersion),
          "config_hash: " + h.config_hash, "config: " + h.config.dump()};
}

std::string svg_comment(const OutputHeader& h) {
  std::string s = "<!--\n";
  for (const auto& line : header_lines(h)) s += comment_safe(line) + "\n";
  return s + "-->\n";
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace

OutputHeader OutputHeader::make(std::string what, const nlohmann::json& config) {
  return {std::move(what), config, io::config_hash(config)};
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const nlohmann::json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
  return std::string("fnv1a64:") + buf;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void ensure_parent_dir(const std::filesystem::path& path) {
  const auto parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory '" + parent.string() + "': " + ec.message());
}

void write_csv(const std::filesystem::path& path, const OutputHeader& header, const std::vector<std::string>& columns,
               const Eigen::MatrixXd& rows) {
  require_dims(rows.cols() == static_cast<Eigen::Index>(columns.size()) || rows.rows() == 0,
               "write_csv: column count mismatch");
  auto out = open_out(path);
  for (const auto& line : header_lines(header)) out << "# " << line << '\n';
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  std::string line;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      if (j) line += ',';
      line += format_double(rows(i, j));
    }
    out << line << '\n';
  }
  finish(out, path);
}

void write_csv(const std::filesystem::path& path, const OutputHeader& header, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
  auto out = open_out(path);
  for (const auto& line : header_lines(header)) out << "# " << line << '\n';
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    require_dims(row.size() == columns.size(), "write_csv: column count mismatch");
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
  finish(out, path);
}

std::vector<Eigen::Index> CsvTable::columns_with_prefix(const std::string& prefix) const {
  std::vector<Eigen::Index> idx;
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (columns[c].rfind(prefix, 0) == 0) idx.push_back(static_cast<Eigen::Index>(c));
  return idx;
}

Eigen::MatrixXd CsvTable::block(const std::vector<Eigen::Index>& cols) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(cols.size()), rows.rows());
  for (std::size_t k = 0; k < cols.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = rows.col(cols[k]).transpose();
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  CsvTable table;
  std::string line;
  bool have_header = false;
  std::vector<double> values;
  Eigen::Index n_rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      std::stringstream ss(line);
      for (std::string name; std::getline(ss, name, ',');) table.columns.push_back(name);
      have_header = true;
      continue;
    }
    std::size_t fields = 0;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      double v = 0;
      const auto res = std::from_chars(p, comma, v);
      if (res.ec != std::errc() || res.ptr != comma)
        throw IoError("'" + path.string() + "': bad number in data row " + std::to_string(n_rows + 1));
      values.push_back(v);
      ++fields;
      p = comma + 1;
    }
    if (fields != table.columns.size())
      throw IoError("'" + path.string() + "': wrong field count in data row " + std::to_string(n_rows + 1));
    ++n_rows;
  }
  if (!have_header) throw IoError("'" + path.string() + "': missing column header");
  const auto n_cols = static_cast<Eigen::Index>(table.columns.size());
  table.rows = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(),
                                                                                                 n_rows, n_cols);
  return table;
}

void write_json_document(const std::filesystem::path& path, const OutputHeader& header, const nlohmann::json& body) {
  nlohmann::ordered_json doc;
  doc["header"] = {{"what", header.what},
                   {"format_version", kFormatVersion},
                   {"config_hash", header.config_hash},
                   {"config", nlohmann::ordered_json::parse(header.config.dump())}};
  const auto ordered = nlohmann::ordered_json::parse(body.dump());
  if (ordered.is_object()) {
    for (const auto& [k, v] : ordered.items()) doc[k] = v;
  } else {
    doc["body"] = ordered;
  }
  auto out = open_out(path);
  out << doc.dump(1) << '\n';
  finish(out, path);
}

void write_svg_histogram(const std::filesystem::path& path, const OutputHeader& header, const SbcReport& r) {
  const double W = 640, H = 400, left = 60, right = 20, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  const int B = r.bins;
  long ymax = 1;
  for (int b = 0; b < B; ++b) ymax = std::max({ymax, r.histogram[b], r.band_upper[b]});
  const double yscale = ph / (1.1 * static_cast<double>(ymax));
  const double bw = pw / B;
  auto Y = [&](double v) { return top + ph - v * yscale; };

  std::ostringstream s;
  s << svg_comment(header);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\">\n";
  nlohmann::ordered_json meta;
  meta["statistic"] = r.statistic;
  meta["histogram"] = r.histogram;
  meta["band_lower"] = r.band_lower;
  meta["band_upper"] = r.band_upper;
  meta["p_value"] = r.p_value;
  s << "<metadata>" << xml_escape(meta.dump()) << "</metadata>\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
    << xml_escape("rank histogram: " + r.statistic + " (N=" + std::to_string(r.case_count) +
                  ", L=" + std::to_string(r.samples) + ", p=" + fmt(r.p_value, 3) + ")")
    << "</text>\n";
  for (int b = 0; b < B; ++b) {
    const double x = left + b * bw;
    s << "<rect x=\"" << fmt(x, 6) << "\" y=\"" << fmt(Y(r.band_upper[b]), 6) << "\" width=\"" << fmt(bw, 6)
      << "\" height=\"" << fmt((r.band_upper[b] - r.band_lower[b]) * yscale, 6)
      << "\" fill=\"#d0d0d0\" stroke=\"none\"/>\n";
  }
  for (int b = 0; b < B; ++b) {
    const double x = left + b * bw;
    s << "<rect x=\"" << fmt(x + 1, 6) << "\" y=\"" << fmt(Y(r.histogram[b]), 6) << "\" width=\""
      << fmt(bw - 2, 6) << "\" height=\"" << fmt(r.histogram[b] * yscale, 6)
      << "\" fill=\"#4a7ab5\" fill-opacity=\"0.8\" data-count=\"" << r.histogram[b] << "\"/>\n";
  }
  s << "<polyline fill=\"none\" stroke=\"#c03030\" stroke-width=\"1.5\" points=\"";
  for (int b = 0; b < B; ++b) {
    const double e = r.bin_probability[b] * static_cast<double>(r.case_count);
    s << fmt(left + b * bw, 6) << ',' << fmt(Y(e), 6) << ' ' << fmt(left + (b + 1) * bw, 6) << ',' << fmt(Y(e), 6)
      << ' ';
  }
  s << "\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">normalized rank</text>\n";
  s << "<text x=\"" << left - 8 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
       "font-size=\"11\">"
    << fmt(1.1 * static_cast<double>(ymax), 4) << "</text>\n";
  s << "</svg>\n";

  auto out = open_out(path);
  out << s.str();
  finish(out, path);
}

void write_svg_curves(const std::filesystem::path& path, const OutputHeader& header, const std::string& title,
                      const std::string& x_label, const std::string& y_label, const std::vector<Curve>& curves,
                      bool log_axes) {
  const double W = 640, H = 400, left = 70, right = 150, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  auto tx = [&](double v) { return log_axes ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!log_axes || (x > 0 && y > 0));
  };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.x.size(); ++i)
      if (usable(c.x[i], c.y[i])) {
        x0 = std::min(x0, tx(c.x[i]));
        x1 = std::max(x1, tx(c.x[i]));
        y0 = std::min(y0, tx(c.y[i]));
        y1 = std::max(y1, tx(c.y[i]));
      }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto X = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
  auto Y = [&](double v) { return top + ph - (tx(v) - y0) / (y1 - y0) * ph; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream s;
  s << svg_comment(header);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\">\n";
  nlohmann::ordered_json meta = nlohmann::ordered_json::array();
  for (const auto& c : curves) meta.push_back({{"name", c.name}, {"x", c.x}, {"y", c.y}});
  s << "<metadata>" << xml_escape(meta.dump()) << "</metadata>\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"14\">"
    << xml_escape(title) << "</text>\n";
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    const char* col = colors[k % 6];
    s << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < c.x.size(); ++i)
      if (usable(c.x[i], c.y[i])) s << fmt(X(c.x[i]), 6) << ',' << fmt(Y(c.y[i]), 6) << ' ';
    s << "\"/>\n";
    for (std::size_t i = 0; i < c.x.size(); ++i)
      if (usable(c.x[i], c.y[i]))
        s << "<circle cx=\"" << fmt(X(c.x[i]), 6) << "\" cy=\"" << fmt(Y(c.y[i]), 6) << "\" r=\"2.5\" fill=\"" << col
          << "\"/>\n";
    const double ly = top + 16 * static_cast<double>(k + 1);
    s << "<text x=\"" << left + pw + 10 << "\" y=\"" << ly << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
      << col << "\">" << xml_escape(c.name) << "</text>\n";
  }
  s << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(x_label)
    << (log_axes ? " (log)" : "") << "</text>\n";
  s << "<text x=\"15\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 15 " << top + ph / 2
    << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(y_label)
    << (log_axes ? " (log)" : "") << "</text>\n";
  s << "</svg>\n";

  auto out = open_out(path);
  out << s.str();
  finish(out, path);
}

void write_pgm(const std::filesystem::path& path, const OutputHeader& header, const Eigen::VectorXd& values,
               int width, int height) {
  require_dims(values.size() == static_cast<Eigen::Index>(width) * height, "write_pgm: size mismatch");
  const double top = values.size() ? values.maxCoeff() : 0.0;
  auto out = open_out(path);
  out << "P2\n";
  for (const auto& line : header_lines(header)) out << "# " << line << '\n';
  out << width << ' ' << height << "\n255\n";
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double v = values[static_cast<Eigen::Index>(y) * width + x];
      const long g = top > 0 ? std::lround(std::clamp(v / top, 0.0, 1.0) * 255.0) : 0;
      out << (x ? " " : "") << g;
    }
    out << '\n';
  }
  finish(out, path);
}

}  // namespace nullcal::io
