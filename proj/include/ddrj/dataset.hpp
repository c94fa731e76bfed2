#ifndef DDRJ_DATASET_HPP
#define DDRJ_DATASET_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "ddrj/errors.hpp"
#include "ddrj/matrix.hpp"

namespace ddrj {

//! Full-precision float formatting for reproducible CSV output.
inline std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

//! Binary outcomes with numeric (ROI) and 3-level categorical (SNP)
//! covariates. ROI columns may carry a standardization transform; SNP codes
//! are kept as is.
struct Dataset {
  std::vector<int> y;                   // 0/1, length n
  DenseMatrix x;                        // n x g
  DenseMatrix z;                        // n x m, entries in {-1,0,1}
  std::vector<std::string> roi_names;
  std::vector<std::string> snp_names;

  // column transform applied to x (identity until standardize())
  bool standardized = false;
  Vector roi_center, roi_scale;

  std::size_t n() const { return y.size(); }
  std::size_t g() const { return x.cols(); }
  std::size_t m() const { return z.cols(); }

  void validate() const {
    if (n() < 2) throw ParseError("dataset: need at least 2 rows");
    if (x.rows() != n() || z.rows() != n())
      throw DimensionMismatch("dataset: covariate row count mismatch");
    if (roi_names.size() != g() || snp_names.size() != m())
      throw DimensionMismatch("dataset: name count mismatch");
    for (int yi : y)
      if (yi != 0 && yi != 1) throw ParseError("dataset: y entries must be 0/1");
    for (std::size_t i = 0; i < n(); ++i)
      for (std::size_t k = 0; k < m(); ++k) {
        const double v = z(i, k);
        if (v != -1.0 && v != 0.0 && v != 1.0)
          throw ParseError("dataset: SNP codes must be -1/0/1");
      }
    std::unordered_set<std::string> seen;
    for (const auto& nm : roi_names)
      if (!seen.insert(nm).second) throw ParseError("dataset: duplicate column " + nm);
    for (const auto& nm : snp_names)
      if (!seen.insert(nm).second) throw ParseError("dataset: duplicate column " + nm);
  }
};

//! Center and scale every ROI column in place (mean 0, variance 1), recording
//! the transform. A constant column keeps scale 1 to stay invertible.
inline void standardize(Dataset& data) {
  if (data.standardized) return;
  const std::size_t n = data.n(), g = data.g();
  data.roi_center.assign(g, 0.0);
  data.roi_scale.assign(g, 1.0);
  for (std::size_t j = 0; j < g; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += data.x(i, j);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = data.x(i, j) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    data.roi_center[j] = mean;
    data.roi_scale[j] = sd > 0.0 ? sd : 1.0;
    for (std::size_t i = 0; i < n; ++i)
      data.x(i, j) = (data.x(i, j) - mean) / data.roi_scale[j];
  }
  data.standardized = true;
}

inline Dataset subset_rows(const Dataset& data, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.roi_names = data.roi_names;
  out.snp_names = data.snp_names;
  out.standardized = data.standardized;
  out.roi_center = data.roi_center;
  out.roi_scale = data.roi_scale;
  out.y.reserve(rows.size());
  out.x = DenseMatrix(rows.size(), data.g());
  out.z = DenseMatrix(rows.size(), data.m());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    out.y.push_back(data.y[i]);
    for (std::size_t j = 0; j < data.g(); ++j) out.x(r, j) = data.x(i, j);
    for (std::size_t k = 0; k < data.m(); ++k) out.z(r, k) = data.z(i, k);
  }
  return out;
}

inline Dataset subset_cols(const Dataset& data, const std::vector<std::size_t>& roi_idx,
                           const std::vector<std::size_t>& snp_idx) {
  Dataset out;
  out.y = data.y;
  out.standardized = data.standardized;
  out.x = DenseMatrix(data.n(), roi_idx.size());
  out.z = DenseMatrix(data.n(), snp_idx.size());
  for (std::size_t j = 0; j < roi_idx.size(); ++j) {
    out.roi_names.push_back(data.roi_names[roi_idx[j]]);
    if (data.standardized) {
      out.roi_center.push_back(data.roi_center[roi_idx[j]]);
      out.roi_scale.push_back(data.roi_scale[roi_idx[j]]);
    }
    for (std::size_t i = 0; i < data.n(); ++i) out.x(i, j) = data.x(i, roi_idx[j]);
  }
  for (std::size_t k = 0; k < snp_idx.size(); ++k) {
    out.snp_names.push_back(data.snp_names[snp_idx[k]]);
    for (std::size_t i = 0; i < data.n(); ++i) out.z(i, k) = data.z(i, snp_idx[k]);
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_double(const std::string& s, std::size_t line_no, std::size_t col) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ", column " +
                     std::to_string(col + 1) + ": not a number: '" + s + "'");
  }
}

}  // namespace detail

//! Schema: header row; column `y` (0/1); ROI columns prefixed `roi_`; SNP
//! columns prefixed `snp_` with values -1/0/1.
inline Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  if (header.empty() || header[0] != "y")
    throw ParseError(path + ": first column must be 'y'");

  std::vector<std::size_t> roi_cols, snp_cols;
  Dataset data;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].rfind("roi_", 0) == 0) {
      roi_cols.push_back(c);
      data.roi_names.push_back(header[c]);
    } else if (header[c].rfind("snp_", 0) == 0) {
      snp_cols.push_back(c);
      data.snp_names.push_back(header[c]);
    } else {
      throw ParseError(path + ": column '" + header[c] +
                       "' must be prefixed roi_ or snp_");
    }
  }

  std::vector<std::vector<double>> xrows, zrows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != header.size())
      throw ParseError(path + ": line " + std::to_string(line_no) +
                       ": expected " + std::to_string(header.size()) + " fields, got " +
                       std::to_string(f.size()));
    const double yv = detail::parse_double(f[0], line_no, 0);
    if (yv != 0.0 && yv != 1.0)
      throw ParseError(path + ": line " + std::to_string(line_no) + ": y must be 0/1");
    data.y.push_back(static_cast<int>(yv));
    std::vector<double> xr, zr;
    for (std::size_t c : roi_cols) xr.push_back(detail::parse_double(f[c], line_no, c));
    for (std::size_t c : snp_cols) zr.push_back(detail::parse_double(f[c], line_no, c));
    xrows.push_back(std::move(xr));
    zrows.push_back(std::move(zr));
  }
  data.x = DenseMatrix(xrows.size(), roi_cols.size());
  data.z = DenseMatrix(zrows.size(), snp_cols.size());
  for (std::size_t i = 0; i < xrows.size(); ++i) {
    for (std::size_t j = 0; j < roi_cols.size(); ++j) data.x(i, j) = xrows[i][j];
    for (std::size_t k = 0; k < snp_cols.size(); ++k) data.z(i, k) = zrows[i][k];
  }
  data.validate();
  return data;
}

inline void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "y";
  for (const auto& nm : data.roi_names) out << ',' << nm;
  for (const auto& nm : data.snp_names) out << ',' << nm;
  out << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    out << data.y[i];
    for (std::size_t j = 0; j < data.g(); ++j) out << ',' << fmt_full(data.x(i, j));
    for (std::size_t k = 0; k < data.m(); ++k)
      out << ',' << static_cast<int>(data.z(i, k));
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace ddrj

#endif
