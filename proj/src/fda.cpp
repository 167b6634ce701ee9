#include "hogfda/fda.hpp"

#include "hogfda/errors.hpp"
#include "hogfda/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>

namespace hogfda {

Curve extract_ddp(const DayRecord& day, const RegionOfInterest& roi) {
  if (day.snapshots.empty()) throw DataError("day '" + day.day_id + "' has no snapshots");
  GridSpec spec;
  spec.n_rows = static_cast<int>(day.snapshots.front().values.rows());
  spec.n_cols = static_cast<int>(day.snapshots.front().values.cols());
  if (!roi.contained_in(spec)) throw ArgumentError("region of interest lies outside the grid");
  const int h = roi.row_max - roi.row_min + 1;
  const int w = roi.col_max - roi.col_min + 1;
  Curve c{day.day_id, Vector(static_cast<Eigen::Index>(day.snapshots.size()))};
  for (std::size_t t = 0; t < day.snapshots.size(); ++t) {
    const auto& s = day.snapshots[t];
    if (!s.mask.block(roi.row_min, roi.col_min, h, w).all())
      throw DataError("day '" + day.day_id + "': quarter " + std::to_string(t) +
                      " has unobserved cells inside the region of interest");
    c.values[static_cast<Eigen::Index>(t)] = s.values.block(roi.row_min, roi.col_min, h, w).sum();
  }
  return c;
}

FourierBasis::FourierBasis(int n_basis, int n_samples) {
  if (n_basis < 1 || n_basis % 2 == 0) throw ArgumentError("Fourier basis size must be odd and positive");
  if (n_basis >= n_samples) throw ArgumentError("Fourier basis size must be smaller than the number of samples");
  points_.resize(n_samples);
  design_.resize(n_samples, n_basis);
  for (int j = 0; j < n_samples; ++j) {
    const double t = (j + 0.5) / n_samples;
    points_[j] = t;
    design_(j, 0) = 1.0;
    for (int m = 1; 2 * m - 1 < n_basis; ++m) {
      const double a = 2.0 * std::numbers::pi * m * t;
      design_(j, 2 * m - 1) = std::numbers::sqrt2 * std::sin(a);
      design_(j, 2 * m) = std::numbers::sqrt2 * std::cos(a);
    }
  }
}

double FourierBasis::orthogonality_residual() const {
  const Matrix g = design_.transpose() * design_ / static_cast<double>(n_samples());
  return (g - Matrix::Identity(n_basis(), n_basis())).cwiseAbs().maxCoeff();
}

SmoothedCurve smooth_curve(const Curve& curve, const FourierBasis& basis) {
  if (curve.values.size() != basis.n_samples())
    throw DataError("curve '" + curve.day_id + "' has " + std::to_string(curve.values.size()) +
                    " samples, basis expects " + std::to_string(basis.n_samples()));
  SmoothedCurve s;
  s.day_id = curve.day_id;
  s.coefficients = basis.design().transpose() * curve.values / static_cast<double>(basis.n_samples());
  s.fitted = basis.design() * s.coefficients;
  s.residual_sse = (curve.values - s.fitted).squaredNorm();
  return s;
}

std::vector<SmoothedCurve> smooth_curves(const CurveSet& curves, const FourierBasis& basis) {
  std::vector<SmoothedCurve> out(curves.size());
  parallel_for(curves.size(), [&](std::size_t i) { out[i] = smooth_curve(curves[i], basis); });
  return out;
}

namespace {

void write_rows(const std::string& path, const std::vector<std::pair<const std::string*, const Vector*>>& rows,
                Eigen::Index width, char prefix) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  std::string line = "day_id";
  for (Eigen::Index j = 0; j < width; ++j) line += std::string(",") + prefix + std::to_string(j);
  out << line << '\n';
  char buf[64];
  for (const auto& [id, v] : rows) {
    line = *id;
    for (Eigen::Index j = 0; j < v->size(); ++j) {
      auto res = std::to_chars(buf, buf + sizeof buf, (*v)[j]);
      line += ',';
      line.append(buf, res.ptr);
    }
    out << line << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

std::vector<std::pair<std::string, Vector>> read_rows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("day_id,", 0) != 0) throw DataError(path + ": expected header starting with day_id");
  const auto width = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
  std::vector<std::pair<std::string, Vector>> rows;
  long long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string_view rest(line);
    auto comma = rest.find(',');
    std::pair<std::string, Vector> row{std::string(rest.substr(0, comma)), Vector(width)};
    Eigen::Index j = 0;
    while (comma != std::string_view::npos) {
      rest.remove_prefix(comma + 1);
      comma = rest.find(',');
      const auto field = rest.substr(0, comma);
      double x{};
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
      if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(x) || j >= width)
        throw DataError(path + ": line " + std::to_string(line_no) + ": malformed value");
      row.second[j++] = x;
    }
    if (j != width) throw DataError(path + ": line " + std::to_string(line_no) + ": wrong number of fields");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void write_curves_csv(const std::string& path, const CurveSet& curves, char prefix) {
  std::vector<std::pair<const std::string*, const Vector*>> rows;
  for (const auto& c : curves) rows.emplace_back(&c.day_id, &c.values);
  write_rows(path, rows, curves.empty() ? 0 : curves.front().values.size(), prefix);
}

CurveSet read_curves_csv(const std::string& path) {
  CurveSet out;
  for (auto& [id, v] : read_rows(path)) out.push_back({std::move(id), std::move(v)});
  return out;
}

void write_coefficients_csv(const std::string& path, const std::vector<SmoothedCurve>& smoothed) {
  std::vector<std::pair<const std::string*, const Vector*>> rows;
  for (const auto& s : smoothed) rows.emplace_back(&s.day_id, &s.coefficients);
  write_rows(path, rows, smoothed.empty() ? 0 : smoothed.front().coefficients.size(), 'c');
}

std::vector<SmoothedCurve> read_coefficients_csv(const std::string& path) {
  std::vector<SmoothedCurve> out;
  for (auto& [id, v] : read_rows(path)) {
    SmoothedCurve s;
    s.day_id = std::move(id);
    s.coefficients = std::move(v);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace hogfda
