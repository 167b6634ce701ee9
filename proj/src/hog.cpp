#include "hogfda/hog.hpp"

#include "hogfda/errors.hpp"
#include "hogfda/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace hogfda {

HogLayout hog_layout(const GridSpec& spec, const HogParams& p) {
  if (p.cell_rows < 1 || p.cell_cols < 1 || p.n_bins < 1 || p.block_cells < 1 || p.block_stride_cells < 1)
    throw ArgumentError("HOG parameters must be positive");
  if (!(p.norm_epsilon >= 0.0)) throw ArgumentError("HOG norm_epsilon must be non-negative");
  if (spec.n_rows % p.cell_rows != 0 || spec.n_cols % p.cell_cols != 0)
    throw ArgumentError("grid " + std::to_string(spec.n_rows) + "x" + std::to_string(spec.n_cols) +
                        " is not divisible by HOG cell " + std::to_string(p.cell_rows) + "x" +
                        std::to_string(p.cell_cols));
  HogLayout l;
  l.cells_down = spec.n_rows / p.cell_rows;
  l.cells_across = spec.n_cols / p.cell_cols;
  if (l.cells_down < p.block_cells || l.cells_across < p.block_cells)
    throw ArgumentError("HOG cell grid smaller than one block");
  l.blocks_down = (l.cells_down - p.block_cells) / p.block_stride_cells + 1;
  l.blocks_across = (l.cells_across - p.block_cells) / p.block_stride_cells + 1;
  l.block_cells = p.block_cells;
  l.n_bins = p.n_bins;
  return l;
}

Vector compute_snapshot_hog(const GridSnapshot& snap, const HogParams& p) {
  if (!snap.fully_observed())
    throw DataError("snapshot (day '" + snap.day_id + "', quarter " + std::to_string(snap.quarter) +
                    ") has unobserved cells; run missing-value handling first");
  const auto& v = snap.values;
  const int rows = static_cast<int>(v.rows());
  const int cols = static_cast<int>(v.cols());
  GridSpec spec;
  spec.n_rows = rows;
  spec.n_cols = cols;
  const HogLayout l = hog_layout(spec, p);

  // Per-cell orientation histograms, indexed [cell_row][cell_col][bin].
  std::vector<double> hist(static_cast<std::size_t>(l.cells_down) * l.cells_across * l.n_bins, 0.0);
  const double bin_width = std::numbers::pi / l.n_bins;
  for (int r = 0; r < rows; ++r) {
    const int up = r > 0 ? r - 1 : r;
    const int down = r + 1 < rows ? r + 1 : r;
    for (int c = 0; c < cols; ++c) {
      const int left = c > 0 ? c - 1 : c;
      const int right = c + 1 < cols ? c + 1 : c;
      double gx = v(r, right) - v(r, left);
      double gy = v(down, c) - v(up, c);
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0) continue;
      // Fold onto the upper half-plane so g and -g map to the same angle.
      if (gy < 0.0 || (gy == 0.0 && gx < 0.0)) {
        gx = -gx;
        gy = -gy;
      }
      double theta = std::atan2(gy, gx);  // [0, pi]
      if (theta >= std::numbers::pi) theta = 0.0;
      int bin = static_cast<int>(std::floor(theta / bin_width)) % l.n_bins;
      const int cell = (r / p.cell_rows) * l.cells_across + (c / p.cell_cols);
      hist[static_cast<std::size_t>(cell) * l.n_bins + bin] += mag;
    }
  }

  Vector out(l.dimension());
  const int block_len = l.block_length();
  for (int br = 0; br < l.blocks_down; ++br) {
    for (int bc = 0; bc < l.blocks_across; ++bc) {
      const int offset = (br * l.blocks_across + bc) * block_len;
      int k = offset;
      for (int u = 0; u < l.block_cells; ++u)
        for (int w = 0; w < l.block_cells; ++w) {
          const int cell = (br * p.block_stride_cells + u) * l.cells_across + (bc * p.block_stride_cells + w);
          for (int b = 0; b < l.n_bins; ++b) out[k++] = hist[static_cast<std::size_t>(cell) * l.n_bins + b];
        }
      auto block = out.segment(offset, block_len);
      const double norm = std::sqrt(block.squaredNorm() + p.norm_epsilon * p.norm_epsilon);
      if (norm > 0.0)
        block /= norm;
      else
        block.setZero();
    }
  }
  return out;
}

DayFeatureVector build_day_vector(const DayRecord& day, const HogParams& p) {
  if (day.snapshots.empty()) throw DataError("day '" + day.day_id + "' has no snapshots");
  for (std::size_t t = 0; t < day.snapshots.size(); ++t) {
    const auto& s = day.snapshots[t];
    if (s.quarter != static_cast<int>(t))
      throw DataError("day '" + day.day_id + "': missing snapshot for quarter " + std::to_string(t));
    if (!s.fully_observed())
      throw DataError("day '" + day.day_id + "': quarter " + std::to_string(t) +
                      " is not fully observed; run missing-value handling first");
  }
  GridSpec spec;
  spec.n_rows = static_cast<int>(day.snapshots.front().values.rows());
  spec.n_cols = static_cast<int>(day.snapshots.front().values.cols());
  const int dim = hog_dimension(spec, p);
  DayFeatureVector f{day.day_id, Vector(dim * static_cast<Eigen::Index>(day.snapshots.size()))};
  for (std::size_t t = 0; t < day.snapshots.size(); ++t)
    f.values.segment(static_cast<Eigen::Index>(t) * dim, dim) = compute_snapshot_hog(day.snapshots[t], p);
  return f;
}

FeatureMatrix build_feature_matrix(const DayCollection& data, const HogParams& p) {
  if (data.days.empty()) throw DataError("cannot build features from an empty collection");
  const Eigen::Index dim =
      static_cast<Eigen::Index>(hog_dimension(data.spec, p)) * data.spec.quarters_per_day;
  FeatureMatrix F;
  F.columns.resize(dim, static_cast<Eigen::Index>(data.days.size()));
  F.day_ids.resize(data.days.size());
  parallel_for(data.days.size(), [&](std::size_t i) {
    auto f = build_day_vector(data.days[i], p);
    if (f.values.size() != dim)
      throw DataError("day '" + f.day_id + "' has " + std::to_string(f.values.size()) + " features, expected " +
                      std::to_string(dim));
    F.columns.col(static_cast<Eigen::Index>(i)) = f.values;
    F.day_ids[i] = std::move(f.day_id);
  });
  return F;
}

void write_features_csv(const std::string& path, const FeatureMatrix& F) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  std::string line = "day_id";
  for (Eigen::Index d = 0; d < F.dimension(); ++d) line += ",dim_" + std::to_string(d);
  out << line << '\n';
  char buf[64];
  for (Eigen::Index j = 0; j < F.n_days(); ++j) {
    line = F.day_ids[static_cast<std::size_t>(j)];
    for (Eigen::Index d = 0; d < F.dimension(); ++d) {
      auto res = std::to_chars(buf, buf + sizeof buf, F.columns(d, j));
      line += ',';
      line.append(buf, res.ptr);
    }
    out << line << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

FeatureMatrix read_features_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("day_id", 0) != 0) throw DataError(path + ": expected header starting with day_id");
  const auto dim = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
  std::vector<std::string> ids;
  std::vector<double> values;
  long long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string_view rest(line);
    auto comma = rest.find(',');
    ids.emplace_back(rest.substr(0, comma));
    Eigen::Index seen = 0;
    while (comma != std::string_view::npos) {
      rest.remove_prefix(comma + 1);
      comma = rest.find(',');
      const auto field = rest.substr(0, comma);
      double x{};
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
      if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(x))
        throw DataError(path + ": line " + std::to_string(line_no) + ": malformed feature value");
      values.push_back(x);
      ++seen;
    }
    if (seen != dim) throw DataError(path + ": line " + std::to_string(line_no) + ": wrong number of fields");
  }
  FeatureMatrix F;
  F.day_ids = std::move(ids);
  F.columns = Eigen::Map<Matrix>(values.data(), dim, static_cast<Eigen::Index>(F.day_ids.size()));
  return F;
}

}  // namespace hogfda
