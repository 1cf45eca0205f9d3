#include "microscore/micrograph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "microscore/csv.hpp"

namespace microscore {

Micrograph standardize(const Micrograph& m) {
  const Eigen::Index n = m.pixels.size();
  if (n == 0) throw std::invalid_argument("zero-area image");
  const double mean = m.pixels.mean();
  const double var = (m.pixels.array() - mean).square().sum() / static_cast<double>(n);
  const double sd = std::sqrt(var);
  if (!(sd > 1e-12 * std::max(1.0, std::abs(mean))))
    throw std::invalid_argument("zero variance");
  Micrograph out;
  out.pixels = (m.pixels.array() - mean) / sd;
  out.id = m.id;
  out.standardized = true;
  return out;
}

namespace {

// Window offsets in fixed raster order, target excluded. The same order is
// used on every path that touches neighborhoods.
std::vector<std::pair<int, int>> window_offsets(const NeighborhoodSpec& spec) {
  const int l = spec.length_scale;
  std::vector<std::pair<int, int>> offs;
  offs.reserve(spec.neighbor_count());
  for (int dr = -l; dr <= l; ++dr) {
    for (int dc = -l; dc <= l; ++dc) {
      if (dr == 0 && dc == 0) continue;
      if (spec.shape == WindowShape::causal && (dr > 0 || (dr == 0 && dc > 0))) continue;
      offs.emplace_back(dr, dc);
    }
  }
  return offs;
}

}  // namespace

PixelDataset extract_dataset(std::span<const Micrograph> ms, const NeighborhoodSpec& spec) {
  if (spec.length_scale < 1) throw std::invalid_argument("length_scale must be >= 1");
  const int l = spec.length_scale;
  const auto offs = window_offsets(spec);

  Eigen::Index total = 0;
  for (const auto& m : ms) {
    if (!m.standardized) throw std::invalid_argument("micrograph not standardized: " + m.id);
    if (m.rows() <= 2 * l || m.cols() <= 2 * l)
      throw std::invalid_argument("image too small for window: " + m.id);
    total += (m.rows() - 2 * l) * (m.cols() - 2 * l);
  }

  PixelDataset d;
  d.spec = spec;
  d.x.resize(total, static_cast<Eigen::Index>(offs.size()));
  d.y.resize(total);
  d.row.resize(total);
  d.col.resize(total);
  d.image.resize(total);

  Eigen::Index i = 0;
  for (std::size_t img = 0; img < ms.size(); ++img) {
    const auto& px = ms[img].pixels;
    d.sources.push_back({ms[img].id, static_cast<int>(px.rows()), static_cast<int>(px.cols())});
    for (Eigen::Index r = l; r < px.rows() - l; ++r) {
      for (Eigen::Index c = l; c < px.cols() - l; ++c, ++i) {
        d.y(i) = px(r, c);
        d.row(i) = static_cast<int>(r);
        d.col(i) = static_cast<int>(c);
        d.image(i) = static_cast<int>(img);
        for (std::size_t j = 0; j < offs.size(); ++j)
          d.x(i, static_cast<Eigen::Index>(j)) = px(r + offs[j].first, c + offs[j].second);
      }
    }
  }
  return d;
}

PixelDataset extract_dataset(const Micrograph& m, const NeighborhoodSpec& spec) {
  return extract_dataset(std::span<const Micrograph>(&m, 1), spec);
}

namespace {

PixelDataset take_rows(const PixelDataset& d, const std::vector<Eigen::Index>& idx) {
  PixelDataset out;
  out.spec = d.spec;
  out.sources = d.sources;
  out.x.resize(static_cast<Eigen::Index>(idx.size()), d.x.cols());
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  out.row.resize(static_cast<Eigen::Index>(idx.size()));
  out.col.resize(static_cast<Eigen::Index>(idx.size()));
  out.image.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) = d.x.row(idx[i]);
    out.y(static_cast<Eigen::Index>(i)) = d.y(idx[i]);
    out.row(static_cast<Eigen::Index>(i)) = d.row(idx[i]);
    out.col(static_cast<Eigen::Index>(i)) = d.col(idx[i]);
    out.image(static_cast<Eigen::Index>(i)) = d.image(idx[i]);
  }
  return out;
}

}  // namespace

std::pair<PixelDataset, PixelDataset> split_reference(const PixelDataset& d, double fraction,
                                                      SplitGranularity granularity) {
  if (d.size() == 0) throw std::invalid_argument("empty dataset");
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("fraction must be in (0,1)");

  std::vector<Eigen::Index> train_idx, cl_idx;
  if (granularity == SplitGranularity::by_image) {
    const int n_img = static_cast<int>(d.sources.size());
    int n_cl = static_cast<int>(std::lround(fraction * n_img));
    n_cl = std::clamp(n_cl, 0, n_img);
    // whole micrographs go to the CL side, taken from the end of the list
    const int first_cl = n_img - n_cl;
    for (Eigen::Index i = 0; i < d.size(); ++i)
      (d.image(i) >= first_cl ? cl_idx : train_idx).push_back(i);
  } else {
    // contiguous row bands per image: top rows train, bottom rows CL
    const int l = d.spec.length_scale;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const auto& src = d.sources[static_cast<std::size_t>(d.image(i))];
      const int interior_rows = src.rows - 2 * l;
      const int cut = static_cast<int>(std::floor((1.0 - fraction) * interior_rows));
      ((d.row(i) - l) < cut ? train_idx : cl_idx).push_back(i);
    }
  }
  if (train_idx.empty() || cl_idx.empty()) throw std::invalid_argument("empty side");
  return {take_rows(d, train_idx), take_rows(d, cl_idx)};
}

void write_dataset_csv(const PixelDataset& d, const std::string& path) {
  CsvWriter w(path);
  std::string header = "r,c,y";
  for (Eigen::Index j = 0; j < d.x.cols(); ++j) header += ",x_" + std::to_string(j + 1);
  w.row(header);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    std::string line = std::to_string(d.row(i)) + "," + std::to_string(d.col(i)) + "," +
                       format_double(d.y(i));
    for (Eigen::Index j = 0; j < d.x.cols(); ++j) line += "," + format_double(d.x(i, j));
    w.row(line);
  }
}

}  // namespace microscore
