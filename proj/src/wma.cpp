#include "microscore/wma.hpp"

#include <cmath>
#include <stdexcept>

namespace microscore {

WmaKernel build_kernel(int l_w, double sigma_w) {
  if (l_w < 0) throw std::invalid_argument("l_w must be >= 0");
  if (!(sigma_w > 0.0)) throw std::invalid_argument("sigma_w must be positive");

  WmaKernel k;
  k.l_w = l_w;
  k.sigma_w = sigma_w;
  const int side = 2 * l_w + 1;

  // The truncated Gaussian over a square window factors exactly:
  //   exp(-(dr^2+dc^2)/(2s^2)) = exp(-dr^2/(2s^2)) * exp(-dc^2/(2s^2)),
  // so the normalized 2D weights are the outer product of the normalized
  // 1D profile with itself.
  Eigen::VectorXd e(side);
  for (int d = -l_w; d <= l_w; ++d)
    e(d + l_w) = std::exp(-static_cast<double>(d) * d / (2.0 * sigma_w * sigma_w));
  k.weights_1d = e / e.sum();
  k.weights = k.weights_1d * k.weights_1d.transpose();
  return k;
}

Eigen::MatrixXd smooth(const Eigen::MatrixXd& field, const WmaKernel& k) {
  const int l = k.l_w;
  const Eigen::Index rows = field.rows(), cols = field.cols();
  if (rows < 2 * l + 1 || cols < 2 * l + 1)
    throw std::invalid_argument("field too small for kernel");

  const Eigen::Index ocols = cols - 2 * l;
  const Eigen::Index orows = rows - 2 * l;
  // horizontal pass, then vertical pass with the same 1D profile
  Eigen::MatrixXd tmp = Eigen::MatrixXd::Zero(rows, ocols);
  for (int d = -l; d <= l; ++d)
    tmp.noalias() += k.weights_1d(d + l) * field.middleCols(l + d, ocols);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(orows, ocols);
  for (int d = -l; d <= l; ++d)
    out.noalias() += k.weights_1d(d + l) * tmp.middleRows(l + d, orows);
  return out;
}

Eigen::MatrixXd smooth_components(const Eigen::MatrixXd& field, int rows, int cols,
                                  const WmaKernel& k) {
  if (field.rows() != static_cast<Eigen::Index>(rows) * cols)
    throw std::invalid_argument("field/grid size mismatch");
  const int l = k.l_w;
  if (rows < 2 * l + 1 || cols < 2 * l + 1)
    throw std::invalid_argument("field too small for kernel");
  const int orows = rows - 2 * l, ocols = cols - 2 * l;

  using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                     Eigen::RowMajor>, 0,
                                 Eigen::OuterStride<>>;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(orows) * ocols, field.cols());
  Eigen::MatrixXd grid(rows, cols);
  for (Eigen::Index p = 0; p < field.cols(); ++p) {
    // column p viewed as the raster grid (records are raster ordered)
    grid = RowMajorMap(field.col(p).data(), rows, cols, Eigen::OuterStride<>(cols));
    Eigen::MatrixXd sm = smooth(grid, k);
    for (int r = 0; r < orows; ++r)
      out.block(static_cast<Eigen::Index>(r) * ocols, p, ocols, 1) =
          sm.row(r).transpose();
  }
  return out;
}

}  // namespace microscore
