#pragma once

#include <Eigen/Dense>

namespace microscore {

// Truncated 2D Gaussian weights over a (2*l_w+1)^2 window, renormalized to
// sum exactly to one. The 2D weight matrix factors as the outer product of
// a normalized 1D profile, which smoothing exploits.
struct WmaKernel {
  int l_w = 0;
  double sigma_w = 1.0;
  Eigen::MatrixXd weights;     // (2*l_w+1) x (2*l_w+1), sums to 1
  Eigen::VectorXd weights_1d;  // separable factor, sums to 1

  int side() const { return 2 * l_w + 1; }
};

// weight(dr,dc) proportional to exp(-(dr^2+dc^2)/(2*sigma_w^2)).
WmaKernel build_kernel(int l_w, double sigma_w);

// Weighted moving average of a scalar grid. The output shrinks by l_w on
// every side: values are produced only where the full window fits.
Eigen::MatrixXd smooth(const Eigen::MatrixXd& field, const WmaKernel& k);

// Componentwise WMA of a vector field stored as one raster-ordered row per
// pixel of a rows x cols grid. Returns the shrunk field in the same layout.
Eigen::MatrixXd smooth_components(const Eigen::MatrixXd& field, int rows, int cols,
                                  const WmaKernel& k);

}  // namespace microscore
