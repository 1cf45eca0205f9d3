#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace microscore {

// k-means phase labels over the valid pixels of a smoothed score field.
struct PhaseLabeling {
  Eigen::VectorXi labels;      // one label in [0,k) per pixel, raster order
  int k = 0;
  Eigen::MatrixXd centroids;   // k x P
  double inertia = 0.0;        // sum of squared distances to assigned centroids
  std::vector<double> inertia_trace;  // per Lloyd iteration of the winning restart
  std::uint64_t seed = 0;
};

// Top-3 principal components of the smoothed score vectors, used for
// coloring and the 3D magnitude surface.
struct PcaProjection {
  Eigen::MatrixXd components;        // P x 3, orthonormal columns
  Eigen::Vector3d explained_shares;  // non-increasing, sums to <= 1
  Eigen::MatrixXd scores;            // n x 3 centered projections
  Eigen::MatrixXd rgb;               // n x 3, per-component min-max to [0,1]
  Eigen::VectorXd magnitude;         // n, Euclidean norm of the full vector
};

// Mean-centered projection onto the top-3 covariance eigenvectors. Sign is
// canonicalized by making each component's largest-magnitude loading
// positive. Dimensions below 3 are padded with zero-variance components.
PcaProjection pca_top3(const Eigen::Ref<const Eigen::MatrixXd>& z);

// Lloyd's algorithm with k-means++ seeding and `restarts` independent
// starts; the best-inertia run wins. Labels are canonicalized by
// descending cluster size.
PhaseLabeling cluster_scores(const Eigen::Ref<const Eigen::MatrixXd>& z, int k,
                             std::uint64_t seed, int restarts = 10, int max_iters = 100);

// Advisory phase-count hint: number of modes of a smoothed histogram of the
// magnitudes. The 3D surface export for human inspection is the real tool.
int estimate_k_hint(const PcaProjection& p);

// Best-permutation pixel agreement (Hungarian matching on the confusion
// matrix), excluding pixels within `boundary_margin` (Chebyshev) of a truth
// boundary. Label grids are raster order over rows x cols.
double segmentation_accuracy(const Eigen::VectorXi& labels, const Eigen::VectorXi& truth,
                             int rows, int cols, int boundary_margin);

// Maximum-agreement assignment between two labelings (no boundary mask),
// used for seed-stability reports.
double label_agreement(const Eigen::VectorXi& a, const Eigen::VectorXi& b);

}  // namespace microscore
