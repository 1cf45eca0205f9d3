#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace microscore {

// A grayscale micrograph as a dense real-valued pixel grid. Immutable by
// convention once built; operations return new objects.
struct Micrograph {
  Eigen::MatrixXd pixels;  // rows x cols, raw intensities or standardized values
  std::string id;
  bool standardized = false;

  Eigen::Index rows() const { return pixels.rows(); }
  Eigen::Index cols() const { return pixels.cols(); }
};

enum class WindowShape { causal, non_causal };

// Neighborhood window conditioning a target pixel: the (2*l_s+1)^2 square
// centered on the target, excluding the target itself. The causal variant
// keeps only pixels preceding the target in raster order.
struct NeighborhoodSpec {
  WindowShape shape = WindowShape::non_causal;
  int length_scale = 5;  // l_s, half side length in pixels

  int neighbor_count() const {
    const int side = 2 * length_scale + 1;
    return shape == WindowShape::non_causal ? side * side - 1 : (side * side - 1) / 2;
  }
};

// Supervised-learning records (y, x, position) extracted from interior
// pixels of one or more micrographs. Row i of `x` lists the neighborhood
// values of record i in fixed raster order over the window.
struct PixelDataset {
  Eigen::MatrixXd x;       // n x neighbor_count
  Eigen::VectorXd y;       // n
  Eigen::VectorXi row;     // n, pixel row in the source micrograph
  Eigen::VectorXi col;     // n
  Eigen::VectorXi image;   // n, index into sources
  NeighborhoodSpec spec;
  struct Source {
    std::string id;
    int rows = 0;
    int cols = 0;
  };
  std::vector<Source> sources;

  Eigen::Index size() const { return y.size(); }
};

enum class SplitGranularity { by_image, by_pixel_block };

// Rescales to zero mean and unit variance (population 1/N convention).
// Throws std::invalid_argument("zero variance") for constant images.
Micrograph standardize(const Micrograph& m);

// One record per interior pixel (margin l_s) of every input micrograph.
// Requires every input standardized and larger than 2*l_s per dimension.
PixelDataset extract_dataset(std::span<const Micrograph> ms, const NeighborhoodSpec& spec);
PixelDataset extract_dataset(const Micrograph& m, const NeighborhoodSpec& spec);

// Disjoint partition of the dataset into (train, cl); `fraction` is the
// CL-selection share. by_image keeps whole micrographs together;
// by_pixel_block cuts each image's interior rows into contiguous bands.
std::pair<PixelDataset, PixelDataset> split_reference(const PixelDataset& d, double fraction,
                                                      SplitGranularity granularity);

// Debug export: header r,c,y,x_1..x_k; RFC 4180 line endings.
void write_dataset_csv(const PixelDataset& d, const std::string& path);

}  // namespace microscore
