#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "microscore/micrograph.hpp"
#include "microscore/model.hpp"
#include "microscore/wma.hpp"

namespace microscore {

enum class PixelTransform { identity, clamped_exp };  // clamped: min 0.05, max 5

// 2D spatial autoregression over above/left neighbors:
//   U[r,c] = c0*(1 - sum(phi)) + sum_{dr,dc} phi(dr,dc)*U[r-dr,c-dc] + eps,
//   eps ~ N(0, sigma_ar^2),  X = h(U).
// The constant term anchors the stationary mean of U at c0. Noise is drawn
// from a counter-based stream keyed by (seed, r, c), so a given spec yields
// the same field regardless of traversal.
struct ArSpec {
  double c0 = 1.0;
  int l_g = 2;
  Eigen::MatrixXd phi;  // (l_g+1) x (l_g+1), phi(0,0) = 0
  double sigma_ar = 0.01;
  PixelTransform transform = PixelTransform::identity;
  std::uint64_t seed = 0;
  int burn_margin = 64;  // rows/cols cropped from the top/left
};

double apply_transform(PixelTransform t, double u);

// Generates height x width stationary pixels: an extended field is filled
// in raster order (the minimal l_g-wide top/left strip is i.i.d.
// N(c0, sigma_ar)-initialized), then the first burn_margin rows and columns
// are cut off. Throws std::runtime_error("overflow") on non-finite values
// from explosive coefficients.
Micrograph generate(const ArSpec& spec, int height, int width);

// Elementwise convex combination (1-gamma)*phi0 + gamma*phi1.
Eigen::MatrixXd interpolate(const Eigen::Ref<const Eigen::MatrixXd>& phi0,
                            const Eigen::Ref<const Eigen::MatrixXd>& phi1, double gamma);

struct GammaSweep {
  ArSpec base;            // c0 / l_g / sigma_ar / transform / burn shared by both models
  Eigen::MatrixXd phi0;   // reference coefficients
  Eigen::MatrixXd phi1;   // fully-changed coefficients
  std::vector<double> gammas;  // ascending, contains 0
  int replicates = 10;
  int height = 256, width = 256;
  double alpha_target = 0.01;
  std::uint64_t seed = 0;
};

struct PowerStudyOptions {
  ModelFamily family;
  double lambda = 0.01;
  NeighborhoodSpec neighborhood;     // l_s = 5 default
  int kernel_l_w = 30;
  double kernel_sigma_w = 30.0;
  int train_images = 4;
  int cl_images = 4;        // 4 CL micrographs per replicate
  int monitor_images = 1;   // monitoring micrographs pooled per power value
  bool direct_limits = false;  // set limits on fresh stationary monitoring data
  TrainOptions train_opts;
};

struct PowerRow {
  double gamma = 0.0;
  int replicate = 0;
  std::string chart;  // swma-theta | swma-sigma | swma-m | rwma
  double power = 0.0;
  bool failed = false;        // replicate-level fault isolation
  std::string error;
};

struct PowerStudyResult {
  std::vector<PowerRow> rows;
  std::vector<double> achieved_alpha;  // per replicate
  // median power per (gamma, chart), charts ordered theta, sigma, multi, rwma
  std::vector<std::array<double, 4>> median_by_gamma;
};

PowerStudyResult power_study(const GammaSweep& sweep, const PowerStudyOptions& opts);

void write_power_csv(const PowerStudyResult& res, const std::string& path);
void write_power_summary_csv(const PowerStudyResult& res, const std::vector<double>& gammas,
                             const std::string& path);

nlohmann::json arspec_to_json(const ArSpec& s);
ArSpec arspec_from_json(const nlohmann::json& j);

}  // namespace microscore
