#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "microscore/model.hpp"

namespace microscore {

// Per-pixel Fisher scores on the interior grid of one micrograph, in raster
// order. Row i of s_theta is the theta-score of interior pixel i.
struct ScoreField {
  int rows = 0, cols = 0;  // source micrograph dimensions
  int margin = 0;          // l_s; scores exist on [margin, rows-margin) x ...
  Eigen::MatrixXd s_theta;  // n_interior x P
  Eigen::VectorXd s_sigma;  // n_interior
  Eigen::VectorXd residual; // n_interior
  std::string source_id;
  std::string model_id;

  int interior_rows() const { return rows - 2 * margin; }
  int interior_cols() const { return cols - 2 * margin; }
  Eigen::Index size() const { return s_sigma.size(); }
};

// Evaluates Fisher scores at the frozen model for every record:
//   residual r = y - g(x; theta_hat)
//   s_theta   = r / sigma_hat^2 * grad_theta g(x; theta_hat)
//   s_sigma   = -1/sigma_hat + r^2 / sigma_hat^3
// Returns one field per source micrograph of the dataset.
std::vector<ScoreField> compute_scores(const FittedModel& m, const PixelDataset& d);

// Reference statistics of raw (unsmoothed) training scores.
struct ReferenceStats {
  Eigen::VectorXd s_bar_theta;     // sample mean
  Eigen::MatrixXd sigma_theta;     // sample covariance, N-1 divisor
  double s_sigma_mean = 0.0;
  double s_sigma_std = 0.0;
  Eigen::VectorXd residual_quantiles;  // 1001-point table at p = i/1000
  Eigen::Index count = 0;
};

ReferenceStats training_reference_stats(std::span<const ScoreField> fields);
ReferenceStats training_reference_stats(const ScoreField& field);

// Debug dump (pixels x components; r, c, residual, s_sigma, s_theta_1..P).
// Not a stable format.
void write_scorefield_csv(const ScoreField& field, const std::string& path);

}  // namespace microscore
