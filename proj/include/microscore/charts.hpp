#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "microscore/score.hpp"
#include "microscore/wma.hpp"

namespace microscore {

// Symmetric positive-definite solve handle for Sigma + epsilon*I; the ridge
// epsilon is recorded for reproducibility. Quadratic forms go through the
// factorization, never an explicit inverse.
class CovarianceSolver {
 public:
  CovarianceSolver() = default;
  // epsilon defaults to 1e-8 * trace(sigma)/dim.
  explicit CovarianceSolver(const Eigen::MatrixXd& sigma, double epsilon = -1.0);

  double t2(const Eigen::Ref<const Eigen::VectorXd>& z,
            const Eigen::Ref<const Eigen::VectorXd>& s_bar) const;
  // One T^2 value per row of Z.
  Eigen::VectorXd t2_batch(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                           const Eigen::Ref<const Eigen::VectorXd>& s_bar) const;

  double epsilon() const { return epsilon_; }
  Eigen::Index dim() const { return ldlt_.rows(); }

 private:
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  double epsilon_ = 0.0;
};

double t2_statistic(const Eigen::Ref<const Eigen::VectorXd>& z,
                    const Eigen::Ref<const Eigen::VectorXd>& s_bar, const CovarianceSolver& solver);

// Nearest-rank empirical quantile of an unsorted sample.
double empirical_quantile(std::vector<double> values, double p);

struct ChartCalibration {
  Eigen::VectorXd s_bar_theta;
  Eigen::MatrixXd sigma_theta;      // raw covariance as estimated
  double ridge_epsilon = 0.0;
  double ucl_theta = 0.0;
  double lcl_sigma = 0.0, ucl_sigma = 0.0;
  double rwma_lcl = 0.0, rwma_ucl = 0.0;
  double alpha_target = 0.01;
  double alpha_component = 0.0;  // per-chart rate found by binary search
  double achieved_alpha = 0.0;   // multi-chart rate realized on CL data
  int kernel_l_w = 0;
  double kernel_sigma_w = 0.0;
  int length_scale = 0;  // l_s of the datasets this calibration applies to
  int score_dim = 0;   // length of the theta-score vectors
  std::string model_id;

  // Factorization handle built once from sigma_theta + ridge_epsilon;
  // shared so calibrations stay cheap to copy.
  std::shared_ptr<const CovarianceSolver> solver;

  const CovarianceSolver& solver_ref() const;
  void build_solver();
};

struct ChartResult {
  int rows = 0, cols = 0;  // source micrograph dimensions
  int margin = 0;          // l_s + l_w
  Eigen::MatrixXd t2_theta, z_sigma, c_theta, c_sigma, c_m, rwma;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> sig_theta, sig_sigma, sig_multi,
      sig_rwma;
  double power_theta = 0.0, power_sigma = 0.0, power_multi = 0.0, power_rwma = 0.0;
  std::string source_id;
};

// Smooths the score field and evaluates all chart statistics against the
// calibration: T^2_theta, z_sigma, scaled C_theta/C_sigma/C_M, RWMA, signal
// masks, and per-chart power (signaled fraction).
ChartResult chart_statistics(const ScoreField& sf, const ChartCalibration& cal,
                             const WmaKernel& k);

// Empirical control-limit selection on CL-selection score fields. Finds the
// per-chart rate whose component limits give the multi-chart a false-alarm
// fraction of alpha_target over the CL data (binary search on the
// monotone achieved rate). RWMA limits are set independently at
// alpha_target/2 tails.
ChartCalibration calibrate(const ReferenceStats& ref, std::span<const ScoreField> cl_fields,
                           const WmaKernel& k, double alpha_target);

// Full monitoring pipeline for new micrographs: standardize, extract with
// the model's neighborhood, score, chart. One result per micrograph.
std::vector<ChartResult> monitor(std::span<const Micrograph> ms, const FittedModel& model,
                                 const ChartCalibration& cal);

nlohmann::json calibration_to_json(const ChartCalibration& cal);
ChartCalibration calibration_from_json(const nlohmann::json& j);
void save_calibration(const ChartCalibration& cal, const std::string& path);
ChartCalibration load_calibration(const std::string& path);

}  // namespace microscore
