#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "microscore/micrograph.hpp"

namespace microscore {

enum class ModelKind { linear, mlp };
enum class Activation { tanh, logistic };

struct ModelFamily {
  ModelKind kind = ModelKind::linear;
  int hidden_nodes = 10;                       // mlp only
  Activation activation = Activation::tanh;    // mlp only
};

struct TrainOptions {
  int epochs = 100;
  int batch_size = 64;
  double step = 1e-2;
  double step_decay = 0.5;
  int decay_every = 20;
  double grad_tol = 1e-5;
  int polish_iters = 400;  // full-batch descent budget after the SGD epochs
  std::uint64_t seed = 0;
};

struct TrainingInfo {
  int epochs_run = 0;
  std::uint64_t seed = 0;
  double final_loss = 0.0;      // penalized mean squared error
  double grad_norm = 0.0;
  Eigen::Index records = 0;
};

// A trained conditional-mean model g(x; theta) with Gaussian residual scale.
//
// theta serialization order:
//   linear: [w_1..w_d, intercept]
//   mlp:    [hidden weights row-major by node (H x d), hidden biases (H),
//            output weights (H), output bias]
struct FittedModel {
  ModelFamily family;
  int input_dim = 0;
  Eigen::VectorXd theta;
  double sigma_hat = 0.0;  // residual standard deviation MLE on training data
  double lambda = 0.0;     // L2 weight on non-bias weights
  NeighborhoodSpec neighborhood;
  TrainingInfo info;

  Eigen::Index theta_size() const { return theta.size(); }

  // Stable content fingerprint used to match score fields and calibrations
  // to the model that produced them.
  std::string id() const;
};

Eigen::Index expected_theta_size(const ModelFamily& family, int input_dim);

double predict(const FittedModel& m, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd predict_batch(const FittedModel& m, const Eigen::Ref<const Eigen::MatrixXd>& X);

// Gradient of predict with respect to every entry of theta, in theta order.
Eigen::VectorXd gradient_theta(const FittedModel& m, const Eigen::Ref<const Eigen::VectorXd>& x);

// Penalized least squares: exact normal-equations ridge solve for the
// linear family, minibatch SGD plus a deterministic full-batch polish for
// the mlp. Intercept and biases are excluded from the L2 penalty.
// sigma_hat is the root mean squared training residual at the final theta.
FittedModel train(const PixelDataset& d, const ModelFamily& family, double lambda,
                  const TrainOptions& opts = {});

// Mean held-out MSE over contiguous-block folds; ties break to the larger
// lambda. When given, `mse_table` receives one mean held-out MSE per grid
// entry (NaN for a singleton grid, which is returned without fitting).
double cross_validate_lambda(const PixelDataset& d, const ModelFamily& family,
                             const std::vector<double>& grid, int folds,
                             const TrainOptions& opts = {},
                             std::vector<double>* mse_table = nullptr);

// Value of the penalized training objective mean((y-g)^2) + lambda/n*|w|^2
// and its gradient; exposed for tests of the first-order conditions.
double penalized_objective(const FittedModel& m, const PixelDataset& d, Eigen::VectorXd* grad);

nlohmann::json model_to_json(const FittedModel& m);
FittedModel model_from_json(const nlohmann::json& j);
void save_model(const FittedModel& m, const std::string& path);
FittedModel load_model(const std::string& path);

}  // namespace microscore
