#include "microscore/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "microscore/rng.hpp"

namespace microscore {

Eigen::Index expected_theta_size(const ModelFamily& family, int input_dim) {
  if (family.kind == ModelKind::linear) return input_dim + 1;
  const Eigen::Index h = family.hidden_nodes;
  return (static_cast<Eigen::Index>(input_dim) + 1) * h + h + 1;
}

std::string FittedModel::id() const {
  std::uint64_t h = rng::mix64(static_cast<std::uint64_t>(family.kind) * 31 +
                               static_cast<std::uint64_t>(input_dim));
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    std::uint64_t bits;
    const double v = theta(i);
    std::memcpy(&bits, &v, sizeof(bits));
    h = rng::mix64(h ^ bits);
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

// Views into the flat mlp parameter vector, in serialization order.
struct MlpView {
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w_hidden;
  Eigen::Map<const Eigen::VectorXd> b_hidden;
  Eigen::Map<const Eigen::VectorXd> w_out;
  double b_out;

  MlpView(const Eigen::VectorXd& theta, int d, int h)
      : w_hidden(theta.data(), h, d),
        b_hidden(theta.data() + static_cast<Eigen::Index>(h) * d, h),
        w_out(theta.data() + static_cast<Eigen::Index>(h) * d + h, h),
        b_out(theta(theta.size() - 1)) {}
};

inline double activate(Activation a, double v) {
  return a == Activation::tanh ? std::tanh(v) : 1.0 / (1.0 + std::exp(-v));
}

Eigen::MatrixXd activate(Activation a, Eigen::MatrixXd m) {
  if (a == Activation::tanh) return m.array().tanh().matrix();
  return (1.0 / (1.0 + (-m.array()).exp())).matrix();
}

// derivative expressed through the activation value
inline Eigen::ArrayXXd activation_deriv(Activation a, const Eigen::MatrixXd& act) {
  if (a == Activation::tanh) return 1.0 - act.array().square();
  return act.array() * (1.0 - act.array());
}

void check_dim(const FittedModel& m, Eigen::Index got) {
  if (got != m.input_dim) throw std::invalid_argument("dimension mismatch");
}

}  // namespace

double predict(const FittedModel& m, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dim(m, x.size());
  if (m.family.kind == ModelKind::linear)
    return m.theta.head(m.input_dim).dot(x) + m.theta(m.input_dim);
  MlpView v(m.theta, m.input_dim, m.family.hidden_nodes);
  Eigen::VectorXd pre = v.w_hidden * x + v.b_hidden;
  for (Eigen::Index j = 0; j < pre.size(); ++j) pre(j) = activate(m.family.activation, pre(j));
  return v.w_out.dot(pre) + v.b_out;
}

Eigen::VectorXd predict_batch(const FittedModel& m, const Eigen::Ref<const Eigen::MatrixXd>& X) {
  check_dim(m, X.cols());
  if (m.family.kind == ModelKind::linear)
    return (X * m.theta.head(m.input_dim)).array() + m.theta(m.input_dim);
  MlpView v(m.theta, m.input_dim, m.family.hidden_nodes);
  Eigen::MatrixXd act = activate(
      m.family.activation,
      (X * v.w_hidden.transpose()).rowwise() + v.b_hidden.transpose());
  return (act * v.w_out).array() + v.b_out;
}

Eigen::VectorXd gradient_theta(const FittedModel& m, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dim(m, x.size());
  Eigen::VectorXd g(m.theta.size());
  if (m.family.kind == ModelKind::linear) {
    g.head(m.input_dim) = x;
    g(m.input_dim) = 1.0;
    return g;
  }
  const int d = m.input_dim, h = m.family.hidden_nodes;
  MlpView v(m.theta, d, h);
  Eigen::VectorXd act = v.w_hidden * x + v.b_hidden;
  for (Eigen::Index j = 0; j < h; ++j) act(j) = activate(m.family.activation, act(j));
  Eigen::VectorXd dact =
      m.family.activation == Activation::tanh
          ? (1.0 - act.array().square()).matrix().eval()
          : (act.array() * (1.0 - act.array())).matrix().eval();
  for (int j = 0; j < h; ++j)
    g.segment(static_cast<Eigen::Index>(j) * d, d) = v.w_out(j) * dact(j) * x;
  g.segment(static_cast<Eigen::Index>(h) * d, h) = v.w_out.cwiseProduct(dact);
  g.segment(static_cast<Eigen::Index>(h) * d + h, h) = act;
  g(g.size() - 1) = 1.0;
  return g;
}

namespace {

// Mask of penalized entries (weights 1, biases/intercept 0), theta order.
Eigen::VectorXd penalty_mask(const ModelFamily& family, int d) {
  Eigen::VectorXd mask = Eigen::VectorXd::Zero(expected_theta_size(family, d));
  if (family.kind == ModelKind::linear) {
    mask.head(d).setOnes();
  } else {
    const int h = family.hidden_nodes;
    mask.head(static_cast<Eigen::Index>(h) * d).setOnes();                 // hidden weights
    mask.segment(static_cast<Eigen::Index>(h) * d + h, h).setOnes();       // output weights
  }
  return mask;
}

// Objective f(theta) = mean((y - g)^2) + (lambda/n)*|w|^2 and, optionally,
// its exact gradient, evaluated with batched matrix ops.
double mlp_objective(const ModelFamily& family, int d, const Eigen::VectorXd& theta,
                     const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                     const Eigen::VectorXd& mask, Eigen::VectorXd* grad) {
  const int h = family.hidden_nodes;
  const auto n = static_cast<double>(X.rows());
  MlpView v(theta, d, h);
  Eigen::MatrixXd act = activate(
      family.activation, (X * v.w_hidden.transpose()).rowwise() + v.b_hidden.transpose());
  Eigen::VectorXd r = y - ((act * v.w_out).array() + v.b_out).matrix();
  double f = r.squaredNorm() / n + (lambda / n) * theta.cwiseProduct(mask).squaredNorm();
  if (grad) {
    grad->resize(theta.size());
    Eigen::MatrixXd delta =
        (((-2.0 / n) * r) * v.w_out.transpose()).array() * activation_deriv(family.activation, act);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gw(
        grad->data(), h, d);
    gw = delta.transpose() * X;
    grad->segment(static_cast<Eigen::Index>(h) * d, h) = delta.colwise().sum();
    grad->segment(static_cast<Eigen::Index>(h) * d + h, h) = act.transpose() * ((-2.0 / n) * r);
    (*grad)(grad->size() - 1) = (-2.0 / n) * r.sum();
    *grad += (2.0 * lambda / n) * theta.cwiseProduct(mask);
  }
  return f;
}

FittedModel train_linear(const PixelDataset& d, const ModelFamily& family, double lambda) {
  const Eigen::Index n = d.size();
  const auto dim = static_cast<int>(d.x.cols());
  Eigen::MatrixXd A(dim + 1, dim + 1);
  A.topLeftCorner(dim, dim).noalias() = d.x.transpose() * d.x;
  Eigen::VectorXd colsum = d.x.colwise().sum();
  A.topRightCorner(dim, 1) = colsum;
  A.bottomLeftCorner(1, dim) = colsum.transpose();
  A(dim, dim) = static_cast<double>(n);
  A.diagonal().head(dim).array() += lambda;  // intercept unpenalized

  Eigen::VectorXd b(dim + 1);
  b.head(dim).noalias() = d.x.transpose() * d.y;
  b(dim) = d.y.sum();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
  const double dmin = ldlt.vectorD().cwiseAbs().minCoeff();
  if (!(dmin > 1e-12 * dmax)) throw std::runtime_error("singular normal equations");
  Eigen::VectorXd theta = ldlt.solve(b);
  const double resid = (A * theta - b).norm();
  if (!theta.allFinite() || resid > 1e-6 * (1.0 + b.norm()))
    throw std::runtime_error("singular normal equations");

  FittedModel m;
  m.family = family;
  m.family.kind = ModelKind::linear;
  m.input_dim = dim;
  m.theta = theta;
  m.lambda = lambda;
  m.neighborhood = d.spec;
  Eigen::VectorXd r = d.y - ((d.x * theta.head(dim)).array() + theta(dim)).matrix();
  m.sigma_hat = std::sqrt(r.squaredNorm() / static_cast<double>(n));
  m.info.records = n;
  m.info.final_loss = r.squaredNorm() / static_cast<double>(n) +
                      lambda / static_cast<double>(n) * theta.head(dim).squaredNorm();
  return m;
}

FittedModel train_mlp(const PixelDataset& d, const ModelFamily& family, double lambda,
                      const TrainOptions& opts) {
  const Eigen::Index n = d.size();
  const auto dim = static_cast<int>(d.x.cols());
  const int h = family.hidden_nodes;
  if (h < 1) throw std::invalid_argument("hidden_nodes must be >= 1");

  const Eigen::Index tsize = expected_theta_size(family, dim);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(tsize);
  std::mt19937_64 gen(rng::derive(opts.seed, 0x6d6c70 /* "mlp" */));
  const double hid_range = 1.0 / std::sqrt(static_cast<double>(dim));
  const double out_range = 1.0 / std::sqrt(static_cast<double>(h));
  std::uniform_real_distribution<double> uh(-hid_range, hid_range), uo(-out_range, out_range);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(h) * dim; ++i) theta(i) = uh(gen);
  for (Eigen::Index i = 0; i < h; ++i) theta(static_cast<Eigen::Index>(h) * dim + h + i) = uo(gen);
  // biases start at zero

  const Eigen::VectorXd mask = penalty_mask(family, dim);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  double step = opts.step;
  Eigen::VectorXd grad;
  double grad_norm = std::numeric_limits<double>::infinity();
  int epochs_run = 0;

  Eigen::MatrixXd xb;
  Eigen::VectorXd yb;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    if (epoch > 0 && epoch % opts.decay_every == 0) step *= opts.step_decay;
    std::shuffle(order.begin(), order.end(), gen);
    for (Eigen::Index start = 0; start < n; start += opts.batch_size) {
      const Eigen::Index bs = std::min<Eigen::Index>(opts.batch_size, n - start);
      xb.resize(bs, dim);
      yb.resize(bs);
      for (Eigen::Index i = 0; i < bs; ++i) {
        xb.row(i) = d.x.row(order[static_cast<std::size_t>(start + i)]);
        yb(i) = d.y(order[static_cast<std::size_t>(start + i)]);
      }
      // minibatch gradient of mean((y-g)^2); penalty gradient scaled by the
      // full-data 1/n so the stochastic objective matches the batch one
      double f = mlp_objective(family, dim, theta, xb, yb, 0.0, mask, &grad);
      if (!std::isfinite(f)) throw std::runtime_error("non-finite loss: mlp training diverged");
      grad += (2.0 * lambda / static_cast<double>(n)) * theta.cwiseProduct(mask);
      theta -= step * grad;
    }
    ++epochs_run;
    mlp_objective(family, dim, theta, d.x, d.y, lambda, mask, &grad);
    grad_norm = grad.norm();
    if (grad_norm <= opts.grad_tol) break;
  }

  // Deterministic full-batch L-BFGS polish (Armijo backtracking) to reach
  // the gradient-norm stop that minibatch noise alone does not achieve.
  double f = mlp_objective(family, dim, theta, d.x, d.y, lambda, mask, &grad);
  grad_norm = grad.norm();
  constexpr int kMemory = 10;
  std::vector<Eigen::VectorXd> s_hist, y_hist;
  std::vector<double> rho_hist;
  Eigen::VectorXd prev_theta, prev_grad;
  for (int it = 0; it < opts.polish_iters && grad_norm > opts.grad_tol; ++it) {
    // two-loop recursion for the quasi-Newton direction
    Eigen::VectorXd q = grad;
    const auto hist = static_cast<int>(s_hist.size());
    std::vector<double> alpha(static_cast<std::size_t>(hist));
    for (int i = hist - 1; i >= 0; --i) {
      alpha[static_cast<std::size_t>(i)] =
          rho_hist[static_cast<std::size_t>(i)] * s_hist[static_cast<std::size_t>(i)].dot(q);
      q -= alpha[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)];
    }
    if (hist > 0) {
      const auto& sl = s_hist.back();
      const auto& yl = y_hist.back();
      q *= sl.dot(yl) / yl.squaredNorm();
    }
    for (int i = 0; i < hist; ++i) {
      const double beta =
          rho_hist[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)].dot(q);
      q += (alpha[static_cast<std::size_t>(i)] - beta) * s_hist[static_cast<std::size_t>(i)];
    }
    Eigen::VectorXd dir = -q;
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {  // fall back to steepest descent
      dir = -grad;
      slope = -grad.squaredNorm();
    }
    double t = hist > 0 ? 1.0 : std::min(1.0, 1.0 / std::max(grad_norm, 1.0));
    Eigen::VectorXd trial;
    double ft = std::numeric_limits<double>::infinity();
    int backtracks = 0;
    while (backtracks < 60) {
      trial = theta + t * dir;
      ft = mlp_objective(family, dim, trial, d.x, d.y, lambda, mask, nullptr);
      if (std::isfinite(ft) && ft <= f + 1e-4 * t * slope) break;
      t *= 0.5;
      ++backtracks;
    }
    if (backtracks == 60) break;  // no further progress possible
    prev_theta = theta;
    prev_grad = grad;
    theta = trial;
    f = mlp_objective(family, dim, theta, d.x, d.y, lambda, mask, &grad);
    grad_norm = grad.norm();
    Eigen::VectorXd sk = theta - prev_theta;
    Eigen::VectorXd yk = grad - prev_grad;
    const double sy = sk.dot(yk);
    if (sy > 1e-12 * sk.norm() * yk.norm()) {
      s_hist.push_back(std::move(sk));
      y_hist.push_back(std::move(yk));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > kMemory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
    }
  }
  if (!theta.allFinite()) throw std::runtime_error("non-finite loss: mlp training diverged");

  FittedModel m;
  m.family = family;
  m.input_dim = dim;
  m.theta = theta;
  m.lambda = lambda;
  m.neighborhood = d.spec;
  Eigen::VectorXd r = d.y - predict_batch(m, d.x);
  m.sigma_hat = std::sqrt(r.squaredNorm() / static_cast<double>(n));
  m.info.records = n;
  m.info.epochs_run = epochs_run;
  m.info.seed = opts.seed;
  m.info.final_loss = f;
  m.info.grad_norm = grad_norm;
  return m;
}

}  // namespace

FittedModel train(const PixelDataset& d, const ModelFamily& family, double lambda,
                  const TrainOptions& opts) {
  if (d.size() == 0) throw std::invalid_argument("empty dataset");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  return family.kind == ModelKind::linear ? train_linear(d, family, lambda)
                                          : train_mlp(d, family, lambda, opts);
}

double penalized_objective(const FittedModel& m, const PixelDataset& d, Eigen::VectorXd* grad) {
  const auto n = static_cast<double>(d.size());
  const Eigen::VectorXd mask = penalty_mask(m.family, m.input_dim);
  if (m.family.kind == ModelKind::mlp)
    return mlp_objective(m.family, m.input_dim, m.theta, d.x, d.y, m.lambda, mask, grad);
  Eigen::VectorXd r = d.y - predict_batch(m, d.x);
  if (grad) {
    grad->resize(m.theta.size());
    grad->head(m.input_dim) = (-2.0 / n) * (d.x.transpose() * r);
    (*grad)(m.input_dim) = (-2.0 / n) * r.sum();
    *grad += (2.0 * m.lambda / n) * m.theta.cwiseProduct(mask);
  }
  return r.squaredNorm() / n + (m.lambda / n) * m.theta.cwiseProduct(mask).squaredNorm();
}

double cross_validate_lambda(const PixelDataset& d, const ModelFamily& family,
                             const std::vector<double>& grid, int folds,
                             const TrainOptions& opts, std::vector<double>* mse_table) {
  if (grid.empty()) throw std::invalid_argument("empty lambda grid");
  if (folds < 2) throw std::invalid_argument("folds must be >= 2");
  if (d.size() < folds) throw std::invalid_argument("fewer records than folds");
  if (mse_table) mse_table->assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  if (grid.size() == 1) return grid.front();

  const Eigen::Index n = d.size();
  std::vector<Eigen::Index> bounds(static_cast<std::size_t>(folds) + 1);
  for (int f = 0; f <= folds; ++f)
    bounds[static_cast<std::size_t>(f)] = n * f / folds;  // contiguous blocks

  std::vector<double> mean_mse(grid.size(), 0.0);

  if (family.kind == ModelKind::linear) {
    const auto dim = static_cast<int>(d.x.cols());
    // per-fold Gram pieces; complements are totals minus the fold
    std::vector<Eigen::MatrixXd> G(static_cast<std::size_t>(folds));
    std::vector<Eigen::VectorXd> v(static_cast<std::size_t>(folds));
    std::vector<double> cnt(static_cast<std::size_t>(folds));
    Eigen::MatrixXd Gtot = Eigen::MatrixXd::Zero(dim + 1, dim + 1);
    Eigen::VectorXd vtot = Eigen::VectorXd::Zero(dim + 1);
    for (int f = 0; f < folds; ++f) {
      const Eigen::Index a = bounds[static_cast<std::size_t>(f)];
      const Eigen::Index b = bounds[static_cast<std::size_t>(f) + 1];
      const auto Xf = d.x.middleRows(a, b - a);
      const auto yf = d.y.segment(a, b - a);
      Eigen::MatrixXd Gf(dim + 1, dim + 1);
      Gf.topLeftCorner(dim, dim).noalias() = Xf.transpose() * Xf;
      Eigen::VectorXd cs = Xf.colwise().sum();
      Gf.topRightCorner(dim, 1) = cs;
      Gf.bottomLeftCorner(1, dim) = cs.transpose();
      Gf(dim, dim) = static_cast<double>(b - a);
      Eigen::VectorXd vf(dim + 1);
      vf.head(dim).noalias() = Xf.transpose() * yf;
      vf(dim) = yf.sum();
      G[static_cast<std::size_t>(f)] = Gf;
      v[static_cast<std::size_t>(f)] = vf;
      cnt[static_cast<std::size_t>(f)] = static_cast<double>(b - a);
      Gtot += Gf;
      vtot += vf;
    }
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      double acc = 0.0;
      for (int f = 0; f < folds; ++f) {
        Eigen::MatrixXd A = Gtot - G[static_cast<std::size_t>(f)];
        A.diagonal().head(dim).array() += grid[gi];
        Eigen::VectorXd theta =
            Eigen::LDLT<Eigen::MatrixXd>(A).solve(vtot - v[static_cast<std::size_t>(f)]);
        if (!theta.allFinite()) {
          acc = std::numeric_limits<double>::infinity();
          break;
        }
        const Eigen::Index a = bounds[static_cast<std::size_t>(f)];
        const Eigen::Index b = bounds[static_cast<std::size_t>(f) + 1];
        Eigen::VectorXd r = d.y.segment(a, b - a) -
                            ((d.x.middleRows(a, b - a) * theta.head(dim)).array() + theta(dim))
                                .matrix();
        acc += r.squaredNorm() / cnt[static_cast<std::size_t>(f)];
      }
      mean_mse[gi] = acc / folds;
    }
  } else {
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      double acc = 0.0;
      for (int f = 0; f < folds; ++f) {
        const Eigen::Index a = bounds[static_cast<std::size_t>(f)];
        const Eigen::Index b = bounds[static_cast<std::size_t>(f) + 1];
        std::vector<Eigen::Index> keep;
        keep.reserve(static_cast<std::size_t>(n - (b - a)));
        for (Eigen::Index i = 0; i < n; ++i)
          if (i < a || i >= b) keep.push_back(i);
        PixelDataset sub;
        sub.spec = d.spec;
        sub.sources = d.sources;
        sub.x.resize(static_cast<Eigen::Index>(keep.size()), d.x.cols());
        sub.y.resize(static_cast<Eigen::Index>(keep.size()));
        sub.row.resize(static_cast<Eigen::Index>(keep.size()));
        sub.col.resize(static_cast<Eigen::Index>(keep.size()));
        sub.image.resize(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i) {
          sub.x.row(static_cast<Eigen::Index>(i)) = d.x.row(keep[i]);
          sub.y(static_cast<Eigen::Index>(i)) = d.y(keep[i]);
          sub.row(static_cast<Eigen::Index>(i)) = d.row(keep[i]);
          sub.col(static_cast<Eigen::Index>(i)) = d.col(keep[i]);
          sub.image(static_cast<Eigen::Index>(i)) = d.image(keep[i]);
        }
        FittedModel m = train(sub, family, grid[gi], opts);
        Eigen::VectorXd r =
            d.y.segment(a, b - a) - predict_batch(m, d.x.middleRows(a, b - a));
        acc += r.squaredNorm() / static_cast<double>(b - a);
      }
      mean_mse[gi] = acc / folds;
    }
  }

  if (mse_table) *mse_table = mean_mse;
  std::size_t best = 0;
  for (std::size_t gi = 1; gi < grid.size(); ++gi) {
    const double tol = 1e-12 * std::max(1.0, std::abs(mean_mse[best]));
    if (mean_mse[gi] < mean_mse[best] - tol ||
        (mean_mse[gi] <= mean_mse[best] + tol && grid[gi] > grid[best]))
      best = gi;
  }
  return grid[best];
}

namespace {

const char* kind_name(ModelKind k) { return k == ModelKind::linear ? "linear" : "mlp-1-hidden"; }
const char* act_name(Activation a) { return a == Activation::tanh ? "tanh" : "logistic"; }

}  // namespace

nlohmann::json model_to_json(const FittedModel& m) {
  nlohmann::json j;
  j["format"] = "microscore-model";
  j["version"] = 1;
  j["family"] = {{"kind", kind_name(m.family.kind)},
                 {"hidden_nodes", m.family.hidden_nodes},
                 {"activation", act_name(m.family.activation)}};
  j["input_dim"] = m.input_dim;
  j["neighborhood"] = {
      {"shape", m.neighborhood.shape == WindowShape::non_causal ? "non-causal" : "causal"},
      {"length_scale", m.neighborhood.length_scale}};
  // theta order: linear [w..., intercept]; mlp [hidden weights row-major,
  // hidden biases, output weights, output bias]
  j["theta"] = std::vector<double>(m.theta.data(), m.theta.data() + m.theta.size());
  j["sigma_hat"] = m.sigma_hat;
  j["lambda"] = m.lambda;
  j["training"] = {{"epochs_run", m.info.epochs_run},
                   {"seed", m.info.seed},
                   {"final_loss", m.info.final_loss},
                   {"grad_norm", m.info.grad_norm},
                   {"records", m.info.records}};
  return j;
}

FittedModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "microscore-model")
    throw std::runtime_error("not a model document");
  if (j.value("version", 0) != 1) throw std::runtime_error("unsupported model version");
  FittedModel m;
  const auto& fam = j.at("family");
  const std::string kind = fam.at("kind");
  m.family.kind = kind == "linear" ? ModelKind::linear : ModelKind::mlp;
  m.family.hidden_nodes = fam.value("hidden_nodes", 10);
  m.family.activation = fam.value("activation", "tanh") == std::string("logistic")
                            ? Activation::logistic
                            : Activation::tanh;
  m.input_dim = j.at("input_dim");
  const auto& nb = j.at("neighborhood");
  m.neighborhood.shape =
      nb.value("shape", "non-causal") == std::string("causal") ? WindowShape::causal
                                                               : WindowShape::non_causal;
  m.neighborhood.length_scale = nb.at("length_scale");
  const std::vector<double> theta = j.at("theta");
  m.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
  if (m.theta.size() != expected_theta_size(m.family, m.input_dim))
    throw std::runtime_error("theta length mismatch");
  m.sigma_hat = j.at("sigma_hat");
  if (!(m.sigma_hat > 0.0)) throw std::runtime_error("sigma_hat must be positive");
  m.lambda = j.at("lambda");
  if (j.contains("training")) {
    const auto& t = j["training"];
    m.info.epochs_run = t.value("epochs_run", 0);
    m.info.seed = t.value("seed", 0ULL);
    m.info.final_loss = t.value("final_loss", 0.0);
    m.info.grad_norm = t.value("grad_norm", 0.0);
    m.info.records = t.value("records", 0LL);
  }
  return m;
}

void save_model(const FittedModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << model_to_json(m).dump(2) << "\n";
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("file not found: " + path);
  nlohmann::json j;
  in >> j;
  return model_from_json(j);
}

}  // namespace microscore
