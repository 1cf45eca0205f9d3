#include <doctest.h>

#include <random>

#include "microscore/score.hpp"
#include "support/oracles.hpp"

using namespace microscore;

namespace {

FittedModel linear_model(const Eigen::VectorXd& theta, double sigma_hat, int l_s = 1) {
  FittedModel m;
  m.family.kind = ModelKind::linear;
  m.input_dim = static_cast<int>(theta.size()) - 1;
  m.theta = theta;
  m.sigma_hat = sigma_hat;
  m.neighborhood = {WindowShape::non_causal, l_s};
  return m;
}

// single-record dataset placed at pixel (1,1) of a 3x3 grid
PixelDataset one_record(const Eigen::VectorXd& x, double y) {
  PixelDataset d;
  d.spec = {WindowShape::non_causal, 1};
  d.sources.push_back({"img", 3, 3});
  d.x = x.transpose();
  d.y.resize(1);
  d.y(0) = y;
  d.row = Eigen::VectorXi::Constant(1, 1);
  d.col = Eigen::VectorXi::Constant(1, 1);
  d.image = Eigen::VectorXi::Zero(1);
  return d;
}

Micrograph random_micrograph(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Micrograph m;
  m.pixels.resize(rows, cols);
  for (Eigen::Index i = 0; i < m.pixels.size(); ++i) m.pixels.data()[i] = nd(gen);
  m.id = "rand";
  return standardize(m);
}

}  // namespace

TEST_CASE("compute_scores: zero residual gives zero theta-score and s_sigma = -1/sigma") {
  Eigen::VectorXd theta(3);
  theta << 1.0, -1.0, 0.25;
  FittedModel m = linear_model(theta, 0.5);
  // x chosen so y = predict exactly
  Eigen::VectorXd x(2);
  x << 2.0, 1.0;
  const double y = 1.0 * 2.0 - 1.0 * 1.0 + 0.25;
  // widen x to match input_dim: rebuild with 2 inputs
  PixelDataset d = one_record(x, y);
  std::vector<ScoreField> fields = compute_scores(m, d);
  REQUIRE(fields.size() == 1);
  const auto& f = fields[0];
  CHECK(f.residual(0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(f.s_theta.row(0).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(f.s_sigma(0) == doctest::Approx(-1.0 / 0.5).epsilon(1e-13));
}

TEST_CASE("compute_scores: direct evaluation of the sigma score") {
  // sigma=1, r=2 -> s_sigma = -1 + 4 = 3
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(3);
  FittedModel m = linear_model(theta, 1.0);
  Eigen::VectorXd x(2);
  x << 7.0, -3.0;  // predict = 0
  PixelDataset d = one_record(x, 2.0);
  std::vector<ScoreField> fields = compute_scores(m, d);
  const auto& f = fields[0];
  CHECK(f.s_sigma(0) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("compute_scores: direct evaluation of the theta score") {
  // theta=[0.5,0.5,0], sigma=1, x=[1,2], y=2 -> r=0.5, s_theta=[0.5,1.0,0.5]
  Eigen::VectorXd theta(3);
  theta << 0.5, 0.5, 0.0;
  FittedModel m = linear_model(theta, 1.0);
  Eigen::VectorXd x(2);
  x << 1.0, 2.0;
  PixelDataset d = one_record(x, 2.0);
  std::vector<ScoreField> fields = compute_scores(m, d);
  const auto& f = fields[0];
  CHECK(f.residual(0) == doctest::Approx(0.5).epsilon(1e-14));
  Eigen::VectorXd expect(3);
  expect << 0.5, 1.0, 0.5;
  CHECK((f.s_theta.row(0).transpose() - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("compute_scores: errors") {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(3);
  FittedModel m = linear_model(theta, 1.0);
  Eigen::VectorXd x(2);
  x << 1.0, 1.0;
  PixelDataset d = one_record(x, 0.0);

  FittedModel bad_sigma = m;
  bad_sigma.sigma_hat = 0.0;
  CHECK_THROWS_AS(compute_scores(bad_sigma, d), std::invalid_argument);

  FittedModel wrong_dim = linear_model(Eigen::VectorXd::Zero(5), 1.0);
  CHECK_THROWS_WITH_AS(compute_scores(wrong_dim, d), doctest::Contains("dimension"),
                       std::invalid_argument);
}

TEST_CASE("compute_scores equals the per-record log-likelihood gradient (finite differences)") {
  // s_theta must equal d/dtheta of l(theta, sigma_hat; y, x) at theta_hat
  std::mt19937_64 gen(5150);
  std::normal_distribution<double> nd;
  FittedModel m;
  m.family.kind = ModelKind::mlp;
  m.family.hidden_nodes = 4;
  m.family.activation = Activation::tanh;
  m.input_dim = 8;
  m.theta.resize(expected_theta_size(m.family, 8));
  for (Eigen::Index i = 0; i < m.theta.size(); ++i) m.theta(i) = 0.4 * nd(gen);
  m.sigma_hat = 0.8;
  m.neighborhood = {WindowShape::non_causal, 1};

  PixelDataset d;
  d.spec = {WindowShape::non_causal, 1};
  d.sources.push_back({"img", 3, 10});
  const int n = 6;
  d.x.resize(n, 8);
  d.y.resize(n);
  d.row = Eigen::VectorXi::Constant(n, 1);
  d.col.resize(n);
  d.image = Eigen::VectorXi::Zero(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 8; ++j) d.x(i, j) = nd(gen);
    d.y(i) = nd(gen);
    d.col(i) = i + 1;
  }
  std::vector<ScoreField> fields = compute_scores(m, d);
  const auto& f = fields[0];

  for (int i = 0; i < n; ++i) {
    auto loglik = [&](const Eigen::VectorXd& th) {
      FittedModel probe = m;
      probe.theta = th;
      const double r = d.y(i) - predict(probe, d.x.row(i).transpose());
      return -std::log(m.sigma_hat) - r * r / (2.0 * m.sigma_hat * m.sigma_hat);
    };
    Eigen::VectorXd fd = oracles::finite_difference_gradient(loglik, m.theta, 1e-5);
    const Eigen::Index p = d.col(i) - 1;
    for (Eigen::Index j = 0; j < m.theta.size(); ++j) {
      const double scale = std::max(1e-6, std::abs(fd(j)));
      CHECK(std::abs(f.s_theta(p, j) - fd(j)) / scale < 1e-4);
    }
  }
}

TEST_CASE("training_reference_stats: degenerate and two-point cases") {
  ScoreField f;
  f.rows = 4;
  f.cols = 3;
  f.margin = 1;
  // interior is 2x1 -> 2 pixels
  Eigen::VectorXd v(3);
  v << 1.0, -2.0, 0.5;

  SUBCASE("identical vectors give zero covariance") {
    f.s_theta.resize(2, 3);
    f.s_theta.row(0) = v.transpose();
    f.s_theta.row(1) = v.transpose();
    f.s_sigma = Eigen::VectorXd::Constant(2, 0.7);
    f.residual = Eigen::VectorXd::Constant(2, 0.1);
    ReferenceStats st = training_reference_stats(f);
    CHECK((st.s_bar_theta - v).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(st.sigma_theta.cwiseAbs().maxCoeff() < 1e-15);
    CHECK(st.s_sigma_std == doctest::Approx(0.0));
  }

  SUBCASE("plus/minus v gives 2vv^T with divisor 1") {
    f.s_theta.resize(2, 3);
    f.s_theta.row(0) = v.transpose();
    f.s_theta.row(1) = -v.transpose();
    f.s_sigma = Eigen::VectorXd::Zero(2);
    f.residual = Eigen::VectorXd::Zero(2);
    ReferenceStats st = training_reference_stats(f);
    CHECK(st.s_bar_theta.cwiseAbs().maxCoeff() < 1e-15);
    Eigen::MatrixXd expect = 2.0 * v * v.transpose();
    CHECK((st.sigma_theta - expect).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("training_reference_stats matches the brute-force two-pass oracle") {
  std::mt19937_64 gen(404);
  std::normal_distribution<double> nd;
  ScoreField f;
  f.rows = 12;
  f.cols = 12;
  f.margin = 1;
  const int n = 100;  // 10x10 interior
  f.s_theta.resize(n, 5);
  f.s_sigma.resize(n);
  f.residual.resize(n);
  for (Eigen::Index i = 0; i < f.s_theta.size(); ++i) f.s_theta.data()[i] = nd(gen);
  for (int i = 0; i < n; ++i) {
    f.s_sigma(i) = nd(gen);
    f.residual(i) = nd(gen);
  }
  ReferenceStats st = training_reference_stats(f);
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  oracles::mean_cov_brute_force(f.s_theta, mean, cov);
  CHECK((st.s_bar_theta - mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((st.sigma_theta - cov).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(st.count == n);

  // residual quantile table spans the sorted residuals
  CHECK(st.residual_quantiles(0) == f.residual.minCoeff());
  CHECK(st.residual_quantiles(1000) == f.residual.maxCoeff());

  ScoreField tiny = f;
  tiny.s_theta = f.s_theta.topRows(1);
  tiny.s_sigma = f.s_sigma.head(1);
  tiny.residual = f.residual.head(1);
  CHECK_THROWS_WITH_AS(training_reference_stats(tiny), doctest::Contains("fewer than 2"),
                       std::invalid_argument);
}

TEST_CASE("zero-mean property: trained scores average to zero (lambda 0) and offset exactly "
          "by the penalty gradient otherwise") {
  Micrograph m = random_micrograph(40, 40, 21);
  PixelDataset d = extract_dataset(m, {WindowShape::non_causal, 2});

  SUBCASE("lambda = 0") {
    FittedModel lin = train(d, {ModelKind::linear}, 0.0);
    ReferenceStats st = training_reference_stats(compute_scores(lin, d));
    CHECK(st.s_bar_theta.norm() < 1e-6);
    // sigma-score mean is exactly zero because sigma_hat is the MSE root
    CHECK(std::abs(st.s_sigma_mean) < 1e-9);
  }

  SUBCASE("lambda > 0: mean score equals lambda*w/(n*sigma^2)") {
    const double lambda = 3.0;
    FittedModel lin = train(d, {ModelKind::linear}, lambda);
    ReferenceStats st = training_reference_stats(compute_scores(lin, d));
    Eigen::VectorXd expect = Eigen::VectorXd::Zero(lin.theta.size());
    expect.head(lin.input_dim) = lambda * lin.theta.head(lin.input_dim) /
                                 (static_cast<double>(d.size()) * lin.sigma_hat * lin.sigma_hat);
    CHECK((st.s_bar_theta - expect).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(st.s_sigma_mean) < 1e-9);
  }
}

TEST_CASE("zero-mean property holds for the trained mlp") {
  Micrograph m = random_micrograph(32, 32, 22);
  PixelDataset d = extract_dataset(m, {WindowShape::non_causal, 1});
  TrainOptions opts;
  opts.epochs = 30;
  opts.seed = 3;
  FittedModel mlp = train(d, {ModelKind::mlp, 5, Activation::tanh}, 0.0, opts);
  ReferenceStats st = training_reference_stats(compute_scores(mlp, d));
  // per-component: |mean| small relative to the component's std. Saturated
  // hidden units give score components with std orders of magnitude below
  // the working scale; for those the zero check is against a floor at 1e-6
  // of the overall scale, which is still zero for charting purposes.
  const double scale = std::sqrt(st.sigma_theta.diagonal().maxCoeff());
  for (Eigen::Index j = 0; j < st.s_bar_theta.size(); ++j) {
    const double sd = std::sqrt(st.sigma_theta(j, j));
    CHECK(std::abs(st.s_bar_theta(j)) <= 1e-2 * sd + 1e-6 * scale);
  }
  CHECK(std::abs(st.s_sigma_mean) < 1e-9);
}
