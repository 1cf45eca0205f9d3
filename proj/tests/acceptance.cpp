// Acceptance suite: one numbered criterion per function, each printing a
// single PASS/FAIL line. Run with no arguments for all criteria or pass
// criterion numbers to run a subset.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "microscore/arsim.hpp"
#include "microscore/charts.hpp"
#include "microscore/diagnostics.hpp"
#include "microscore/micrograph.hpp"
#include "microscore/model.hpp"
#include "microscore/rng.hpp"
#include "microscore/score.hpp"
#include "microscore/wma.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace microscore;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// paper 2D AR coefficient pairs, row-major over the 3x3 generation window
Eigen::MatrixXd phi_from(std::initializer_list<double> v) {
  Eigen::MatrixXd m(3, 3);
  int i = 0;
  for (double x : v) m(i / 3, i % 3) = x, ++i;
  return m;
}

const Eigen::MatrixXd kPhiA0 =
    phi_from({0, 3.59e-01, 1.07e-02, 3.90e-01, 4.21e-02, 1.76e-03, 9.98e-02, -1.82e-03, 1.72e-05});
const Eigen::MatrixXd kPhiA1 =
    phi_from({0, 2.74e-1, 2.93e-2, -2.41e-1, 1.50e-1, -1.17e-2, 4.31e-1, 4.52e-2, -2.96e-2});
const Eigen::MatrixXd kPhiB0 =
    phi_from({0, 3.59e-01, 1.07e-01, 9.98e-03, -1.82e-03, 1.72e-05, 3.51e-01, 4.21e-02, 1.76e-03});
const Eigen::MatrixXd kPhiB1 =
    phi_from({0, 3.59e-01, 1.07e-01, 9.98e-03, -1.82e-03, 1.72e-05, 3.12e-1, 4.21e-02, 1.76e-03});

ArSpec base_spec(const Eigen::MatrixXd& phi, PixelTransform tr, std::uint64_t seed) {
  ArSpec s;
  s.c0 = 1.0;
  s.l_g = 2;
  s.phi = phi;
  s.sigma_ar = 0.01;
  s.transform = tr;
  s.seed = seed;
  s.burn_margin = 64;
  return s;
}

GammaSweep pair_sweep(const Eigen::MatrixXd& phi0, const Eigen::MatrixXd& phi1,
                      PixelTransform tr, std::vector<double> gammas, std::uint64_t seed) {
  GammaSweep sweep;
  sweep.base = base_spec(phi0, tr, 0);
  sweep.phi0 = phi0;
  sweep.phi1 = phi1;
  sweep.gammas = std::move(gammas);
  sweep.replicates = 10;
  sweep.height = 256;
  sweep.width = 256;
  sweep.alpha_target = 0.01;
  sweep.seed = seed;
  return sweep;
}

PowerStudyOptions paper_options(int monitor_images) {
  PowerStudyOptions opts;
  opts.family = {ModelKind::linear};
  opts.lambda = 0.01;
  opts.neighborhood = {WindowShape::non_causal, 5};
  opts.kernel_l_w = 30;
  opts.kernel_sigma_w = 30.0;
  opts.train_images = 4;
  opts.cl_images = 4;
  opts.monitor_images = monitor_images;
  return opts;
}

std::array<double, 4> medians_at(const PowerStudyResult& res,
                                 const std::vector<double>& gammas, double gamma) {
  for (std::size_t gi = 0; gi < gammas.size(); ++gi)
    if (gammas[gi] == gamma) return res.median_by_gamma[gi];
  throw std::logic_error("gamma not in sweep");
}

// ------------------------------------------------------------ criteria ---

// Criterion 1: empirical zero-mean of the training theta-scores for the
// lambda=0 linear model and the 10-node mlp, within one minute.
Outcome criterion_1() {
  const auto t0 = Clock::now();
  Micrograph img = standardize(generate(base_spec(kPhiA0, PixelTransform::clamped_exp, 4101), 256, 256));
  PixelDataset d = extract_dataset(img, {WindowShape::non_causal, 5});

  FittedModel lin = train(d, {ModelKind::linear}, 0.0);
  ReferenceStats lin_stats = training_reference_stats(compute_scores(lin, d));
  const double lin_norm = lin_stats.s_bar_theta.norm();
  const bool lin_ok = lin_norm < 1e-6;

  TrainOptions opts;
  opts.epochs = 12;
  opts.polish_iters = 250;
  opts.seed = 41;
  FittedModel mlp = train(d, {ModelKind::mlp, 10, Activation::tanh}, 0.0, opts);

  // streaming per-component mean and std of s_theta = r/sigma^2 * grad g
  const Eigen::Index P = mlp.theta.size();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(P), sumsq = Eigen::VectorXd::Zero(P);
  Eigen::VectorXd resid = d.y - predict_batch(mlp, d.x);
  const double inv_s2 = 1.0 / (mlp.sigma_hat * mlp.sigma_hat);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    Eigen::VectorXd s = (resid(i) * inv_s2) * gradient_theta(mlp, d.x.row(i).transpose());
    sum += s;
    sumsq += s.cwiseProduct(s);
  }
  const auto n = static_cast<double>(d.size());
  Eigen::VectorXd mean = sum / n;
  Eigen::VectorXd sd = ((sumsq / n) - mean.cwiseProduct(mean)).cwiseMax(0.0).cwiseSqrt();
  // components from saturated hidden units are constant to rounding; their
  // zero check uses a floor at 1e-6 of the overall score scale
  const double floor_sd = 1e-6 * sd.maxCoeff();
  int worst = 0;
  double worst_ratio = 0.0;
  for (Eigen::Index j = 0; j < P; ++j) {
    const double ratio = std::abs(mean(j)) / (0.02 * sd(j) + floor_sd);
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      worst = static_cast<int>(j);
    }
  }
  const bool mlp_ok = worst_ratio <= 1.0;
  const double elapsed = seconds_since(t0);
  const bool time_ok = elapsed < 60.0;

  std::ostringstream ss;
  ss << "linear |mean s_theta| = " << lin_norm << " (< 1e-6: " << (lin_ok ? "yes" : "no")
     << "); mlp worst |mean|/(0.02 sd) = " << worst_ratio << " at component " << worst
     << " (grad norm " << mlp.info.grad_norm << "); elapsed " << elapsed << " s";
  return {lin_ok && mlp_ok && time_ok, ss.str()};
}

// Criterion 2: the training mean of s_sigma vanishes because sigma_hat is
// the root mean squared residual.
Outcome criterion_2() {
  Micrograph img = standardize(generate(base_spec(kPhiA0, PixelTransform::clamped_exp, 4201), 256, 256));
  PixelDataset d = extract_dataset(img, {WindowShape::non_causal, 5});
  FittedModel lin = train(d, {ModelKind::linear}, 0.01);
  ReferenceStats st = training_reference_stats(compute_scores(lin, d));
  std::ostringstream ss;
  ss << "|mean s_sigma| = " << std::abs(st.s_sigma_mean);
  return {std::abs(st.s_sigma_mean) < 1e-9, ss.str()};
}

// Criterion 3: mlp gradient_theta agrees with central finite differences.
Outcome criterion_3() {
  std::mt19937_64 gen(4301);
  std::normal_distribution<double> nd;
  FittedModel m;
  m.family = {ModelKind::mlp, 10, Activation::tanh};
  m.input_dim = 24;
  m.sigma_hat = 1.0;
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    if (inst % 10 == 0) {
      m.theta.resize(expected_theta_size(m.family, m.input_dim));
      for (Eigen::Index i = 0; i < m.theta.size(); ++i) m.theta(i) = 0.6 * nd(gen);
    }
    Eigen::VectorXd x(m.input_dim);
    for (int j = 0; j < m.input_dim; ++j) x(j) = nd(gen);
    Eigen::VectorXd g = gradient_theta(m, x);
    auto f = [&](const Eigen::VectorXd& th) {
      FittedModel probe = m;
      probe.theta = th;
      return predict(probe, x);
    };
    Eigen::VectorXd fd = oracles::finite_difference_gradient(f, m.theta, 1e-5);
    // relative 1e-4, with an absolute floor at the oracle's own noise
    // scale: central differences at step 1e-5 carry ~1e-10 absolute error,
    // which dominates for saturated-unit components with near-zero slope
    const double fd_scale = 1e-4 * fd.norm() / std::sqrt(static_cast<double>(fd.size()));
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      const double rel = std::abs(g(j) - fd(j)) / (std::abs(fd(j)) + fd_scale);
      worst = std::max(worst, rel);
    }
  }
  std::ostringstream ss;
  ss << "worst relative deviation over 100 instances = " << worst;
  return {worst < 1e-4, ss.str()};
}

// Criterion 4: kernel normalization and WMA against the brute-force sum.
Outcome criterion_4() {
  double worst_sum = 0.0;
  for (int lw : {1, 5, 30}) {
    WmaKernel k = build_kernel(lw, static_cast<double>(lw));
    worst_sum = std::max(worst_sum, std::abs(k.weights.sum() - 1.0));
  }
  std::mt19937_64 gen(4401);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd field(20, 20);
  for (Eigen::Index i = 0; i < field.size(); ++i) field.data()[i] = nd(gen);
  double worst_dev = 0.0;
  for (int lw : {1, 3, 5}) {
    WmaKernel k = build_kernel(lw, static_cast<double>(lw));
    Eigen::MatrixXd fast = smooth(field, k);
    Eigen::MatrixXd slow = oracles::wma_brute_force(field, lw, static_cast<double>(lw));
    worst_dev = std::max(worst_dev, (fast - slow).cwiseAbs().maxCoeff());
  }
  std::ostringstream ss;
  ss << "worst |sum-1| = " << worst_sum << ", worst smoothing deviation = " << worst_dev;
  return {worst_sum < 1e-12 && worst_dev < 1e-12, ss.str()};
}

// Criterion 5: T^2 equals the explicit-inverse oracle and vanishes at the
// reference mean.
Outcome criterion_5() {
  std::mt19937_64 gen(4501);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  bool zero_ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd A(5, 5);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = nd(gen);
    Eigen::MatrixXd sigma = A * A.transpose() + 0.3 * Eigen::MatrixXd::Identity(5, 5);
    CovarianceSolver solver(sigma);
    Eigen::VectorXd z(5), sbar(5);
    for (int i = 0; i < 5; ++i) {
      z(i) = nd(gen);
      sbar(i) = nd(gen);
    }
    const double fast = t2_statistic(z, sbar, solver);
    const double slow = oracles::t2_explicit_inverse(z, sbar, sigma, solver.epsilon());
    worst = std::max(worst, std::abs(fast - slow) / std::max(1.0, std::abs(slow)));
    zero_ok = zero_ok && t2_statistic(sbar, sbar, solver) < 1e-12;
  }
  std::ostringstream ss;
  ss << "worst relative deviation = " << worst << ", T2(s_bar) < 1e-12: " << (zero_ok ? "yes" : "no");
  return {worst < 1e-10 && zero_ok, ss.str()};
}

// Criterion 6: gamma=0 false-alarm calibration band. Four monitoring
// micrographs per replicate stabilize the per-replicate power estimate.
Outcome criterion_6() {
  GammaSweep sweep = pair_sweep(kPhiA0, kPhiA1, PixelTransform::clamped_exp, {0.0}, 4601);
  PowerStudyResult res = power_study(sweep, paper_options(4));
  const auto med = medians_at(res, sweep.gammas, 0.0);
  bool ok = true;
  std::ostringstream ss;
  const char* names[4] = {"swma-theta", "swma-sigma", "swma-m", "rwma"};
  for (int ch = 0; ch < 4; ++ch) {
    const double m = med[static_cast<std::size_t>(ch)];
    ok = ok && m >= 0.002 && m <= 0.05;
    ss << names[ch] << " median " << m << (ch < 3 ? ", " : "");
  }
  ss << " (band [0.002, 0.05])";
  return {ok, ss.str()};
}

// Criterion 7: power trend in gamma for pair (a) and the gamma=1 margin of
// the multi-chart over the residual baseline.
Outcome criterion_7() {
  GammaSweep sweep =
      pair_sweep(kPhiA0, kPhiA1, PixelTransform::clamped_exp, {0.0, 0.25, 0.5, 0.75, 1.0}, 4701);
  PowerStudyResult res = power_study(sweep, paper_options(1));

  int inversions = 0;
  double worst_drop = 0.0;
  for (std::size_t gi = 1; gi < sweep.gammas.size(); ++gi) {
    const double prev = res.median_by_gamma[gi - 1][2];
    const double cur = res.median_by_gamma[gi][2];
    if (cur < prev) {
      ++inversions;
      worst_drop = std::max(worst_drop, prev - cur);
    }
  }
  const auto at1 = medians_at(res, sweep.gammas, 1.0);
  const double gap = at1[2] - at1[3];

  std::ostringstream ss;
  ss << "swma-m medians:";
  for (std::size_t gi = 0; gi < sweep.gammas.size(); ++gi)
    ss << " " << res.median_by_gamma[gi][2];
  ss << "; inversions " << inversions << " (worst " << worst_drop << "); gamma=1 swma-m - rwma = "
     << gap;
  const bool trend_ok = inversions == 0 || (inversions == 1 && worst_drop <= 0.05);
  return {trend_ok && gap >= 0.3, ss.str()};
}

// Criterion 8: at gamma=1 the multi-chart matches the best component chart
// for both paper coefficient pairs. Pair (b) also runs the full gamma grid
// so its power trend (the second half of the Fig.-6-style invariant) is
// checked at the same scale.
Outcome criterion_8() {
  std::ostringstream ss;
  bool ok = true;
  struct Pair {
    const char* name;
    const Eigen::MatrixXd& p0;
    const Eigen::MatrixXd& p1;
    PixelTransform tr;
    std::vector<double> gammas;
  };
  const Pair pairs[2] = {{"(a)", kPhiA0, kPhiA1, PixelTransform::clamped_exp, {0.0, 1.0}},
                         {"(b)", kPhiB0, kPhiB1, PixelTransform::identity,
                          {0.0, 0.25, 0.5, 0.75, 1.0}}};
  for (const auto& pr : pairs) {
    GammaSweep sweep = pair_sweep(pr.p0, pr.p1, pr.tr, pr.gammas, 4801);
    PowerStudyResult res = power_study(sweep, paper_options(1));
    const auto at1 = medians_at(res, sweep.gammas, 1.0);
    const double best_component = std::max(at1[0], at1[1]);
    ok = ok && at1[2] >= best_component - 0.05;
    ss << "pair " << pr.name << ": theta " << at1[0] << ", sigma " << at1[1] << ", multi "
       << at1[2] << "; ";
    if (pr.gammas.size() > 2) {
      int inversions = 0;
      double worst_drop = 0.0;
      ss << "trend";
      for (std::size_t gi = 0; gi < pr.gammas.size(); ++gi) {
        ss << " " << res.median_by_gamma[gi][2];
        if (gi > 0 && res.median_by_gamma[gi][2] < res.median_by_gamma[gi - 1][2]) {
          ++inversions;
          worst_drop =
              std::max(worst_drop, res.median_by_gamma[gi - 1][2] - res.median_by_gamma[gi][2]);
        }
      }
      ok = ok && (inversions == 0 || (inversions == 1 && worst_drop <= 0.05));
      ss << " (inversions " << inversions << "); ";
    }
  }
  return {ok, ss.str()};
}

// Criterion 9: segmentation of a 512x512 paste of the two pair-(a) models.
Outcome criterion_9() {
  const int n = 512, l_s = 5, l_w = 20;
  Micrograph left = generate(base_spec(kPhiA0, PixelTransform::clamped_exp, 4901), n, n);
  Micrograph right = generate(base_spec(kPhiA1, PixelTransform::clamped_exp, 4902), n, n);
  Micrograph img;
  img.pixels.resize(n, n);
  img.pixels.leftCols(n / 2) = left.pixels.leftCols(n / 2);
  img.pixels.rightCols(n / 2) = right.pixels.rightCols(n / 2);
  img.id = "paste";

  Micrograph std_img = standardize(img);
  PixelDataset d = extract_dataset(std_img, {WindowShape::non_causal, l_s});
  FittedModel model = train(d, {ModelKind::linear}, 0.01);
  std::vector<ScoreField> fields = compute_scores(model, d);
  const ScoreField& f = fields[0];
  WmaKernel k = build_kernel(l_w, static_cast<double>(l_w));
  Eigen::MatrixXd z = smooth_components(f.s_theta, f.interior_rows(), f.interior_cols(), k);
  d = PixelDataset{};

  const int margin = l_s + l_w;
  const int rows = n - 2 * margin, cols = n - 2 * margin;
  Eigen::VectorXi truth(static_cast<Eigen::Index>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      truth(static_cast<Eigen::Index>(r) * cols + c) = (c + margin) >= n / 2;

  std::vector<PhaseLabeling> labs;
  double min_acc = 1.0;
  for (int seed = 0; seed < 10; ++seed) {
    labs.push_back(cluster_scores(z, 2, static_cast<std::uint64_t>(seed)));
    min_acc = std::min(min_acc,
                       segmentation_accuracy(labs.back().labels, truth, rows, cols, l_w));
  }
  double min_pair = 1.0;
  for (std::size_t i = 0; i < labs.size(); ++i)
    for (std::size_t j = i + 1; j < labs.size(); ++j)
      min_pair = std::min(min_pair, label_agreement(labs[i].labels, labs[j].labels));

  std::ostringstream ss;
  ss << "min accuracy over 10 seeds = " << min_acc << " (>= 0.85), min pairwise agreement = "
     << min_pair << " (>= 0.9)";
  return {min_acc >= 0.85 && min_pair >= 0.9, ss.str()};
}

// Criterion 10: re-running a CLI run from its metadata record reproduces
// the CSV artifacts byte for byte.
Outcome criterion_10() {
  const char* bin_env = std::getenv("MICROSCORE_BIN");
  if (!bin_env) return {false, "MICROSCORE_BIN not set"};
  const std::string bin = bin_env;
  const fs::path ws = fs::temp_directory_path() / "microscore_acc10";
  fs::remove_all(ws);
  fs::create_directories(ws);

  std::ofstream cfg(ws / "p.json");
  cfg << R"({
  "seed": 1010, "out_dir": ")" << (ws / "r1").string() << R"(",
  "neighborhood": {"length_scale": 2},
  "kernel": {"l_w": 4, "sigma_w": 4.0},
  "model": {"kind": "linear", "lambda": 0.01},
  "alpha_target": 0.05,
  "power_study": {
    "c0": 1.0, "l_g": 2, "sigma_ar": 0.01, "transform": "clamped-exp", "burn_margin": 32,
    "phi0_row_major": [0, 3.59e-01, 1.07e-02, 3.90e-01, 4.21e-02, 1.76e-03, 9.98e-02, -1.82e-03, 1.72e-05],
    "phi1_row_major": [0, 2.74e-1, 2.93e-2, -2.41e-1, 1.50e-1, -1.17e-2, 4.31e-1, 4.52e-2, -2.96e-2],
    "gammas": [0.0, 1.0], "replicates": 2, "height": 72, "width": 72,
    "train_images": 2, "cl_images": 2
  }
})";
  cfg.close();

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  auto shell = [](const std::string& c) { return std::system((c + " >/dev/null 2>&1").c_str()); };

  if (shell(bin + " power-study --config " + (ws / "p.json").string()) != 0)
    return {false, "first run failed"};
  if (shell(bin + " power-study --config " + (ws / "r1" / "run_metadata.json").string() +
            " --out " + (ws / "r2").string()) != 0)
    return {false, "metadata re-run failed"};
  const bool same_rows = slurp(ws / "r1" / "power.csv") == slurp(ws / "r2" / "power.csv");
  const bool same_sum =
      slurp(ws / "r1" / "power_summary.csv") == slurp(ws / "r2" / "power_summary.csv");

  // same property through the file-based monitor path
  std::ofstream sim(ws / "sim.json");
  sim << R"({"seed": 5, "out_dir": ")" << (ws / "sims").string() << R"(",
    "simulate": {"ar": {"c0": 1.0, "l_g": 2, "sigma_ar": 0.01, "transform": "clamped-exp",
    "burn_margin": 32, "phi_row_major": [0, 3.59e-01, 1.07e-02, 3.90e-01, 4.21e-02, 1.76e-03,
    9.98e-02, -1.82e-03, 1.72e-05]}, "height": 80, "width": 80, "count": 3}})";
  sim.close();
  std::ofstream tr(ws / "train.json");
  tr << R"({"seed": 6, "out_dir": ")" << (ws / "train").string() << R"(",
    "neighborhood": {"length_scale": 2}, "kernel": {"l_w": 4, "sigma_w": 4.0},
    "model": {"kind": "linear", "lambda": 0.01}, "alpha_target": 0.05,
    "train": {"references": [")" << (ws / "sims" / "micrograph_0.png").string() << R"(", ")"
     << (ws / "sims" / "micrograph_1.png").string() << R"("], "cl_fraction": 0.5}})";
  tr.close();
  std::ofstream mo(ws / "mon.json");
  mo << R"({"seed": 7, "out_dir": ")" << (ws / "m1").string() << R"(",
    "monitor": {"model": ")" << (ws / "train" / "model.json").string()
     << R"(", "calibration": ")" << (ws / "train" / "calibration.json").string()
     << R"(", "images": [")" << (ws / "sims" / "micrograph_2.png").string() << R"("]}})";
  mo.close();
  if (shell(bin + " simulate --config " + (ws / "sim.json").string()) != 0 ||
      shell(bin + " train --config " + (ws / "train.json").string()) != 0 ||
      shell(bin + " monitor --config " + (ws / "mon.json").string()) != 0)
    return {false, "monitor pipeline run failed"};
  if (shell(bin + " monitor --config " + (ws / "m1" / "run_metadata.json").string() + " --out " +
            (ws / "m2").string()) != 0)
    return {false, "monitor metadata re-run failed"};
  const bool same_mon =
      slurp(ws / "m1" / "summary.csv") == slurp(ws / "m2" / "summary.csv") &&
      slurp(ws / "m1" / "chart_micrograph_2.csv") == slurp(ws / "m2" / "chart_micrograph_2.csv");

  fs::remove_all(ws);
  std::ostringstream ss;
  ss << "power.csv identical: " << (same_rows ? "yes" : "no") << ", power_summary.csv identical: "
     << (same_sum ? "yes" : "no") << ", monitor CSVs identical: " << (same_mon ? "yes" : "no");
  return {same_rows && same_sum && same_mon, ss.str()};
}

}  // namespace

int main(int argc, char** argv) {
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> fn;
  };
  const std::vector<Entry> entries = {
      {1, "score zero-mean (linear exact, mlp per-component)", criterion_1},
      {2, "sigma-score training mean is zero", criterion_2},
      {3, "mlp gradient vs central finite differences", criterion_3},
      {4, "WMA kernel normalization and brute-force equivalence", criterion_4},
      {5, "Hotelling T2 vs explicit-inverse oracle", criterion_5},
      {6, "gamma=0 false-alarm calibration band", criterion_6},
      {7, "power trend in gamma and gamma=1 margin over RWMA", criterion_7},
      {8, "multi-chart matches best component at gamma=1", criterion_8},
      {9, "two-phase segmentation accuracy and seed stability", criterion_9},
      {10, "byte-identical reproduction from run metadata", criterion_10},
  };

  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > static_cast<int>(entries.size())) {
      std::cerr << "unknown criterion: " << argv[i] << "\n";
      return 1;
    }
    wanted.push_back(id);
  }

  int failures = 0;
  for (const auto& e : entries) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), e.id) == wanted.end())
      continue;
    Outcome out;
    const auto t0 = Clock::now();
    try {
      out = e.fn();
    } catch (const std::exception& ex) {
      out = {false, std::string("exception: ") + ex.what()};
    }
    std::cout << (out.pass ? "[PASS]" : "[FAIL]") << " criterion " << e.id << ": " << e.name
              << " — " << out.detail << " [" << seconds_since(t0) << " s]" << std::endl;
    failures += out.pass ? 0 : 1;
  }
  return failures;
}
