#include "microscore/charts.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace microscore {

CovarianceSolver::CovarianceSolver(const Eigen::MatrixXd& sigma, double epsilon) {
  if (sigma.rows() != sigma.cols()) throw std::invalid_argument("covariance must be square");
  epsilon_ = epsilon >= 0.0
                 ? epsilon
                 : 1e-8 * sigma.trace() / static_cast<double>(sigma.rows());
  Eigen::MatrixXd ridged = sigma;
  ridged.diagonal().array() += epsilon_;
  ldlt_.compute(ridged);
  if (ldlt_.info() != Eigen::Success || !ldlt_.isPositive())
    throw std::runtime_error("covariance not positive definite after ridge");
}

double CovarianceSolver::t2(const Eigen::Ref<const Eigen::VectorXd>& z,
                            const Eigen::Ref<const Eigen::VectorXd>& s_bar) const {
  if (z.size() != ldlt_.rows() || s_bar.size() != ldlt_.rows())
    throw std::invalid_argument("dimension mismatch");
  Eigen::VectorXd d = z - s_bar;
  return d.dot(ldlt_.solve(d));
}

Eigen::VectorXd CovarianceSolver::t2_batch(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                                           const Eigen::Ref<const Eigen::VectorXd>& s_bar) const {
  if (Z.cols() != ldlt_.rows()) throw std::invalid_argument("dimension mismatch");
  Eigen::MatrixXd D = Z.rowwise() - s_bar.transpose();
  Eigen::MatrixXd W = ldlt_.solve(D.transpose());
  return (D.array() * W.transpose().array()).rowwise().sum();
}

double t2_statistic(const Eigen::Ref<const Eigen::VectorXd>& z,
                    const Eigen::Ref<const Eigen::VectorXd>& s_bar,
                    const CovarianceSolver& solver) {
  return solver.t2(z, s_bar);
}

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("empty sample");
  std::sort(values.begin(), values.end());
  // nearest rank: the ceil(p*N)-th order statistic (1-indexed)
  const auto n = static_cast<long long>(values.size());
  long long rank = static_cast<long long>(std::ceil(p * static_cast<double>(n)));
  rank = std::clamp<long long>(rank, 1, n);
  return values[static_cast<std::size_t>(rank - 1)];
}

const CovarianceSolver& ChartCalibration::solver_ref() const {
  if (!solver) throw std::logic_error("calibration solver not built");
  return *solver;
}

void ChartCalibration::build_solver() {
  solver = std::make_shared<const CovarianceSolver>(sigma_theta, ridge_epsilon);
}

namespace {

struct SmoothedStats {
  Eigen::VectorXd t2;       // raster over the shrunk grid
  Eigen::VectorXd z_sigma;
  Eigen::VectorXd rwma;
  int rows = 0, cols = 0;   // shrunk grid dims
};

SmoothedStats smoothed_statistics(const ScoreField& sf, const Eigen::VectorXd& s_bar,
                                  const CovarianceSolver& solver, const WmaKernel& k) {
  SmoothedStats out;
  const int ir = sf.interior_rows(), ic = sf.interior_cols();
  if (ir < k.side() || ic < k.side())
    throw std::invalid_argument("score field too small for kernel");
  out.rows = ir - 2 * k.l_w;
  out.cols = ic - 2 * k.l_w;

  Eigen::MatrixXd z_theta = smooth_components(sf.s_theta, ir, ic, k);
  out.t2 = solver.t2_batch(z_theta, s_bar);

  using GridMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                 Eigen::RowMajor>>;
  Eigen::MatrixXd zs = smooth(GridMap(sf.s_sigma.data(), ir, ic), k);
  Eigen::MatrixXd rw = smooth(GridMap(sf.residual.data(), ir, ic), k);
  out.z_sigma.resize(out.t2.size());
  out.rwma.resize(out.t2.size());
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) {
      out.z_sigma(static_cast<Eigen::Index>(r) * out.cols + c) = zs(r, c);
      out.rwma(static_cast<Eigen::Index>(r) * out.cols + c) = rw(r, c);
    }
  return out;
}

Eigen::MatrixXd to_grid(const Eigen::VectorXd& v, int rows, int cols) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      v.data(), rows, cols);
}

// sign with sign(0) := +1, which makes the multi-chart signal set exactly
// the union of the component signal sets.
inline double sign_pos(double v) { return v < 0.0 ? -1.0 : 1.0; }

}  // namespace

ChartResult chart_statistics(const ScoreField& sf, const ChartCalibration& cal,
                             const WmaKernel& k) {
  if (k.l_w != cal.kernel_l_w || k.sigma_w != cal.kernel_sigma_w)
    throw std::invalid_argument("kernel mismatch with calibration");
  if (sf.margin != cal.length_scale)
    throw std::invalid_argument("window mismatch: score field margin differs from calibration");
  if (sf.s_theta.cols() != cal.s_bar_theta.size())
    throw std::invalid_argument("dimension mismatch with calibration");
  if (!cal.model_id.empty() && !sf.model_id.empty() && sf.model_id != cal.model_id)
    throw std::invalid_argument("model mismatch: score field was produced by a different model");

  SmoothedStats st = smoothed_statistics(sf, cal.s_bar_theta, cal.solver_ref(), k);

  ChartResult res;
  res.rows = sf.rows;
  res.cols = sf.cols;
  res.margin = sf.margin + k.l_w;
  res.source_id = sf.source_id;

  res.t2_theta = to_grid(st.t2, st.rows, st.cols);
  res.z_sigma = to_grid(st.z_sigma, st.rows, st.cols);
  res.rwma = to_grid(st.rwma, st.rows, st.cols);

  res.c_theta = (2.0 / cal.ucl_theta) * res.t2_theta.array() - 1.0;
  const double mid = 0.5 * (cal.ucl_sigma + cal.lcl_sigma);
  double half = 0.5 * (cal.ucl_sigma - cal.lcl_sigma);
  if (!(half > 0.0)) half = std::numeric_limits<double>::min();
  res.c_sigma = (res.z_sigma.array() - mid) / half;

  res.c_m.resize(st.rows, st.cols);
  res.sig_theta.resize(st.rows, st.cols);
  res.sig_sigma.resize(st.rows, st.cols);
  res.sig_multi.resize(st.rows, st.cols);
  res.sig_rwma.resize(st.rows, st.cols);

  Eigen::Index n_t = 0, n_s = 0, n_m = 0, n_r = 0;
  for (int r = 0; r < st.rows; ++r) {
    for (int c = 0; c < st.cols; ++c) {
      const double ct = res.c_theta(r, c), cs = res.c_sigma(r, c);
      const double cm = sign_pos(ct + cs) * std::max(std::abs(ct), std::abs(cs));
      res.c_m(r, c) = cm;
      const bool st_ = ct > 1.0;  // one-sided theta chart
      const bool ss = std::abs(cs) > 1.0;
      const bool sm = std::abs(cm) > 1.0;
      const bool sr = res.rwma(r, c) < cal.rwma_lcl || res.rwma(r, c) > cal.rwma_ucl;
      res.sig_theta(r, c) = st_;
      res.sig_sigma(r, c) = ss;
      res.sig_multi(r, c) = sm;
      res.sig_rwma(r, c) = sr;
      n_t += st_;
      n_s += ss;
      n_m += sm;
      n_r += sr;
    }
  }
  const auto n = static_cast<double>(st.rows) * st.cols;
  res.power_theta = n_t / n;
  res.power_sigma = n_s / n;
  res.power_multi = n_m / n;
  res.power_rwma = n_r / n;
  return res;
}

namespace {

struct PooledCl {
  std::vector<double> t2, z_sigma, rwma;
};

// Multi-chart false-alarm fraction over the CL pool at component rate a.
double achieved_rate(const PooledCl& cl, double a, double* ucl_t, double* lcl_s, double* ucl_s) {
  const double u = empirical_quantile(cl.t2, 1.0 - a);
  const double lo = empirical_quantile(cl.z_sigma, a / 2.0);
  const double hi = empirical_quantile(cl.z_sigma, 1.0 - a / 2.0);
  Eigen::Index count = 0;
  for (std::size_t i = 0; i < cl.t2.size(); ++i)
    count += (cl.t2[i] > u) || (cl.z_sigma[i] < lo) || (cl.z_sigma[i] > hi);
  if (ucl_t) *ucl_t = u;
  if (lcl_s) *lcl_s = lo;
  if (ucl_s) *ucl_s = hi;
  return static_cast<double>(count) / static_cast<double>(cl.t2.size());
}

}  // namespace

ChartCalibration calibrate(const ReferenceStats& ref, std::span<const ScoreField> cl_fields,
                           const WmaKernel& k, double alpha_target) {
  if (!(alpha_target > 0.0 && alpha_target < 1.0))
    throw std::invalid_argument("alpha_target must be in (0,1)");
  if (cl_fields.empty()) throw std::invalid_argument("no CL-selection data");

  ChartCalibration cal;
  cal.s_bar_theta = ref.s_bar_theta;
  cal.sigma_theta = ref.sigma_theta;
  cal.ridge_epsilon =
      1e-8 * ref.sigma_theta.trace() / static_cast<double>(ref.sigma_theta.rows());
  cal.build_solver();
  cal.alpha_target = alpha_target;
  cal.kernel_l_w = k.l_w;
  cal.kernel_sigma_w = k.sigma_w;
  cal.length_scale = cl_fields.front().margin;
  cal.score_dim = static_cast<int>(ref.s_bar_theta.size());
  cal.model_id = cl_fields.front().model_id;

  PooledCl cl;
  for (const auto& f : cl_fields) {
    SmoothedStats st = smoothed_statistics(f, cal.s_bar_theta, *cal.solver, k);
    cl.t2.insert(cl.t2.end(), st.t2.data(), st.t2.data() + st.t2.size());
    cl.z_sigma.insert(cl.z_sigma.end(), st.z_sigma.data(), st.z_sigma.data() + st.z_sigma.size());
    cl.rwma.insert(cl.rwma.end(), st.rwma.data(), st.rwma.data() + st.rwma.size());
  }
  const auto n = static_cast<double>(cl.t2.size());
  if (n * alpha_target < 1.0)
    throw std::invalid_argument("insufficient CL pixels for alpha_target");
  const double quantile_step = 1.0 / n;

  // alpha_M is monotone non-decreasing in the component rate, so bisection
  // over (0, alpha_target] brackets the target.
  double lo = 0.0, hi = alpha_target;
  double ach_hi = achieved_rate(cl, hi, nullptr, nullptr, nullptr);
  double ach_lo = 0.0;
  if (ach_hi <= alpha_target) {
    lo = hi;  // cannot exceed the target even at the largest rate
    ach_lo = ach_hi;
  } else {
    for (int it = 0; it < 40 && (hi - lo) > 1e-12; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double ach = achieved_rate(cl, mid, nullptr, nullptr, nullptr);
      if (ach > alpha_target)
        hi = mid;
      else {
        lo = mid;
        ach_lo = ach;
      }
      if (std::abs(ach - alpha_target) <= quantile_step * 0.5) break;
    }
    ach_hi = achieved_rate(cl, hi, nullptr, nullptr, nullptr);
  }
  // ties report the conservative (smaller-rate) side
  double a = lo;
  if (std::abs(ach_hi - alpha_target) < std::abs(ach_lo - alpha_target)) a = hi;
  if (a <= 0.0) a = hi > 0.0 ? hi : alpha_target;
  cal.alpha_component = a;
  cal.achieved_alpha = achieved_rate(cl, a, &cal.ucl_theta, &cal.lcl_sigma, &cal.ucl_sigma);

  cal.rwma_lcl = empirical_quantile(cl.rwma, alpha_target / 2.0);
  cal.rwma_ucl = empirical_quantile(cl.rwma, 1.0 - alpha_target / 2.0);
  return cal;
}

std::vector<ChartResult> monitor(std::span<const Micrograph> ms, const FittedModel& model,
                                 const ChartCalibration& cal) {
  if (model.neighborhood.length_scale != cal.length_scale)
    throw std::invalid_argument("window mismatch: model l_s differs from calibration");
  if (!cal.model_id.empty() && cal.model_id != model.id())
    throw std::invalid_argument("model mismatch: calibration was built for a different model");
  const WmaKernel k = build_kernel(cal.kernel_l_w, cal.kernel_sigma_w);
  std::vector<ChartResult> results;
  results.reserve(ms.size());
  for (const auto& m : ms) {
    const Micrograph std_m = m.standardized ? m : standardize(m);
    PixelDataset d = extract_dataset(std_m, model.neighborhood);
    std::vector<ScoreField> fields = compute_scores(model, d);
    results.push_back(chart_statistics(fields.front(), cal, k));
  }
  return results;
}

nlohmann::json calibration_to_json(const ChartCalibration& cal) {
  nlohmann::json j;
  j["format"] = "microscore-calibration";
  j["version"] = 1;
  j["model_id"] = cal.model_id;
  j["kernel"] = {{"l_w", cal.kernel_l_w}, {"sigma_w", cal.kernel_sigma_w}};
  j["length_scale"] = cal.length_scale;
  j["alpha_target"] = cal.alpha_target;
  j["alpha_component"] = cal.alpha_component;
  j["achieved_alpha"] = cal.achieved_alpha;
  j["ucl_theta"] = cal.ucl_theta;
  j["lcl_sigma"] = cal.lcl_sigma;
  j["ucl_sigma"] = cal.ucl_sigma;
  j["rwma_lcl"] = cal.rwma_lcl;
  j["rwma_ucl"] = cal.rwma_ucl;
  j["ridge_epsilon"] = cal.ridge_epsilon;
  j["s_bar_theta"] =
      std::vector<double>(cal.s_bar_theta.data(), cal.s_bar_theta.data() + cal.s_bar_theta.size());
  std::vector<double> sig(cal.sigma_theta.data(),
                          cal.sigma_theta.data() + cal.sigma_theta.size());
  j["sigma_theta"] = {{"dim", cal.sigma_theta.rows()}, {"data_col_major", sig}};
  return j;
}

ChartCalibration calibration_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "microscore-calibration")
    throw std::runtime_error("not a calibration document");
  if (j.value("version", 0) != 1) throw std::runtime_error("unsupported calibration version");
  ChartCalibration cal;
  cal.model_id = j.value("model_id", "");
  cal.kernel_l_w = j.at("kernel").at("l_w");
  cal.kernel_sigma_w = j.at("kernel").at("sigma_w");
  cal.length_scale = j.at("length_scale");
  cal.alpha_target = j.at("alpha_target");
  cal.alpha_component = j.at("alpha_component");
  cal.achieved_alpha = j.at("achieved_alpha");
  cal.ucl_theta = j.at("ucl_theta");
  cal.lcl_sigma = j.at("lcl_sigma");
  cal.ucl_sigma = j.at("ucl_sigma");
  cal.rwma_lcl = j.at("rwma_lcl");
  cal.rwma_ucl = j.at("rwma_ucl");
  cal.ridge_epsilon = j.at("ridge_epsilon");
  const std::vector<double> sbar = j.at("s_bar_theta");
  cal.s_bar_theta =
      Eigen::Map<const Eigen::VectorXd>(sbar.data(), static_cast<Eigen::Index>(sbar.size()));
  const Eigen::Index dim = j.at("sigma_theta").at("dim");
  const std::vector<double> sig = j.at("sigma_theta").at("data_col_major");
  if (static_cast<Eigen::Index>(sig.size()) != dim * dim)
    throw std::runtime_error("covariance size mismatch");
  cal.sigma_theta = Eigen::Map<const Eigen::MatrixXd>(sig.data(), dim, dim);
  cal.score_dim = static_cast<int>(dim);
  cal.build_solver();
  return cal;
}

void save_calibration(const ChartCalibration& cal, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << calibration_to_json(cal).dump(2) << "\n";
}

ChartCalibration load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("file not found: " + path);
  nlohmann::json j;
  in >> j;
  return calibration_from_json(j);
}

}  // namespace microscore
