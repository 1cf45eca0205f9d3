#include "microscore/arsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "microscore/charts.hpp"
#include "microscore/csv.hpp"
#include "microscore/rng.hpp"
#include "microscore/score.hpp"

namespace microscore {

double apply_transform(PixelTransform t, double u) {
  if (t == PixelTransform::identity) return u;
  return std::min(5.0, std::max(0.05, std::exp(u)));
}

namespace {

void validate(const ArSpec& spec) {
  if (spec.phi.rows() != spec.l_g + 1 || spec.phi.cols() != spec.l_g + 1)
    throw std::invalid_argument("phi must be (l_g+1) x (l_g+1)");
  if (spec.phi(0, 0) != 0.0) throw std::invalid_argument("phi(0,0) must be 0");
  if (!(spec.sigma_ar > 0.0)) throw std::invalid_argument("sigma_ar must be positive");
  if (spec.burn_margin < spec.l_g)
    throw std::invalid_argument("burn_margin must be >= l_g");
}

constexpr std::uint64_t kNoiseStream = 0x61722d6e;  // AR noise
constexpr std::uint64_t kEdgeStream = 0x61722d65;   // edge initialization

}  // namespace

Micrograph generate(const ArSpec& spec, int height, int width) {
  if (height < 1 || width < 1) throw std::invalid_argument("dims must be >= 1");
  validate(spec);

  const int lg = spec.l_g;
  const int burn = spec.burn_margin;
  const int ext_h = height + burn;
  const int ext_w = width + burn;
  const double phi_sum = spec.phi.sum();
  // constant chosen so the stationary mean of U is c0
  const double c = spec.c0 * (1.0 - phi_sum);

  Eigen::MatrixXd U(ext_h, ext_w);
  // minimal i.i.d. strip on the top/left; everything else is recursed and
  // the burn margin is cut off so only mixed pixels remain
  for (int r = 0; r < ext_h; ++r) {
    for (int col = 0; col < ext_w; ++col) {
      if (r < lg || col < lg) {
        U(r, col) = spec.c0 + spec.sigma_ar * rng::normal(spec.seed, kEdgeStream, r, col);
      } else {
        double acc = c + spec.sigma_ar * rng::normal(spec.seed, kNoiseStream, r, col);
        for (int dr = 0; dr <= lg; ++dr)
          for (int dc = 0; dc <= lg; ++dc) {
            if (dr == 0 && dc == 0) continue;
            acc += spec.phi(dr, dc) * U(r - dr, col - dc);
          }
        U(r, col) = acc;
      }
    }
  }
  if (!U.allFinite() || U.cwiseAbs().maxCoeff() > 1e100)
    throw std::runtime_error("overflow: explosive AR coefficients");

  Micrograph m;
  m.pixels.resize(height, width);
  for (int r = 0; r < height; ++r)
    for (int col = 0; col < width; ++col)
      m.pixels(r, col) = apply_transform(spec.transform, U(r + burn, col + burn));
  m.id = "ar-" + std::to_string(spec.seed);
  m.standardized = false;
  return m;
}

Eigen::MatrixXd interpolate(const Eigen::Ref<const Eigen::MatrixXd>& phi0,
                            const Eigen::Ref<const Eigen::MatrixXd>& phi1, double gamma) {
  if (phi0.rows() != phi1.rows() || phi0.cols() != phi1.cols())
    throw std::invalid_argument("shape mismatch");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0,1]");
  return (1.0 - gamma) * phi0 + gamma * phi1;
}

namespace {

void validate(const GammaSweep& sweep) {
  if (sweep.gammas.empty() || sweep.gammas.front() != 0.0)
    throw std::invalid_argument("gamma list must be ascending and contain 0");
  if (!std::is_sorted(sweep.gammas.begin(), sweep.gammas.end()))
    throw std::invalid_argument("gamma list must be ascending and contain 0");
  if (sweep.phi0.rows() != sweep.phi1.rows() || sweep.phi0.cols() != sweep.phi1.cols())
    throw std::invalid_argument("shape mismatch");
  if (sweep.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

PowerStudyResult power_study(const GammaSweep& sweep, const PowerStudyOptions& opts) {
  validate(sweep);
  PowerStudyResult result;
  const WmaKernel kernel = build_kernel(opts.kernel_l_w, opts.kernel_sigma_w);
  static const char* kCharts[4] = {"swma-theta", "swma-sigma", "swma-m", "rwma"};

  for (int rep = 0; rep < sweep.replicates; ++rep) {
    const std::uint64_t rep_seed = rng::derive(sweep.seed, 0x726570, static_cast<std::uint64_t>(rep));
    try {
      ArSpec ref_spec = sweep.base;
      ref_spec.phi = sweep.phi0;

      // reference side: training micrographs, then the model
      std::vector<Micrograph> train_ms;
      for (int i = 0; i < opts.train_images; ++i) {
        ref_spec.seed = rng::derive(rep_seed, 0x747261, static_cast<std::uint64_t>(i));
        train_ms.push_back(standardize(generate(ref_spec, sweep.height, sweep.width)));
      }
      PixelDataset train_d = extract_dataset(train_ms, opts.neighborhood);
      FittedModel model = train(train_d, opts.family, opts.lambda, opts.train_opts);
      ReferenceStats ref = training_reference_stats(compute_scores(model, train_d));
      train_d = PixelDataset{};  // release
      train_ms.clear();

      // limit-selection side: CL micrographs, or fresh stationary
      // monitoring data when direct limits are requested
      const int n_lim = opts.direct_limits ? std::max(opts.cl_images, opts.monitor_images * 2)
                                           : opts.cl_images;
      const std::uint64_t lim_tag = opts.direct_limits ? 0x646972 : 0x636c;
      std::vector<ScoreField> cl_fields;
      for (int i = 0; i < n_lim; ++i) {
        ref_spec.seed = rng::derive(rep_seed, lim_tag, static_cast<std::uint64_t>(i));
        Micrograph m = standardize(generate(ref_spec, sweep.height, sweep.width));
        PixelDataset d = extract_dataset(m, opts.neighborhood);
        cl_fields.push_back(compute_scores(model, d).front());
      }
      ChartCalibration cal = calibrate(ref, cl_fields, kernel, sweep.alpha_target);
      cl_fields.clear();
      result.achieved_alpha.push_back(cal.achieved_alpha);

      for (std::size_t gi = 0; gi < sweep.gammas.size(); ++gi) {
        const double gamma = sweep.gammas[gi];
        try {
          ArSpec mon_spec = sweep.base;
          mon_spec.phi = interpolate(sweep.phi0, sweep.phi1, gamma);
          std::vector<Micrograph> mon;
          for (int i = 0; i < opts.monitor_images; ++i) {
            mon_spec.seed = rng::derive(rep_seed, 0x6d6f6e + gi, static_cast<std::uint64_t>(i));
            mon.push_back(generate(mon_spec, sweep.height, sweep.width));
          }
          std::vector<ChartResult> charts = monitor(mon, model, cal);
          // pool signals over the replicate's monitoring set
          double sums[4] = {0, 0, 0, 0};
          double pixels = 0;
          for (const auto& cr : charts) {
            const auto n = static_cast<double>(cr.sig_multi.size());
            sums[0] += cr.power_theta * n;
            sums[1] += cr.power_sigma * n;
            sums[2] += cr.power_multi * n;
            sums[3] += cr.power_rwma * n;
            pixels += n;
          }
          for (int ch = 0; ch < 4; ++ch)
            result.rows.push_back({gamma, rep, kCharts[ch], sums[ch] / pixels, false, ""});
        } catch (const std::exception& e) {
          // fault isolation: flag this gamma row, keep the sweep going
          for (const char* chart : kCharts)
            result.rows.push_back({gamma, rep, chart, std::numeric_limits<double>::quiet_NaN(),
                                   true, e.what()});
        }
      }
    } catch (const std::exception& e) {
      // reference/calibration failure poisons the whole replicate
      for (double gamma : sweep.gammas)
        for (const char* chart : kCharts)
          result.rows.push_back({gamma, rep, chart, std::numeric_limits<double>::quiet_NaN(),
                                 true, e.what()});
    }
  }

  for (double gamma : sweep.gammas) {
    std::array<double, 4> med{};
    for (int ch = 0; ch < 4; ++ch) {
      std::vector<double> vals;
      for (const auto& row : result.rows)
        if (!row.failed && row.gamma == gamma && row.chart == kCharts[ch])
          vals.push_back(row.power);
      med[static_cast<std::size_t>(ch)] = median(vals);
    }
    result.median_by_gamma.push_back(med);
  }
  return result;
}

void write_power_csv(const PowerStudyResult& res, const std::string& path) {
  CsvWriter w(path);
  w.row("gamma", "replicate", "chart", "power", "error");
  for (const auto& r : res.rows) {
    if (r.failed)
      w.row(r.gamma, r.replicate, r.chart, "", r.error);
    else
      w.row(r.gamma, r.replicate, r.chart, r.power, "");
  }
}

void write_power_summary_csv(const PowerStudyResult& res, const std::vector<double>& gammas,
                             const std::string& path) {
  CsvWriter w(path);
  w.row("gamma", "chart", "median_power");
  static const char* kCharts[4] = {"swma-theta", "swma-sigma", "swma-m", "rwma"};
  for (std::size_t gi = 0; gi < gammas.size(); ++gi)
    for (int ch = 0; ch < 4; ++ch)
      w.row(gammas[gi], kCharts[ch], res.median_by_gamma[gi][static_cast<std::size_t>(ch)]);
}

nlohmann::json arspec_to_json(const ArSpec& s) {
  nlohmann::json j;
  j["c0"] = s.c0;
  j["l_g"] = s.l_g;
  std::vector<double> phi;
  for (Eigen::Index r = 0; r < s.phi.rows(); ++r)
    for (Eigen::Index c = 0; c < s.phi.cols(); ++c) phi.push_back(s.phi(r, c));
  j["phi_row_major"] = phi;
  j["sigma_ar"] = s.sigma_ar;
  j["transform"] = s.transform == PixelTransform::identity ? "identity" : "clamped-exp";
  j["seed"] = s.seed;
  j["burn_margin"] = s.burn_margin;
  return j;
}

ArSpec arspec_from_json(const nlohmann::json& j) {
  ArSpec s;
  s.c0 = j.value("c0", 1.0);
  s.l_g = j.value("l_g", 2);
  s.sigma_ar = j.value("sigma_ar", 0.01);
  const std::string tr = j.value("transform", "identity");
  if (tr == "identity")
    s.transform = PixelTransform::identity;
  else if (tr == "clamped-exp")
    s.transform = PixelTransform::clamped_exp;
  else
    throw std::runtime_error("unknown transform: " + tr);
  s.seed = j.value("seed", 0ULL);
  s.burn_margin = j.value("burn_margin", 64);
  const std::vector<double> phi = j.at("phi_row_major");
  const int side = s.l_g + 1;
  if (static_cast<int>(phi.size()) != side * side)
    throw std::runtime_error("phi_row_major must have (l_g+1)^2 entries");
  s.phi.resize(side, side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) s.phi(r, c) = phi[static_cast<std::size_t>(r) * side + c];
  return s;
}

}  // namespace microscore
