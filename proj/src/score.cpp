#include "microscore/score.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "microscore/csv.hpp"

namespace microscore {

std::vector<ScoreField> compute_scores(const FittedModel& m, const PixelDataset& d) {
  if (d.x.cols() != m.input_dim) throw std::invalid_argument("dimension mismatch");
  if (!(m.sigma_hat > 0.0)) throw std::invalid_argument("sigma_hat must be positive");
  const double s = m.sigma_hat;
  const double inv_s2 = 1.0 / (s * s);

  const int margin = d.spec.length_scale;
  const Eigen::Index P = m.theta.size();

  std::vector<ScoreField> fields(d.sources.size());
  for (std::size_t img = 0; img < d.sources.size(); ++img) {
    auto& f = fields[img];
    f.rows = d.sources[img].rows;
    f.cols = d.sources[img].cols;
    f.margin = margin;
    f.source_id = d.sources[img].id;
    f.model_id = m.id();
    const Eigen::Index npix =
        static_cast<Eigen::Index>(f.interior_rows()) * f.interior_cols();
    f.s_theta.resize(npix, P);
    f.s_sigma.resize(npix);
    f.residual.resize(npix);
  }

  Eigen::VectorXd resid = d.y - predict_batch(m, d.x);

  if (m.family.kind == ModelKind::linear) {
    // grad g = [x; 1], so scores vectorize per image block
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      auto& f = fields[static_cast<std::size_t>(d.image(i))];
      const Eigen::Index p = static_cast<Eigen::Index>(d.row(i) - margin) * f.interior_cols() +
                             (d.col(i) - margin);
      const double r = resid(i);
      f.residual(p) = r;
      f.s_sigma(p) = -1.0 / s + r * r / (s * s * s);
      f.s_theta.row(p).head(m.input_dim) = (r * inv_s2) * d.x.row(i);
      f.s_theta(p, m.input_dim) = r * inv_s2;
    }
  } else {
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      auto& f = fields[static_cast<std::size_t>(d.image(i))];
      const Eigen::Index p = static_cast<Eigen::Index>(d.row(i) - margin) * f.interior_cols() +
                             (d.col(i) - margin);
      const double r = resid(i);
      f.residual(p) = r;
      f.s_sigma(p) = -1.0 / s + r * r / (s * s * s);
      f.s_theta.row(p) = (r * inv_s2) * gradient_theta(m, d.x.row(i).transpose()).transpose();
    }
  }
  return fields;
}

ReferenceStats training_reference_stats(std::span<const ScoreField> fields) {
  Eigen::Index total = 0;
  for (const auto& f : fields) total += f.size();
  if (total < 2) throw std::invalid_argument("fewer than 2 pixels");
  const Eigen::Index P = fields.front().s_theta.cols();

  ReferenceStats st;
  st.count = total;

  // two-pass: exact mean first, then centered accumulation; the per-field
  // partial sums combine associatively
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(P);
  double smean = 0.0;
  for (const auto& f : fields) {
    mean += f.s_theta.colwise().sum();
    smean += f.s_sigma.sum();
  }
  mean /= static_cast<double>(total);
  smean /= static_cast<double>(total);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(P, P);
  double svar = 0.0;
  std::vector<double> residuals;
  residuals.reserve(static_cast<std::size_t>(total));
  for (const auto& f : fields) {
    Eigen::MatrixXd centered = f.s_theta.rowwise() - mean.transpose();
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0);
    svar += (f.s_sigma.array() - smean).square().sum();
    residuals.insert(residuals.end(), f.residual.data(), f.residual.data() + f.residual.size());
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  st.s_bar_theta = mean;
  st.sigma_theta = cov / static_cast<double>(total - 1);
  st.s_sigma_mean = smean;
  st.s_sigma_std = std::sqrt(svar / static_cast<double>(total - 1));

  std::sort(residuals.begin(), residuals.end());
  st.residual_quantiles.resize(1001);
  for (int i = 0; i <= 1000; ++i) {
    const auto idx = static_cast<std::size_t>(
        std::min<long long>(static_cast<long long>(residuals.size()) - 1,
                            static_cast<long long>(i) * (static_cast<long long>(residuals.size()) - 1) / 1000));
    st.residual_quantiles(i) = residuals[idx];
  }
  return st;
}

ReferenceStats training_reference_stats(const ScoreField& field) {
  return training_reference_stats(std::span<const ScoreField>(&field, 1));
}

void write_scorefield_csv(const ScoreField& field, const std::string& path) {
  CsvWriter w(path);
  std::string header = "r,c,residual,s_sigma";
  for (Eigen::Index j = 0; j < field.s_theta.cols(); ++j)
    header += ",s_theta_" + std::to_string(j + 1);
  w.row(header);
  const int ic = field.interior_cols();
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    std::string line = std::to_string(field.margin + static_cast<int>(i) / ic) + "," +
                       std::to_string(field.margin + static_cast<int>(i) % ic) + "," +
                       format_double(field.residual(i)) + "," + format_double(field.s_sigma(i));
    for (Eigen::Index j = 0; j < field.s_theta.cols(); ++j)
      line += "," + format_double(field.s_theta(i, j));
    w.row(line);
  }
}

}  // namespace microscore
