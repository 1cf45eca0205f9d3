#include "microscore/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "microscore/rng.hpp"

namespace microscore {

PcaProjection pca_top3(const Eigen::Ref<const Eigen::MatrixXd>& z) {
  const Eigen::Index n = z.rows();
  const Eigen::Index p = z.cols();
  if (n < 4) throw std::invalid_argument("fewer pixels than required for PCA");

  Eigen::RowVectorXd mean = z.colwise().mean();
  Eigen::MatrixXd centered = z.rowwise() - mean;
  Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");

  // eigenvalues ascend; take the top three, padding below 3 dims
  const double total = std::max(eig.eigenvalues().array().max(0.0).sum(),
                                std::numeric_limits<double>::min());
  PcaProjection out;
  out.components = Eigen::MatrixXd::Zero(p, 3);
  out.explained_shares.setZero();
  for (int j = 0; j < 3; ++j) {
    if (static_cast<Eigen::Index>(j) >= p) break;
    const Eigen::Index src = p - 1 - j;
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    // canonical sign: largest-magnitude loading positive
    Eigen::Index imax;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0.0) v = -v;
    out.components.col(j) = v;
    out.explained_shares(j) = std::max(eig.eigenvalues()(src), 0.0) / total;
  }

  out.scores = centered * out.components;
  out.rgb.resize(n, 3);
  for (int j = 0; j < 3; ++j) {
    const double lo = out.scores.col(j).minCoeff();
    const double hi = out.scores.col(j).maxCoeff();
    const double span = hi > lo ? hi - lo : 1.0;
    out.rgb.col(j) = (out.scores.col(j).array() - lo) / span;
  }
  out.magnitude = z.rowwise().norm();
  return out;
}

namespace {

Eigen::VectorXi assign_labels(const Eigen::Ref<const Eigen::MatrixXd>& z,
                              const Eigen::MatrixXd& centroids, double* inertia) {
  // squared distances via |z|^2 - 2 z.c + |c|^2; |z|^2 drops out of argmin
  Eigen::MatrixXd cross = z * centroids.transpose();          // n x k
  Eigen::VectorXd c2 = centroids.rowwise().squaredNorm();     // k
  Eigen::VectorXi labels(z.rows());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index best = 0;
    double bestv = c2(0) - 2.0 * cross(i, 0);
    for (Eigen::Index j = 1; j < centroids.rows(); ++j) {
      const double v = c2(j) - 2.0 * cross(i, j);
      if (v < bestv) {
        bestv = v;
        best = j;
      }
    }
    labels(i) = static_cast<int>(best);
    if (inertia) acc += std::max(0.0, bestv + z.row(i).squaredNorm());
  }
  if (inertia) *inertia = acc;
  return labels;
}

Eigen::MatrixXd kmeanspp_init(const Eigen::Ref<const Eigen::MatrixXd>& z, int k,
                              std::mt19937_64& gen) {
  const Eigen::Index n = z.rows();
  Eigen::MatrixXd centroids(k, z.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centroids.row(0) = z.row(first(gen));
  Eigen::VectorXd d2 =
      (z.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int j = 1; j < k; ++j) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(gen), run = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        run += d2(i);
        if (run >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(gen);
    }
    centroids.row(j) = z.row(pick);
    d2 = d2.cwiseMin((z.rowwise() - centroids.row(j)).rowwise().squaredNorm());
  }
  return centroids;
}

}  // namespace

PhaseLabeling cluster_scores(const Eigen::Ref<const Eigen::MatrixXd>& z, int k,
                             std::uint64_t seed, int restarts, int max_iters) {
  const Eigen::Index n = z.rows();
  if (n == 0) throw std::invalid_argument("empty field");
  if (k < 1 || static_cast<Eigen::Index>(k) > n)
    throw std::invalid_argument("k must be in [1, pixel count]");

  PhaseLabeling best;
  best.inertia = std::numeric_limits<double>::infinity();

  for (int rs = 0; rs < restarts; ++rs) {
    std::mt19937_64 gen(rng::derive(seed, 0x6b6d /* "km" */, static_cast<std::uint64_t>(rs)));
    Eigen::MatrixXd centroids = kmeanspp_init(z, k, gen);
    Eigen::VectorXi labels = Eigen::VectorXi::Constant(n, -1);
    std::vector<double> trace;
    double inertia = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iters; ++it) {
      Eigen::VectorXi next = assign_labels(z, centroids, &inertia);
      trace.push_back(inertia);
      const bool stable = (next.array() == labels.array()).all();
      labels = next;
      if (stable) break;
      // update step; empty clusters keep their previous centroid
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, z.cols());
      Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
      for (Eigen::Index i = 0; i < n; ++i) {
        sums.row(labels(i)) += z.row(i);
        counts(labels(i)) += 1.0;
      }
      for (int j = 0; j < k; ++j)
        if (counts(j) > 0.0) centroids.row(j) = sums.row(j) / counts(j);
    }
    if (inertia < best.inertia) {
      best.inertia = inertia;
      best.labels = labels;
      best.centroids = centroids;
      best.inertia_trace = std::move(trace);
    }
  }

  // canonical labels: descending cluster size, ties by original index
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(best.labels(i))];
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return counts[static_cast<std::size_t>(a)] > counts[static_cast<std::size_t>(b)];
  });
  std::vector<int> remap(static_cast<std::size_t>(k));
  for (int pos = 0; pos < k; ++pos) remap[static_cast<std::size_t>(order[pos])] = pos;
  Eigen::MatrixXd reordered(k, z.cols());
  for (int j = 0; j < k; ++j) reordered.row(remap[static_cast<std::size_t>(j)]) = best.centroids.row(j);
  best.centroids = reordered;
  for (Eigen::Index i = 0; i < n; ++i)
    best.labels(i) = remap[static_cast<std::size_t>(best.labels(i))];

  best.k = k;
  best.seed = seed;
  return best;
}

int estimate_k_hint(const PcaProjection& p) {
  const Eigen::Index n = p.magnitude.size();
  if (n == 0) return 0;
  const double lo = p.magnitude.minCoeff();
  const double hi = p.magnitude.maxCoeff();
  if (!(hi > lo)) return 1;

  constexpr int kBins = 64;
  Eigen::VectorXd hist = Eigen::VectorXd::Zero(kBins);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto b = static_cast<int>((p.magnitude(i) - lo) / (hi - lo) * kBins);
    hist(std::clamp(b, 0, kBins - 1)) += 1.0;
  }
  // fixed-width box smoothing, three passes
  for (int pass = 0; pass < 3; ++pass) {
    Eigen::VectorXd sm(kBins);
    for (int b = 0; b < kBins; ++b) {
      double acc = 0.0;
      int cnt = 0;
      for (int d = -2; d <= 2; ++d) {
        const int idx = b + d;
        if (idx >= 0 && idx < kBins) {
          acc += hist(idx);
          ++cnt;
        }
      }
      sm(b) = acc / cnt;
    }
    hist = sm;
  }
  const double floor_count = 0.05 * hist.maxCoeff();
  int peaks = 0;
  for (int b = 0; b < kBins; ++b) {
    const double l = b > 0 ? hist(b - 1) : -1.0;
    const double r = b < kBins - 1 ? hist(b + 1) : -1.0;
    if (hist(b) > l && hist(b) >= r && hist(b) > floor_count) ++peaks;
  }
  return std::max(peaks, 1);
}

namespace {

// Hungarian algorithm (Jonker-Volgenant potentials), O(k^3) minimization.
std::vector<int> hungarian_min(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<double> u(static_cast<std::size_t>(n) + 1), v(static_cast<std::size_t>(n) + 1);
  std::vector<int> p(static_cast<std::size_t>(n) + 1), way(static_cast<std::size_t>(n) + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1,
                             std::numeric_limits<double>::infinity());
    std::vector<char> used(static_cast<std::size_t>(n) + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = std::numeric_limits<double>::infinity();
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> match(static_cast<std::size_t>(n));  // row -> column
  for (int j = 1; j <= n; ++j)
    if (p[static_cast<std::size_t>(j)] > 0) match[static_cast<std::size_t>(p[static_cast<std::size_t>(j)]) - 1] = j - 1;
  return match;
}

// Confusion-matrix based best-permutation agreement over masked pixels.
double matched_agreement(const Eigen::VectorXi& a, const Eigen::VectorXi& b,
                         const std::vector<char>& mask) {
  int ka = 0, kb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!mask.empty() && !mask[static_cast<std::size_t>(i)]) continue;
    ka = std::max(ka, a(i) + 1);
    kb = std::max(kb, b(i) + 1);
  }
  const int k = std::max({ka, kb, 1});
  Eigen::MatrixXd confusion = Eigen::MatrixXd::Zero(k, k);
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!mask.empty() && !mask[static_cast<std::size_t>(i)]) continue;
    confusion(a(i), b(i)) += 1.0;
    total += 1.0;
  }
  if (total == 0.0) return 1.0;
  const std::vector<int> match = hungarian_min(-confusion);  // maximize agreement
  double agree = 0.0;
  for (int j = 0; j < k; ++j) agree += confusion(j, match[static_cast<std::size_t>(j)]);
  return agree / total;
}

}  // namespace

double segmentation_accuracy(const Eigen::VectorXi& labels, const Eigen::VectorXi& truth,
                             int rows, int cols, int boundary_margin) {
  if (labels.size() != truth.size() ||
      labels.size() != static_cast<Eigen::Index>(rows) * cols)
    throw std::invalid_argument("label/truth shape mismatch");

  // exclude pixels whose truth neighborhood is not single-valued
  std::vector<char> mask(static_cast<std::size_t>(labels.size()), 1);
  if (boundary_margin > 0) {
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const int t = truth(static_cast<Eigen::Index>(r) * cols + c);
        bool interiorish = true;
        for (int dr = -boundary_margin; dr <= boundary_margin && interiorish; ++dr) {
          const int rr = r + dr;
          if (rr < 0 || rr >= rows) continue;
          for (int dc = -boundary_margin; dc <= boundary_margin; ++dc) {
            const int cc = c + dc;
            if (cc < 0 || cc >= cols) continue;
            if (truth(static_cast<Eigen::Index>(rr) * cols + cc) != t) {
              interiorish = false;
              break;
            }
          }
        }
        mask[static_cast<std::size_t>(r) * cols + c] = interiorish;
      }
    }
  }
  return matched_agreement(labels, truth, mask);
}

double label_agreement(const Eigen::VectorXi& a, const Eigen::VectorXi& b) {
  if (a.size() != b.size()) throw std::invalid_argument("label shape mismatch");
  return matched_agreement(a, b, {});
}

}  // namespace microscore
