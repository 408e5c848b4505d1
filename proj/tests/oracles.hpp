#pragma once

// Test-only reference implementations. Nothing here calls the ADMM updates;
// the projected-gradient reference only shares the smooth objective, its
// gradient and soft thresholding with the library.

#include <slsp/kernel.hpp>
#include <slsp/solver.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <random>
#include <vector>

namespace oracle {

using slsp::Matrix;

// Wishart-type random PSD matrix A A' / n with standard normal A.
inline Matrix random_psd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const Matrix a = Matrix::NullaryExpr(n, n, [&] { return g(rng); });
  return a * a.transpose() / static_cast<double>(n);
}

inline Matrix random_matrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  return Matrix::NullaryExpr(rows, cols, [&] { return g(rng); });
}

// Two isotropic blobs with unit sigma, centers `separation` apart along the
// first axis. First half label 0, second half label 1.
inline slsp::Dataset two_blobs(int n, int m, double separation, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  slsp::Dataset d;
  d.features.resize(n, m);
  d.labels = std::vector<int>(static_cast<std::size_t>(n));
  d.num_classes = 2;
  for (int i = 0; i < n; ++i) {
    const int label = i < n / 2 ? 0 : 1;
    for (int j = 0; j < m; ++j) d.features(i, j) = g(rng) + (j == 0 ? label * separation : 0.0);
    (*d.labels)[static_cast<std::size_t>(i)] = label;
  }
  return d;
}

// Central finite-difference gradient of the smooth objective.
inline Matrix fd_gradient(const Matrix& k, const Matrix& z, double alpha, double h = 1e-6) {
  Matrix g(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      Matrix zp = z, zm = z;
      zp(i, j) += h;
      zm(i, j) -= h;
      g(i, j) = (slsp::smooth_objective(k, zp, alpha) - slsp::smooth_objective(k, zm, alpha)) / (2 * h);
    }
  return g;
}

// Proximal gradient on f(Z) + beta |Z|_1 with diag(Z) = 0, backtracking line
// search (step doubled optimistically each iteration, then halved until the
// quadratic upper bound holds).
inline Matrix projected_gradient_l1(const Matrix& k, double alpha, double beta, Matrix z, int iterations) {
  z.diagonal().setZero();
  double step = 1.0;
  for (int it = 0; it < iterations; ++it) {
    const Matrix g = slsp::smooth_gradient(k, z, alpha);
    const double f = slsp::smooth_objective(k, z, alpha);
    step *= 2.0;
    for (int bt = 0; bt < 80; ++bt) {
      Matrix next = slsp::prox_l1(z - step * g, step * beta);
      next.diagonal().setZero();
      const Matrix d = next - z;
      if (slsp::smooth_objective(k, next, alpha) <= f + g.cwiseProduct(d).sum() + d.squaredNorm() / (2 * step)) {
        z = std::move(next);
        break;
      }
      step *= 0.5;
    }
  }
  return z;
}

// Exhaustive: best agreement over every injective map pred id -> truth id
// (or truth id -> pred id when pred has more clusters).
inline double brute_force_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  std::vector<int> p_ids(std::set<int>(pred.begin(), pred.end()).size());
  std::vector<int> t_ids(std::set<int>(truth.begin(), truth.end()).size());
  {
    std::set<int> ps(pred.begin(), pred.end()), ts(truth.begin(), truth.end());
    std::copy(ps.begin(), ps.end(), p_ids.begin());
    std::copy(ts.begin(), ts.end(), t_ids.begin());
  }
  // Pad the smaller side with sentinel ids that match nothing.
  const std::size_t k = std::max(p_ids.size(), t_ids.size());
  while (t_ids.size() < k) t_ids.push_back(-1000 - static_cast<int>(t_ids.size()));
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::map<int, int> map;
    for (std::size_t i = 0; i < p_ids.size(); ++i) map[p_ids[i]] = t_ids[perm[i]];
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += map[pred[i]] == truth[i];
    best = std::max(best, hit);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(pred.size());
}

// NMI straight from the joint distribution of sample pairs.
inline double reference_nmi(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  std::map<int, double> pa, pb;
  std::map<std::pair<int, int>, double> pab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1 / n;
    pb[b[i]] += 1 / n;
    pab[{a[i], b[i]}] += 1 / n;
  }
  double mi = 0, ha = 0, hb = 0;
  for (auto& [key, p] : pab) mi += p * std::log(p / (pa[key.first] * pb[key.second]));
  for (auto& [_, p] : pa) ha -= p * std::log(p);
  for (auto& [_, p] : pb) hb -= p * std::log(p);
  return mi / std::max(ha, hb);
}

// Every labelling of n samples with ids in [0, k).
inline std::vector<std::vector<int>> all_labellings(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n, 0);
  while (true) {
    out.push_back(cur);
    int i = 0;
    while (i < n && ++cur[i] == k) cur[i++] = 0;
    if (i == n) break;
  }
  return out;
}

}  // namespace oracle
