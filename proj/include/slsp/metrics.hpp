#pragma once

// Clustering evaluation: Kuhn-Munkres matched accuracy and normalized mutual
// information.

#include <slsp/errors.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

namespace slsp {

struct Contingency {
  Eigen::MatrixXi counts;  // distinct pred ids x distinct truth ids
  long n = 0;
};

struct Assignment {
  std::vector<int> row_to_col;  // -1 for rows left unmatched (rows > cols)
  double cost = 0;
};

namespace detail {

inline std::vector<int> densify(const std::vector<int>& ids, int& k) {
  std::map<int, int> index;
  for (int v : ids) index.emplace(v, 0);
  int next = 0;
  for (auto& [_, idx] : index) idx = next++;
  k = next;
  std::vector<int> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out[i] = index.at(ids[i]);
  return out;
}

inline void check_pair(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.empty() || truth.empty()) throw InputError("metrics need nonempty assignments");
  if (pred.size() != truth.size())
    throw InputError("prediction length " + std::to_string(pred.size()) +
                     " differs from truth length " + std::to_string(truth.size()));
}

}  // namespace detail

// Rows index the distinct predicted ids, columns the distinct true ids, both
// in increasing id order.
inline Contingency contingency(const std::vector<int>& pred, const std::vector<int>& truth) {
  detail::check_pair(pred, truth);
  int kp = 0, kt = 0;
  const auto p = detail::densify(pred, kp);
  const auto t = detail::densify(truth, kt);
  Contingency c;
  c.counts = Eigen::MatrixXi::Zero(kp, kt);
  for (std::size_t i = 0; i < p.size(); ++i) ++c.counts(p[i], t[i]);
  c.n = static_cast<long>(p.size());
  return c;
}

// Minimum-cost injective assignment of rows to columns. Rectangular inputs
// are zero-padded to square; O(k^3) shortest augmenting path with potentials.
inline Assignment hungarian(const Eigen::MatrixXd& cost) {
  if (!cost.allFinite()) throw InputError("hungarian: non-finite cost");
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  const int k = std::max(rows, cols);
  Assignment out;
  out.row_to_col.assign(rows, -1);
  if (k == 0) return out;

  auto at = [&](int i, int j) { return i < rows && j < cols ? cost(i, j) : 0.0; };
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is the virtual root.
  std::vector<double> u(k + 1, 0), v(k + 1, 0);
  std::vector<int> match(k + 1, 0), way(k + 1, 0);
  for (int i = 1; i <= k; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(k + 1, inf);
    std::vector<char> used(k + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= k; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= k; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (int j = 1; j <= k; ++j) {
    const int i = match[j] - 1;
    if (i < rows && j - 1 < cols) {
      out.row_to_col[i] = j - 1;
      out.cost += cost(i, j - 1);
    }
  }
  return out;
}

// Fraction of samples whose cluster maps onto their class under the best
// one-to-one cluster -> class mapping.
inline double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  const Contingency c = contingency(pred, truth);
  const Eigen::MatrixXd neg = -c.counts.cast<double>();
  const Assignment a = hungarian(neg);
  return -a.cost / static_cast<double>(c.n);
}

// MI(pred, truth) / max(H(pred), H(truth)) with natural logs. Both partitions
// single-cluster gives 1; exactly one single-cluster gives 0.
inline double nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
  const Contingency c = contingency(pred, truth);
  const double n = static_cast<double>(c.n);
  const Eigen::VectorXd pp = c.counts.cast<double>().rowwise().sum() / n;
  const Eigen::VectorXd pt = c.counts.cast<double>().colwise().sum().transpose() / n;

  auto entropy = [](const Eigen::VectorXd& p) {
    double h = 0;
    for (double v : p)
      if (v > 0) h -= v * std::log(v);
    return h;
  };
  const double hp = entropy(pp), ht = entropy(pt);
  if (c.counts.rows() == 1 && c.counts.cols() == 1) return 1.0;
  if (c.counts.rows() == 1 || c.counts.cols() == 1) return 0.0;

  double mi = 0;
  for (Eigen::Index i = 0; i < c.counts.rows(); ++i)
    for (Eigen::Index j = 0; j < c.counts.cols(); ++j) {
      if (c.counts(i, j) == 0) continue;
      const double pij = c.counts(i, j) / n;
      mi += pij * std::log(pij / (pp(i) * pt(j)));
    }
  return std::clamp(mi / std::max(hp, ht), 0.0, 1.0);
}

}  // namespace slsp
