#pragma once

// Local and global consistency label propagation on a learned graph:
//
//   min_F Tr(F'LF + gamma (F - Y)'(F - Y))  =>  (L + gamma I) F = gamma Y

#include <slsp/errors.hpp>
#include <slsp/graph.hpp>
#include <slsp/metrics.hpp>
#include <slsp/random.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace slsp {

struct LabelMatrix {
  Matrix values;                  // n x c one-hot rows; unlabeled rows are zero
  std::vector<bool> labeled_mask;
};

struct PropagationResult {
  Matrix scores;                 // F
  std::vector<int> predictions;  // row argmax, ties to the lowest class
};

struct SslSummary {
  double fraction = 0;
  double mean_accuracy = 0;
  double std_accuracy = 0;  // population standard deviation over repeats
  std::vector<double> per_repeat;
};

// labels[i] in [0, c) for every sample; only rows with mask[i] set are encoded.
inline LabelMatrix make_label_matrix(const std::vector<int>& labels, const std::vector<bool>& mask,
                                     int c) {
  if (labels.size() != mask.size()) throw InputError("label / mask length mismatch");
  LabelMatrix y;
  y.values = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), c);
  y.labeled_mask = mask;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!mask[i]) continue;
    if (labels[i] < 0 || labels[i] >= c)
      throw InputError("label " + std::to_string(labels[i]) + " outside [0, " + std::to_string(c) + ")");
    y.values(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return y;
}

inline std::vector<int> row_argmax(const Matrix& f) {
  std::vector<int> out(static_cast<std::size_t>(f.rows()), 0);
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    int best = 0;
    for (Eigen::Index j = 1; j < f.cols(); ++j)
      if (f(i, j) > f(i, best)) best = static_cast<int>(j);
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

// Cholesky factor of L + gamma I, reusable across label matrices.
class LgcSolver {
 public:
  LgcSolver(const Matrix& l, double gamma) : gamma_(gamma) {
    if (!(gamma > 0) || !std::isfinite(gamma)) throw InputError("gamma must be > 0");
    if (l.rows() != l.cols()) throw InputError("laplacian must be square");
    Matrix lhs = l;
    lhs.diagonal().array() += gamma;
    llt_.compute(lhs);
    if (llt_.info() != Eigen::Success)
      throw ConditioningError("L + gamma I is not positive definite (is L PSD?)");
  }

  PropagationResult propagate(const Matrix& y) const {
    if (y.rows() != llt_.rows())
      throw InputError("label matrix has " + std::to_string(y.rows()) + " rows, graph has " +
                       std::to_string(llt_.rows()));
    PropagationResult r;
    r.scores = llt_.solve(gamma_ * y);
    r.predictions = row_argmax(r.scores);
    return r;
  }

  PropagationResult propagate(const LabelMatrix& y) const { return propagate(y.values); }

 private:
  double gamma_;
  Eigen::LLT<Matrix> llt_;
};

inline PropagationResult lgc_propagate(const Matrix& l, const LabelMatrix& y, double gamma) {
  return LgcSolver(l, gamma).propagate(y);
}

// Picks max(1, ceil(fraction * n_c)) samples of every class uniformly at
// random, without replacement.
inline std::vector<bool> stratified_mask(const std::vector<int>& labels, int c, double fraction,
                                         Rng& rng) {
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(c));
  for (std::size_t i = 0; i < labels.size(); ++i) members.at(static_cast<std::size_t>(labels[i])).push_back(i);
  std::vector<bool> mask(labels.size(), false);
  for (int k = 0; k < c; ++k) {
    auto& idx = members[static_cast<std::size_t>(k)];
    if (idx.empty()) throw InputError("class " + std::to_string(k) + " has no samples");
    const auto want = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(idx.size()) - 1e-9)));
    const std::size_t take = std::min(want, idx.size());
    // Partial Fisher-Yates.
    for (std::size_t s = 0; s < take; ++s) {
      const std::size_t j = s + static_cast<std::size_t>(uniform_index(rng, idx.size() - s));
      std::swap(idx[s], idx[j]);
      mask[idx[s]] = true;
    }
  }
  return mask;
}

// Repeated stratified-label propagation on the graph of Z; accuracy is scored
// on the unlabeled samples only. Repeat r draws its labeled set from
// derive_seed(seed, r).
inline SslSummary ssl_experiment(const Matrix& z, const std::vector<int>& labels, double fraction,
                                 int repeats, double gamma, std::uint64_t seed) {
  if (static_cast<Eigen::Index>(labels.size()) != z.rows())
    throw InputError("label count does not match Z");
  if (!(fraction > 0) || fraction > 1) throw InputError("fraction must be in (0, 1]");
  if (repeats < 1) throw InputError("repeats must be >= 1");
  if (labels.empty()) throw InputError("no labels");
  const int c = *std::max_element(labels.begin(), labels.end()) + 1;
  if (*std::min_element(labels.begin(), labels.end()) < 0) throw InputError("negative label id");

  const LgcSolver solver(laplacian(build_graph(z)), gamma);
  SslSummary out;
  out.fraction = fraction;
  for (int r = 0; r < repeats; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    const auto mask = stratified_mask(labels, c, fraction, rng);
    const auto result = solver.propagate(make_label_matrix(labels, mask, c));
    std::size_t total = 0, hit = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (mask[i]) continue;
      ++total;
      hit += result.predictions[i] == labels[i] ? 1 : 0;
    }
    if (total == 0)
      throw InputError("fraction " + std::to_string(fraction) +
                       " labels every sample; no unlabeled samples to score");
    out.per_repeat.push_back(static_cast<double>(hit) / static_cast<double>(total));
  }
  const double m = std::accumulate(out.per_repeat.begin(), out.per_repeat.end(), 0.0) /
                   static_cast<double>(repeats);
  double var = 0;
  for (double a : out.per_repeat) var += (a - m) * (a - m);
  out.mean_accuracy = m;
  out.std_accuracy = std::sqrt(var / static_cast<double>(repeats));
  return out;
}

inline SslSummary ssl_experiment(const CoefficientMatrix& z, const std::vector<int>& labels,
                                 double fraction, int repeats, double gamma, std::uint64_t seed) {
  return ssl_experiment(z.values, labels, fraction, repeats, gamma, seed);
}

}  // namespace slsp
