#pragma once

// Spectral clustering on a learned coefficient matrix.
//
//   S = (|Z| + |Z'|) / 2,  L = diag(S 1) - S
//   F = eigenvectors of L for the c smallest eigenvalues (min Tr(F'LF), F'F = I)
//   assignments = k-means on the rows of F

#include <slsp/errors.hpp>
#include <slsp/kernel.hpp>
#include <slsp/random.hpp>
#include <slsp/solver.hpp>

#include <Eigen/Eigenvalues>

#include <cstdint>
#include <limits>
#include <vector>

namespace slsp {

struct SimilarityGraph {
  Matrix weights;  // symmetric, nonnegative, zero diagonal
  Vector degree;   // row sums of weights
};

struct SpectralEmbedding {
  Matrix vectors;      // n x c, orthonormal columns
  Vector eigenvalues;  // c, nondecreasing
};

struct ClusteringResult {
  std::vector<int> assignments;
  double inertia = 0;
  std::uint64_t seed = 0;
  // Inertia after every assignment step of the winning restart.
  std::vector<double> inertia_trace;
};

struct KMeansOptions {
  int restarts = 20;
  int max_iter = 300;
  double tol = 1e-6;  // max center displacement
};

inline SimilarityGraph build_graph(const Matrix& z) {
  if (z.rows() != z.cols()) throw InputError("coefficient matrix must be square");
  if (!z.allFinite()) throw InputError("coefficient matrix contains non-finite values");
  SimilarityGraph g;
  const Matrix a = z.cwiseAbs();
  g.weights = 0.5 * (a + a.transpose());
  g.weights.diagonal().setZero();
  g.degree = g.weights.rowwise().sum();
  return g;
}

inline SimilarityGraph build_graph(const CoefficientMatrix& z) { return build_graph(z.values); }

inline Matrix laplacian(const SimilarityGraph& g) {
  Matrix l = -g.weights;
  l.diagonal() = g.degree;
  return l;
}

inline SpectralEmbedding spectral_embed(const Matrix& l, int c) {
  if (l.rows() != l.cols()) throw InputError("laplacian must be square");
  if (c < 1 || c > l.rows())
    throw InputError("spectral_embed: need 1 <= c <= n, got c = " + std::to_string(c));
  Eigen::SelfAdjointEigenSolver<Matrix> es(l);
  if (es.info() != Eigen::Success) throw ConditioningError("symmetric eigensolver failed");
  return {es.eigenvectors().leftCols(c), es.eigenvalues().head(c)};
}

namespace detail {

inline double sq_dist(const Matrix& x, Eigen::Index i, const Matrix& centers, Eigen::Index k) {
  return (x.row(i) - centers.row(k)).squaredNorm();
}

// k-means++ seeding.
inline Matrix kmeanspp_seed(const Matrix& x, int c, Rng& rng) {
  const Eigen::Index n = x.rows();
  Matrix centers(c, x.cols());
  centers.row(0) = x.row(static_cast<Eigen::Index>(uniform_index(rng, n)));
  Vector best = Vector::Constant(n, std::numeric_limits<double>::infinity());
  for (int k = 1; k < c; ++k) {
    double total = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      best(i) = std::min(best(i), sq_dist(x, i, centers, k - 1));
      total += best(i);
    }
    Eigen::Index pick = n - 1;
    if (total > 0) {
      const double r = unit_uniform(rng) * total;
      double acc = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += best(i);
        if (r < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(uniform_index(rng, n));
    }
    centers.row(k) = x.row(pick);
  }
  return centers;
}

struct LloydRun {
  std::vector<int> assignments;
  double inertia = 0;
  std::vector<double> trace;
};

inline LloydRun lloyd(const Matrix& x, Matrix centers, const KMeansOptions& opt) {
  const Eigen::Index n = x.rows();
  const int c = static_cast<int>(centers.rows());
  LloydRun run;
  run.assignments.assign(n, 0);
  Vector dist(n);
  for (int it = 0; it < opt.max_iter; ++it) {
    double inertia = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int arg = 0;
      double best = sq_dist(x, i, centers, 0);
      for (int k = 1; k < c; ++k) {
        const double d = sq_dist(x, i, centers, k);
        if (d < best) {
          best = d;
          arg = k;
        }
      }
      run.assignments[i] = arg;
      dist(i) = best;
      inertia += best;
    }
    run.trace.push_back(inertia);

    Matrix next = Matrix::Zero(c, x.cols());
    std::vector<Eigen::Index> counts(c, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      next.row(run.assignments[i]) += x.row(i);
      ++counts[run.assignments[i]];
    }
    for (int k = 0; k < c; ++k) {
      if (counts[k] > 0) {
        next.row(k) /= static_cast<double>(counts[k]);
      } else {
        // Empty cluster: move it onto the worst-served point.
        Eigen::Index far = 0;
        dist.maxCoeff(&far);
        next.row(k) = x.row(far);
        dist(far) = 0;
      }
    }
    const double shift = (next - centers).rowwise().norm().maxCoeff();
    centers = std::move(next);
    if (shift < opt.tol) break;
  }

  // Final inertia of the returned partition about its own means.
  Matrix means = Matrix::Zero(c, x.cols());
  std::vector<Eigen::Index> counts(c, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    means.row(run.assignments[i]) += x.row(i);
    ++counts[run.assignments[i]];
  }
  for (int k = 0; k < c; ++k)
    if (counts[k] > 0) means.row(k) /= static_cast<double>(counts[k]);
  run.inertia = 0;
  for (Eigen::Index i = 0; i < n; ++i) run.inertia += sq_dist(x, i, means, run.assignments[i]);
  return run;
}

}  // namespace detail

// k-means on the rows of `points`: k-means++ seeding, Lloyd iterations, best
// inertia over restarts. Restart r is seeded with derive_seed(seed, r).
inline ClusteringResult kmeans(const Matrix& points, int c, std::uint64_t seed,
                               const KMeansOptions& opt = {}) {
  const Eigen::Index n = points.rows();
  if (c < 1) throw InputError("kmeans: c must be >= 1");
  if (c > n) throw InputError("kmeans: c = " + std::to_string(c) + " exceeds n = " + std::to_string(n));
  if (opt.restarts < 1) throw InputError("kmeans: restarts must be >= 1");
  if (!points.allFinite()) throw InputError("kmeans: non-finite points");

  ClusteringResult best;
  best.seed = seed;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < opt.restarts; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    auto run = detail::lloyd(points, detail::kmeanspp_seed(points, c, rng), opt);
    if (run.inertia < best.inertia) {
      best.inertia = run.inertia;
      best.assignments = std::move(run.assignments);
      best.inertia_trace = std::move(run.trace);
    }
  }
  return best;
}

inline ClusteringResult kmeans(const SpectralEmbedding& e, int c, std::uint64_t seed, int restarts) {
  KMeansOptions opt;
  opt.restarts = restarts;
  return kmeans(e.vectors, c, seed, opt);
}

inline ClusteringResult cluster(const Matrix& z, int c, std::uint64_t seed) {
  const Matrix l = laplacian(build_graph(z));
  return kmeans(spectral_embed(l, c), c, seed, 20);
}

inline ClusteringResult cluster(const CoefficientMatrix& z, int c, std::uint64_t seed) {
  return cluster(z.values, c, seed);
}

}  // namespace slsp
