#pragma once

// ADMM solver for kernel self-expression with a similarity-preserving term:
//
//   min_Z  1/2 Tr(K - 2KZ + Z'KZ) + alpha |K - Z'KZ|_F^2 + beta rho(Z)
//   s.t.   diag(Z) = 0
//
// rho is the nuclear norm (low_rank) or the entrywise l1 norm (sparse).
// The quartic term is split with three copies J = W = H = Z:
//
//   1/2 Tr(K - 2KJ + J'KJ) + alpha |K - W'KH|_F^2 + beta rho(Z)
//
// and each block is updated in closed form, followed by dual ascent on the
// multipliers Y1, Y2, Y3 with a fixed penalty mu.

#include <slsp/errors.hpp>
#include <slsp/kernel.hpp>
#include <slsp/random.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace slsp {

enum class Regularizer { low_rank, sparse };

inline std::string_view regularizer_name(Regularizer r) {
  return r == Regularizer::low_rank ? "lowrank" : "sparse";
}

inline Regularizer parse_regularizer(std::string_view s) {
  if (s == "lowrank" || s == "low_rank" || s == "r") return Regularizer::low_rank;
  if (s == "sparse" || s == "s") return Regularizer::sparse;
  throw InputError("unknown regularizer '" + std::string(s) + "' (expected lowrank|sparse)");
}

struct SolverConfig {
  double alpha = 0.1;  // similarity-preserving weight
  double beta = 0.1;   // regularizer weight
  double mu = 1.0;     // ADMM penalty, held fixed
  Regularizer regularizer = Regularizer::sparse;
  int max_iter = 300;
  double tol = 1e-5;   // on the relative change of Z
  std::uint64_t seed = 0;
  // Record the objective every iteration. Costs one extra SVD per iteration
  // for the low-rank regularizer.
  bool track_objective = true;

  void validate() const {
    if (!(alpha >= 0) || !std::isfinite(alpha)) throw InputError("alpha must be >= 0");
    if (!(beta > 0) || !std::isfinite(beta)) throw InputError("beta must be > 0");
    if (!(mu > 0) || !std::isfinite(mu)) throw InputError("mu must be > 0");
    if (max_iter < 1) throw InputError("max_iter must be >= 1");
    if (!(tol > 0)) throw InputError("tol must be > 0");
  }
};

struct IterationRecord {
  double j_residual = 0;  // |J - Z|_F
  double w_residual = 0;  // |W - Z|_F
  double h_residual = 0;  // |H - Z|_F
  double objective = 0;   // NaN when not tracked
  double rel_change = 0;
};

struct SolverState {
  Matrix J, W, H, Z;
  Matrix Y1, Y2, Y3;
  int iter = 0;
  double rel_change = 0;
  std::vector<IterationRecord> residuals;
};

struct CoefficientMatrix {
  Matrix values;
  Regularizer regularizer = Regularizer::sparse;
  bool converged = false;
  int iterations = 0;
};

struct SolveResult {
  CoefficientMatrix z;
  SolverState state;
};

namespace detail {

inline void require_square(const Matrix& m, Eigen::Index n, const char* what) {
  if (m.rows() != n || m.cols() != n)
    throw InputError(std::string(what) + " must be " + std::to_string(n) + "x" +
                     std::to_string(n) + ", got " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()));
}

// Solves A X = B for symmetric positive-definite A.
inline Matrix spd_solve(const Matrix& lhs, const Matrix& rhs, const char* what) {
  Eigen::LLT<Matrix> llt(lhs);
  if (llt.info() != Eigen::Success)
    throw ConditioningError(std::string(what) + ": left-hand side is not positive definite");
  return llt.solve(rhs);
}

inline double regularizer_value(const Matrix& z, Regularizer reg) {
  if (reg == Regularizer::sparse) return z.cwiseAbs().sum();
  Eigen::BDCSVD<Matrix> svd(z);
  return svd.singularValues().sum();
}

}  // namespace detail

// 1/2 Tr(K - 2KZ + Z'KZ) + alpha |K - Z'KZ|_F^2, the differentiable part.
inline double smooth_objective(const Matrix& k, const Matrix& z, double alpha) {
  const Matrix kz = k * z;
  const Matrix recon = z.transpose() * kz;
  return 0.5 * (k.trace() - 2.0 * kz.trace() + recon.trace()) + alpha * (k - recon).squaredNorm();
}

// Gradient of smooth_objective for symmetric K. With R = K - Z'KZ (symmetric):
//   d/dZ 1/2 Tr(K - 2KZ + Z'KZ) = KZ - K
//   d/dZ alpha |R|_F^2          = -2 alpha (KZR' + KZR) = -4 alpha KZR
inline Matrix smooth_gradient(const Matrix& k, const Matrix& z, double alpha) {
  const Matrix kz = k * z;
  const Matrix r = k - z.transpose() * kz;
  return kz - k - 2.0 * alpha * (kz * r.transpose() + kz * r);
}

inline double evaluate_objective(const Matrix& k, const Matrix& z, double alpha, double beta,
                                 Regularizer reg) {
  detail::require_square(k, k.rows(), "K");
  detail::require_square(z, k.rows(), "Z");
  return smooth_objective(k, z, alpha) + beta * detail::regularizer_value(z, reg);
}

// J = (K + mu I)^{-1} (K + mu Z - Y1), given a factorization of K + mu I.
inline Matrix update_J(const Eigen::LLT<Matrix>& k_plus_mu, const Matrix& k, const Matrix& z,
                       const Matrix& y1, double mu) {
  return k_plus_mu.solve(k + mu * z - y1);
}

inline Matrix update_J(const Matrix& k, const Matrix& z, const Matrix& y1, double mu) {
  const Eigen::Index n = k.rows();
  detail::require_square(k, n, "K");
  detail::require_square(z, n, "Z");
  detail::require_square(y1, n, "Y1");
  Eigen::LLT<Matrix> llt(k + mu * Matrix::Identity(n, n));
  if (llt.info() != Eigen::Success)
    throw ConditioningError("update_J: K + mu I is not positive definite; increase mu");
  return update_J(llt, k, z, y1, mu);
}

// W = (2 alpha K H H' K' + mu I)^{-1} (2 alpha K H K' + mu Z - Y2)
inline Matrix update_W(const Matrix& k, const Matrix& h, const Matrix& z, const Matrix& y2,
                       double mu, double alpha) {
  const Eigen::Index n = k.rows();
  detail::require_square(h, n, "H");
  detail::require_square(z, n, "Z");
  detail::require_square(y2, n, "Y2");
  if (alpha == 0.0) return z - y2 / mu;
  const Matrix kh = k * h;
  Matrix lhs = 2.0 * alpha * kh * kh.transpose();
  lhs.diagonal().array() += mu;
  return detail::spd_solve(lhs, 2.0 * alpha * kh * k.transpose() + mu * z - y2, "update_W");
}

// H = (2 alpha K' W W' K + mu I)^{-1} (2 alpha K' W K + mu Z - Y3)
inline Matrix update_H(const Matrix& k, const Matrix& w, const Matrix& z, const Matrix& y3,
                       double mu, double alpha) {
  const Eigen::Index n = k.rows();
  detail::require_square(w, n, "W");
  detail::require_square(z, n, "Z");
  detail::require_square(y3, n, "Y3");
  if (alpha == 0.0) return z - y3 / mu;
  const Matrix ktw = k.transpose() * w;
  Matrix lhs = 2.0 * alpha * ktw * ktw.transpose();
  lhs.diagonal().array() += mu;
  return detail::spd_solve(lhs, 2.0 * alpha * ktw * k + mu * z - y3, "update_H");
}

// Singular value thresholding: U diag(max(sigma - tau, 0)) V'.
inline Matrix prox_nuclear(const Matrix& d, double tau) {
  if (!d.allFinite()) throw InputError("prox_nuclear: non-finite input");
  if (tau < 0) throw InputError("prox_nuclear: tau must be >= 0");
  Eigen::BDCSVD<Matrix> svd(d, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw ConditioningError("prox_nuclear: SVD failed");
  const Vector shrunk = (svd.singularValues().array() - tau).max(0.0).matrix();
  return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
}

// Soft thresholding, entrywise max(|d| - tau, 0) sign(d).
inline Matrix prox_l1(const Matrix& d, double tau) {
  if (!d.allFinite()) throw InputError("prox_l1: non-finite input");
  if (tau < 0) throw InputError("prox_l1: tau must be >= 0");
  return d.unaryExpr([tau](double v) {
    const double m = std::abs(v) - tau;
    return m > 0 ? std::copysign(m, v) : 0.0;
  });
}

inline double soft_threshold(double v, double tau) {
  const double m = std::abs(v) - tau;
  return m > 0 ? std::copysign(m, v) : 0.0;
}

// Z = prox_{beta/(3 mu)}(D), D = (J + W + H + (Y1 + Y2 + Y3)/mu) / 3, then
// diag(Z) is set to zero.
inline Matrix update_Z(const Matrix& j, const Matrix& w, const Matrix& h, const Matrix& y1,
                       const Matrix& y2, const Matrix& y3, double mu, double beta,
                       Regularizer reg) {
  const Matrix d = (j + w + h + (y1 + y2 + y3) / mu) / 3.0;
  const double tau = beta / (3.0 * mu);
  Matrix z = reg == Regularizer::low_rank ? prox_nuclear(d, tau) : prox_l1(d, tau);
  z.diagonal().setZero();
  return z;
}

inline void update_multipliers(SolverState& s, double mu) {
  s.Y1 += mu * (s.J - s.Z);
  s.Y2 += mu * (s.W - s.Z);
  s.Y3 += mu * (s.H - s.Z);
}

// Runs ADMM from H, Z ~ U[0, 1/n] (seeded), Y = 0 until the relative change of
// Z drops below tol or max_iter iterations have run.
inline SolveResult solve(const Matrix& k, const SolverConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = k.rows();
  if (n == 0 || k.cols() != n) throw InputError("kernel must be square and nonempty");
  if (!k.allFinite()) throw InputError("kernel contains non-finite values");
  const double sym_err = (k - k.transpose()).cwiseAbs().maxCoeff();
  if (sym_err > 1e-10 * std::max(1.0, k.cwiseAbs().maxCoeff()))
    throw InputError("kernel is not symmetric (max asymmetry " + std::to_string(sym_err) + ")");

  const double lambda_min = Eigen::SelfAdjointEigenSolver<Matrix>(k, Eigen::EigenvaluesOnly)
                                .eigenvalues()
                                .minCoeff();
  if (cfg.mu <= -lambda_min + 1e-8)
    throw ConditioningError("mu = " + std::to_string(cfg.mu) +
                            " does not exceed -lambda_min(K) = " + std::to_string(-lambda_min));
  Eigen::LLT<Matrix> k_plus_mu(k + cfg.mu * Matrix::Identity(n, n));
  if (k_plus_mu.info() != Eigen::Success)
    throw ConditioningError("K + mu I could not be factorized");

  SolverState s;
  Rng rng(cfg.seed);
  const double init_scale = 1.0 / static_cast<double>(n);
  s.H.resize(n, n);
  s.Z.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) s.H(i, j) = init_scale * unit_uniform(rng);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) s.Z(i, j) = init_scale * unit_uniform(rng);
  s.Z.diagonal().setZero();
  s.Y1 = s.Y2 = s.Y3 = Matrix::Zero(n, n);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    s.iter = it;
    const Matrix z_prev = s.Z;
    s.J = update_J(k_plus_mu, k, s.Z, s.Y1, cfg.mu);
    s.W = update_W(k, s.H, s.Z, s.Y2, cfg.mu, cfg.alpha);
    s.H = update_H(k, s.W, s.Z, s.Y3, cfg.mu, cfg.alpha);
    if (!s.J.allFinite() || !s.W.allFinite() || !s.H.allFinite())
      throw DivergenceError("ADMM iterate became non-finite", it);
    s.Z = update_Z(s.J, s.W, s.H, s.Y1, s.Y2, s.Y3, cfg.mu, cfg.beta, cfg.regularizer);
    update_multipliers(s, cfg.mu);
    if (!s.Z.allFinite() || !s.Y1.allFinite() || !s.Y2.allFinite() || !s.Y3.allFinite())
      throw DivergenceError("ADMM iterate became non-finite", it);

    s.rel_change = (s.Z - z_prev).norm() / std::max(z_prev.norm(), 1e-12);
    IterationRecord rec;
    rec.j_residual = (s.J - s.Z).norm();
    rec.w_residual = (s.W - s.Z).norm();
    rec.h_residual = (s.H - s.Z).norm();
    rec.objective = cfg.track_objective
                        ? evaluate_objective(k, s.Z, cfg.alpha, cfg.beta, cfg.regularizer)
                        : nan;
    rec.rel_change = s.rel_change;
    s.residuals.push_back(rec);

    if (s.rel_change < cfg.tol) {
      converged = true;
      break;
    }
  }

  SolveResult out;
  out.z.values = s.Z;
  out.z.regularizer = cfg.regularizer;
  out.z.converged = converged;
  out.z.iterations = s.iter;
  out.state = std::move(s);
  return out;
}

inline SolveResult solve(const KernelMatrix& k, const SolverConfig& cfg) { return solve(k.values, cfg); }

}  // namespace slsp
