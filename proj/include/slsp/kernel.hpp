#pragma once

// Kernel matrices over a row-major dataset.
//
// Samples are stored as rows: `features` is n x m (n samples, m dimensions).
// Every formula below is written for that convention, so x_i is row i.

#include <slsp/errors.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slsp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Dataset {
  Matrix features;                  // n x m
  std::optional<std::vector<int>> labels;  // dense ids in [0, num_classes)
  int num_classes = 0;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dims() const { return features.cols(); }

  // Throws InputError when the dataset invariants do not hold.
  void validate() const {
    if (features.rows() < 2) throw InputError("dataset needs at least 2 samples");
    if (features.cols() < 1) throw InputError("dataset needs at least 1 feature");
    if (!features.allFinite()) throw InputError("dataset contains non-finite values");
    if (!labels) return;
    if (static_cast<Eigen::Index>(labels->size()) != features.rows())
      throw InputError("label count " + std::to_string(labels->size()) +
                       " does not match sample count " +
                       std::to_string(features.rows()));
    if (num_classes < 1) throw InputError("labelled dataset needs num_classes >= 1");
    std::vector<int> counts(num_classes, 0);
    for (int y : *labels) {
      if (y < 0 || y >= num_classes)
        throw InputError("label " + std::to_string(y) + " outside [0, " +
                         std::to_string(num_classes) + ")");
      ++counts[y];
    }
    for (int c = 0; c < num_classes; ++c)
      if (counts[c] == 0) throw InputError("class " + std::to_string(c) + " is empty");
  }
};

enum class KernelFamily { gaussian, linear, polynomial };

struct KernelSpec {
  KernelFamily family = KernelFamily::linear;
  double t = 1.0;  // gaussian: multiplier of d_max^2
  int a = 0;       // polynomial intercept, 0 or 1
  int b = 2;       // polynomial degree, 2 or 4

  static KernelSpec gaussian(double t) { return {KernelFamily::gaussian, t, 0, 2}; }
  static KernelSpec linear() { return {KernelFamily::linear, 1.0, 0, 2}; }
  static KernelSpec polynomial(int a, int b) { return {KernelFamily::polynomial, 1.0, a, b}; }

  void validate() const {
    switch (family) {
      case KernelFamily::gaussian:
        if (!(t > 0) || !std::isfinite(t)) throw InputError("gaussian kernel needs t > 0");
        break;
      case KernelFamily::polynomial:
        if (a != 0 && a != 1) throw InputError("polynomial kernel needs a in {0,1}");
        if (b != 2 && b != 4) throw InputError("polynomial kernel needs b in {2,4}");
        break;
      case KernelFamily::linear:
        break;
    }
  }

  // Stable human-readable id, e.g. "gaussian(t=0.01)", "poly(a=1,b=4)".
  std::string name() const {
    char buf[64];
    switch (family) {
      case KernelFamily::gaussian:
        std::snprintf(buf, sizeof buf, "gaussian(t=%g)", t);
        return buf;
      case KernelFamily::polynomial:
        std::snprintf(buf, sizeof buf, "poly(a=%d,b=%d)", a, b);
        return buf;
      case KernelFamily::linear:
        break;
    }
    return "linear";
  }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline std::string_view family_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::polynomial: return "polynomial";
    case KernelFamily::linear: break;
  }
  return "linear";
}

inline KernelFamily parse_family(std::string_view s) {
  if (s == "gaussian") return KernelFamily::gaussian;
  if (s == "linear") return KernelFamily::linear;
  if (s == "polynomial" || s == "poly") return KernelFamily::polynomial;
  throw InputError("unknown kernel family '" + std::string(s) + "'");
}

struct KernelMatrix {
  Matrix values;
  KernelSpec spec;
  bool normalized = false;
  bool fallback_used = false;  // scaled by max |K_ij| instead of max d^2
  double scale = 1.0;          // divisor applied by normalize_kernel
};

namespace detail {

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw InputError(std::string(what) + " contains non-finite values");
}

}  // namespace detail

// Un-normalized kernel matrix K_ij = k(x_i, x_j).
//
//   gaussian   exp(-|x_i - x_j|^2 / (t * d_max^2)), d_max = max pairwise distance
//   linear     x_i . x_j
//   polynomial (a + x_i . x_j)^b
inline KernelMatrix compute_kernel(const Dataset& data, const KernelSpec& spec) {
  spec.validate();
  const Matrix& x = data.features;
  detail::require_finite(x, "dataset");
  const Eigen::Index n = x.rows();

  KernelMatrix out;
  out.spec = spec;
  out.values.resize(n, n);

  if (spec.family == KernelFamily::gaussian) {
    Matrix sq(n, n);
    double max_sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      sq(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double d = (x.row(i) - x.row(j)).squaredNorm();
        sq(i, j) = sq(j, i) = d;
        max_sq = std::max(max_sq, d);
      }
    }
    if (max_sq <= 0.0)
      throw DegenerateError("gaussian kernel: all samples identical (d_max = 0)");
    const double denom = spec.t * max_sq;
    for (Eigen::Index i = 0; i < n; ++i) {
      out.values(i, i) = 1.0;
      for (Eigen::Index j = i + 1; j < n; ++j)
        out.values(i, j) = out.values(j, i) = std::exp(-sq(i, j) / denom);
    }
    return out;
  }

  Matrix gram = x * x.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      double v = gram(i, j);
      if (spec.family == KernelFamily::polynomial) {
        v = std::pow(static_cast<double>(spec.a) + v, spec.b);
      }
      out.values(i, j) = out.values(j, i) = v;
    }
  }
  if (!out.values.allFinite()) throw InputError("kernel overflowed to non-finite values");
  return out;
}

// Divides every entry by the largest kernel-induced squared distance
// d^2_ij = K_ii + K_jj - 2 K_ij. When that divisor is smaller than max |K_ij|
// (coincident samples, very wide gaussians) the max-entry scale is used
// instead and `fallback_used` is set, which keeps |K_ij| <= 1.
inline KernelMatrix normalize_kernel(const KernelMatrix& k) {
  const Matrix& v = k.values;
  if (v.rows() != v.cols() || v.rows() == 0) throw InputError("kernel must be square and nonempty");
  detail::require_finite(v, "kernel");
  const Eigen::Index n = v.rows();

  const double max_abs = v.cwiseAbs().maxCoeff();
  if (max_abs == 0.0) throw DegenerateError("cannot normalize the zero kernel");

  const double slack = 1e-10 * std::max(1.0, v.diagonal().cwiseAbs().maxCoeff());
  double max_d2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double d2 = v(i, i) + v(j, j) - 2.0 * v(i, j);
      if (d2 < -slack)
        throw DegenerateError("kernel-induced squared distance is negative (" +
                              std::to_string(d2) + "); kernel is not PSD");
      max_d2 = std::max(max_d2, std::max(d2, 0.0));
    }
  }

  KernelMatrix out = k;
  out.fallback_used = max_d2 < max_abs;
  out.scale = out.fallback_used ? max_abs : max_d2;
  out.values = v / out.scale;
  out.normalized = true;
  return out;
}

enum class KernelBank { clustering12, ssl7 };

inline KernelBank parse_bank(std::string_view s) {
  if (s == "clustering12") return KernelBank::clustering12;
  if (s == "ssl7") return KernelBank::ssl7;
  throw InputError("unknown kernel bank '" + std::string(s) + "'");
}

inline std::string_view bank_name(KernelBank b) {
  return b == KernelBank::clustering12 ? "clustering12" : "ssl7";
}

inline std::vector<KernelSpec> bank_specs(KernelBank bank) {
  std::vector<KernelSpec> specs;
  if (bank == KernelBank::clustering12) {
    for (double t : {0.01, 0.05, 0.1, 1.0, 10.0, 50.0, 100.0}) specs.push_back(KernelSpec::gaussian(t));
    specs.push_back(KernelSpec::linear());
    for (int a : {0, 1})
      for (int b : {2, 4}) specs.push_back(KernelSpec::polynomial(a, b));
  } else {
    for (double t : {0.1, 1.0, 10.0, 100.0}) specs.push_back(KernelSpec::gaussian(t));
    specs.push_back(KernelSpec::linear());
    for (int a : {0, 1}) specs.push_back(KernelSpec::polynomial(a, 2));
  }
  return specs;
}

// Normalized kernels for every member of the bank, in bank order.
inline std::vector<KernelMatrix> build_kernel_bank(const Dataset& data, KernelBank bank) {
  data.validate();
  std::vector<KernelMatrix> out;
  for (const auto& spec : bank_specs(bank)) out.push_back(normalize_kernel(compute_kernel(data, spec)));
  return out;
}

}  // namespace slsp
