#include <slsp/semisupervised.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <random>

using namespace slsp;

namespace {

Matrix two_block_z(int a, int b) {
  Matrix z = Matrix::Zero(a + b, a + b);
  for (int i = 0; i < a + b; ++i)
    for (int j = 0; j < a + b; ++j)
      if (i != j && (i < a) == (j < a)) z(i, j) = 1.0;
  return z;
}

std::vector<int> block_labels(int a, int b) {
  std::vector<int> l(static_cast<std::size_t>(a + b), 0);
  for (int i = a; i < a + b; ++i) l[static_cast<std::size_t>(i)] = 1;
  return l;
}

}  // namespace

TEST(LabelMatrix, OneHotRows) {
  const auto y = make_label_matrix({0, 2, 1}, {true, false, true}, 3);
  Matrix expect = Matrix::Zero(3, 3);
  expect(0, 0) = 1;
  expect(2, 1) = 1;
  EXPECT_EQ(y.values, expect);
  EXPECT_THROW(make_label_matrix({0, 3}, {true, true}, 3), InputError);
}

TEST(RowArgmax, TiesGoToLowestIndex) {
  Matrix f(2, 3);
  f << 0.2, 0.5, 0.5, 0.0, 0.0, 0.0;
  EXPECT_EQ(row_argmax(f), (std::vector<int>{1, 0}));
}

TEST(Lgc, EmptyGraphReturnsLabels) {
  const Matrix l = Matrix::Zero(4, 4);
  const auto y = make_label_matrix({0, 1, 1, 0}, {true, true, false, false}, 2);
  const auto r = lgc_propagate(l, y, 1.0);
  EXPECT_LE((r.scores - y.values).norm(), 1e-15);
}

TEST(Lgc, TwoBlocksOneLabelEach) {
  const Matrix l = laplacian(build_graph(two_block_z(4, 4)));
  std::vector<bool> mask(8, false);
  mask[0] = mask[5] = true;
  const auto labels = block_labels(4, 4);
  const auto r = lgc_propagate(l, make_label_matrix(labels, mask, 2), 1.0);
  EXPECT_EQ(r.predictions, labels);
}

TEST(Lgc, LargeGammaKeepsLabels) {
  std::mt19937_64 rng(1);
  const Matrix l = laplacian(build_graph(oracle::random_matrix(6, 6, rng)));
  const auto y = make_label_matrix({0, 1, 2, 0, 1, 2}, {true, true, true, true, true, true}, 3);
  EXPECT_LE((lgc_propagate(l, y, 1e8).scores - y.values).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Lgc, SolvesTheLinearSystem) {
  std::mt19937_64 rng(2);
  const Matrix l = laplacian(build_graph(oracle::random_matrix(10, 10, rng)));
  const Matrix y = oracle::random_matrix(10, 3, rng);
  const double gamma = 0.3;
  const auto r = LgcSolver(l, gamma).propagate(y);
  EXPECT_LE((l * r.scores + gamma * (r.scores - y)).norm(), 1e-10);
}

TEST(Lgc, ScalingInvariance) {
  // F(cL, c gamma) = F(L, gamma).
  std::mt19937_64 rng(3);
  const Matrix l = laplacian(build_graph(oracle::random_matrix(8, 8, rng)));
  const Matrix y = oracle::random_matrix(8, 2, rng);
  const Matrix a = LgcSolver(l, 0.5).propagate(y).scores;
  const Matrix b = LgcSolver(7.0 * l, 3.5).propagate(y).scores;
  EXPECT_LE((a - b).norm(), 1e-10);
  EXPECT_THROW(LgcSolver(l, 0.0), InputError);
}

TEST(StratifiedMask, CountsPerClass) {
  std::vector<int> labels;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 10 + 5 * k; ++i) labels.push_back(k);
  Rng rng(4);
  const auto mask = stratified_mask(labels, 3, 0.1, rng);
  std::vector<int> chosen(3, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) chosen[labels[i]] += mask[i] ? 1 : 0;
  EXPECT_EQ(chosen, (std::vector<int>{1, 2, 2}));
  Rng rng2(4);
  EXPECT_EQ(stratified_mask(labels, 3, 0.1, rng2), mask);
}

TEST(SslExperiment, FullLabelingHasNothingToScore) {
  EXPECT_THROW(ssl_experiment(two_block_z(3, 3), block_labels(3, 3), 1.0, 1, 1.0, 0), InputError);
  EXPECT_THROW(ssl_experiment(two_block_z(3, 3), block_labels(3, 3), 0.0, 1, 1.0, 0), InputError);
  EXPECT_THROW(ssl_experiment(two_block_z(3, 3), block_labels(3, 2), 0.5, 1, 1.0, 0), InputError);
}

TEST(SslExperiment, BlockGraphIsPerfect) {
  const auto s = ssl_experiment(two_block_z(20, 20), block_labels(20, 20), 0.1, 20, 1.0, 5);
  ASSERT_EQ(s.per_repeat.size(), 20u);
  EXPECT_DOUBLE_EQ(s.mean_accuracy, 1.0);
  EXPECT_DOUBLE_EQ(s.std_accuracy, 0.0);
}

TEST(SslExperiment, SummaryStatistics) {
  std::mt19937_64 rng(6);
  const Matrix z = oracle::random_matrix(30, 30, rng);
  std::vector<int> labels(30);
  for (int i = 0; i < 30; ++i) labels[i] = i % 3;
  const auto s = ssl_experiment(z, labels, 0.3, 20, 1.0, 11);
  ASSERT_EQ(s.per_repeat.size(), 20u);
  double m = 0;
  for (double a : s.per_repeat) m += a / 20;
  double v = 0;
  for (double a : s.per_repeat) v += (a - m) * (a - m) / 20;
  EXPECT_NEAR(s.mean_accuracy, m, 1e-12);
  EXPECT_NEAR(s.std_accuracy, std::sqrt(v), 1e-12);
  const auto again = ssl_experiment(z, labels, 0.3, 20, 1.0, 11);
  EXPECT_EQ(again.per_repeat, s.per_repeat);
}
