#include <slsp/io.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace slsp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "slsp_test_io";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(ReadMatrix, BasicAndBlankLines) {
  std::istringstream in("1,2\n3, 4\n\n5,6\n7,8\n");
  const Matrix m = read_matrix_csv(in);
  ASSERT_EQ(m.rows(), 4);
  ASSERT_EQ(m.cols(), 2);
  EXPECT_EQ(m(1, 1), 4.0);
  EXPECT_EQ(m(3, 0), 7.0);
}

TEST(ReadMatrix, RaggedRowNamesTheLine) {
  std::istringstream in("1,2\n3,4\n5\n");
  try {
    read_matrix_csv(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(ReadMatrix, RejectsNonNumeric) {
  std::istringstream in("1,x\n");
  EXPECT_THROW(read_matrix_csv(in), ParseError);
  std::istringstream empty("");
  EXPECT_THROW(read_matrix_csv(empty), ParseError);
}

TEST(ReadMatrix, RoundTripIsExact) {
  std::mt19937_64 rng(1);
  Matrix m = oracle::random_matrix(7, 5, rng, 1e3);
  m(0, 0) = 1e-300;
  m(1, 1) = -0.0;
  m(2, 2) = 1.0 / 3.0;
  std::stringstream s;
  write_matrix_csv(s, m);
  const Matrix back = read_matrix_csv(s);
  EXPECT_TRUE((back.array() == m.array()).all());
}

TEST(Labels, ReadAndDensify) {
  std::istringstream in("0\n2\n2\n0\n");
  const auto raw = read_labels_csv(in);
  EXPECT_EQ(raw, (std::vector<int>{0, 2, 2, 0}));
  const auto d = densify_labels(raw);
  EXPECT_TRUE(d.relabeled);
  EXPECT_EQ(d.num_classes, 2);
  EXPECT_EQ(d.labels, (std::vector<int>{0, 1, 1, 0}));
  EXPECT_FALSE(densify_labels({1, 0, 1}).relabeled);
  std::istringstream bad("1.5\n");
  EXPECT_THROW(read_labels_csv(bad), ParseError);
}

TEST(LoadDataset, FeaturesAndLabels) {
  const auto f = scratch("f.csv"), l = scratch("l.csv");
  write_text(f, "0,0\n0,1\n5,5\n5,6\n");
  write_text(l, "0\n0\n1\n1\n");
  std::ostringstream warn;
  const auto d = load_dataset(f, l, &warn);
  EXPECT_EQ(d.size(), 4);
  EXPECT_EQ(d.dims(), 2);
  EXPECT_EQ(d.num_classes, 2);
  EXPECT_TRUE(warn.str().empty());
}

TEST(LoadDataset, GapInLabelsWarns) {
  const auto f = scratch("f2.csv"), l = scratch("l2.csv");
  write_text(f, "0,0\n0,1\n5,5\n5,6\n");
  write_text(l, "0\n0\n2\n2\n");
  std::ostringstream warn;
  const auto d = load_dataset(f, l, &warn);
  EXPECT_EQ(*d.labels, (std::vector<int>{0, 0, 1, 1}));
  EXPECT_NE(warn.str().find("relabeled"), std::string::npos);
}

TEST(LoadDataset, Errors) {
  const auto f = scratch("f3.csv"), l = scratch("l3.csv"), n = scratch("n3.csv");
  write_text(f, "0,0\n0,1\n5,5\n");
  write_text(l, "0\n1\n");
  EXPECT_THROW(load_dataset(f, l), InputError);
  write_text(n, "0,0\nnan,1\n");
  EXPECT_THROW(load_dataset(n), Error);
  EXPECT_THROW(load_dataset(scratch("missing.csv")), Error);
}

TEST(Json, SidecarAndParseErrors) {
  KernelMatrix k;
  k.values = Matrix::Identity(2, 2);
  k.spec = KernelSpec::polynomial(1, 4);
  k.normalized = true;
  const json j = kernel_sidecar(k);
  EXPECT_EQ(j.at("family"), "polynomial");
  EXPECT_EQ(j.at("params").at("b"), 4);
  EXPECT_EQ(j.at("normalized"), true);
  const auto p = scratch("bad.json");
  write_text(p, "{ not json");
  EXPECT_THROW(read_json(p), ParseError);
}
