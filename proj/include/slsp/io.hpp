#pragma once

// File formats.
//
//   matrix CSV   one row per line, comma separated, no header
//   labels CSV   one integer per line
//   kernel JSON  sidecar {family, params, normalized, fallback_used}

#include <slsp/errors.hpp>
#include <slsp/kernel.hpp>

#include <nlohmann/json.hpp>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace slsp {

using json = nlohmann::json;

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view field, std::size_t line) {
  const std::string tmp(trim(field));
  if (tmp.empty()) throw ParseError("empty field", line);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size()) throw ParseError("not a number: '" + tmp + "'", line);
  if (!std::isfinite(v)) throw ParseError("non-finite value '" + tmp + "'", line);
  return v;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace detail

// %.17g: doubles survive a write/read cycle bit-exactly.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Matrix read_matrix_csv(std::istream& in, const std::string& source = "<stream>") {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      const auto comma = body.find(',', pos);
      row.push_back(detail::parse_double(body.substr(pos, comma == std::string_view::npos ? body.npos : comma - pos), lineno));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (rows.empty()) {
      width = row.size();
    } else if (row.size() != width) {
      throw ParseError(source + ": ragged row with " + std::to_string(row.size()) +
                           " columns, expected " + std::to_string(width),
                       lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(source + ": no data rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

inline Matrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_matrix_csv(in, path.string());
}

inline void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

inline void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = detail::open_out(path);
  write_matrix_csv(out, m);
  if (!out) throw Error("write failed: '" + path.string() + "'");
}

inline std::vector<int> read_labels_csv(std::istream& in, const std::string& source = "<stream>") {
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body(detail::trim(line));
    if (body.empty()) continue;
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(body.c_str(), &end, 10);
    if (end != body.c_str() + body.size() || errno == ERANGE)
      throw ParseError(source + ": not an integer label '" + body + "'", lineno);
    labels.push_back(static_cast<int>(v));
  }
  if (labels.empty()) throw ParseError(source + ": no labels");
  return labels;
}

inline std::vector<int> read_labels_csv(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_labels_csv(in, path.string());
}

inline void write_labels_csv(const std::filesystem::path& path, const std::vector<int>& labels) {
  auto out = detail::open_out(path);
  for (int v : labels) out << v << '\n';
}

struct DenseLabels {
  std::vector<int> labels;
  int num_classes = 0;
  bool relabeled = false;  // input ids were not already 0..c-1
};

// Maps arbitrary integer ids onto 0..c-1 preserving their order.
inline DenseLabels densify_labels(const std::vector<int>& raw) {
  std::set<int> ids(raw.begin(), raw.end());
  std::map<int, int> to_dense;
  int next = 0;
  for (int id : ids) to_dense[id] = next++;
  DenseLabels out;
  out.num_classes = next;
  out.relabeled = !ids.empty() && (*ids.begin() != 0 || *ids.rbegin() != next - 1);
  out.labels.reserve(raw.size());
  for (int v : raw) out.labels.push_back(to_dense[v]);
  return out;
}

// Features CSV (one sample per row) plus an optional labels CSV. Sparse label
// ids are relabeled densely with a warning on `warn`.
inline Dataset load_dataset(const std::filesystem::path& features,
                            const std::filesystem::path& labels = {},
                            std::ostream* warn = &std::cerr) {
  Dataset d;
  d.features = read_matrix_csv(features);
  if (!labels.empty()) {
    const auto raw = read_labels_csv(labels);
    if (static_cast<Eigen::Index>(raw.size()) != d.features.rows())
      throw InputError("'" + labels.string() + "' has " + std::to_string(raw.size()) +
                       " labels but '" + features.string() + "' has " +
                       std::to_string(d.features.rows()) + " samples");
    auto dense = densify_labels(raw);
    if (dense.relabeled && warn)
      *warn << "warning: labels in '" << labels.string() << "' relabeled densely to 0.."
            << dense.num_classes - 1 << "\n";
    d.labels = std::move(dense.labels);
    d.num_classes = dense.num_classes;
  }
  d.validate();
  return d;
}

inline json kernel_sidecar(const KernelMatrix& k) {
  json params = json::object();
  switch (k.spec.family) {
    case KernelFamily::gaussian: params["t"] = k.spec.t; break;
    case KernelFamily::polynomial:
      params["a"] = k.spec.a;
      params["b"] = k.spec.b;
      break;
    case KernelFamily::linear: break;
  }
  return json{{"family", std::string(family_name(k.spec.family))},
              {"params", params},
              {"normalized", k.normalized},
              {"fallback_used", k.fallback_used}};
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed: '" + path.string() + "'");
}

inline json read_json(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace slsp
