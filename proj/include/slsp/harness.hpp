#pragma once

// Kernel x regularizer x hyper-parameter grid runs with best-over-kernels and
// mean-over-kernels summaries.
//
// The "best" summary picks the cell with the highest ground-truth metric. It
// reproduces the usual reporting convention for kernel banks and is an
// oracle selection, not a model-selection procedure.

#include <slsp/errors.hpp>
#include <slsp/graph.hpp>
#include <slsp/io.hpp>
#include <slsp/kernel.hpp>
#include <slsp/metrics.hpp>
#include <slsp/semisupervised.hpp>
#include <slsp/solver.hpp>
#include <slsp/version.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace slsp {

enum class Task { clustering, ssl };

inline std::string_view task_name(Task t) { return t == Task::clustering ? "clustering" : "ssl"; }

inline Task parse_task(std::string_view s) {
  if (s == "clustering") return Task::clustering;
  if (s == "ssl") return Task::ssl;
  throw ConfigError("unknown task '" + std::string(s) + "' (expected clustering|ssl)");
}

// Declarative experiment description, serialized as JSON:
//
//   {
//     "dataset":  {"name": "yale", "features": "yale.csv", "labels": "yale_labels.csv"},
//     "task": "clustering",                 // or "ssl"
//     "kernel_bank": "clustering12",        // or "ssl7"
//     "regularizers": ["lowrank", "sparse"],
//     "alpha": [0.1], "beta": [0.1],
//     "gamma": [1.0], "fractions": [0.1, 0.3, 0.5],   // ssl only
//     "solver": {"mu": 1.0, "max_iter": 300, "tol": 1e-5},
//     "seed": 0, "repeats": 20,
//     "output_dir": "results", "save_z": false
//   }
//
// Relative paths are resolved against the config file's directory.
struct ExperimentConfig {
  std::string dataset_name = "dataset";
  std::filesystem::path features;
  std::filesystem::path labels;
  Task task = Task::clustering;
  KernelBank bank = KernelBank::clustering12;
  std::vector<Regularizer> regularizers{Regularizer::low_rank, Regularizer::sparse};
  std::vector<double> alphas{1e-3, 1e-2, 1e-1, 1.0, 10.0};
  std::vector<double> betas{1e-3, 1e-2, 1e-1, 1.0, 10.0};
  std::vector<double> gammas{0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<double> fractions{0.1, 0.3, 0.5};
  double mu = 1.0;
  int max_iter = 300;
  double tol = 1e-5;
  std::uint64_t seed = 0;
  int repeats = 20;
  std::filesystem::path output_dir = "results";
  bool save_z = false;

  void validate() const {
    if (regularizers.empty()) throw ConfigError("regularizers must be nonempty");
    if (alphas.empty()) throw ConfigError("alpha grid must be nonempty");
    if (betas.empty()) throw ConfigError("beta grid must be nonempty");
    for (double a : alphas)
      if (!(a >= 0)) throw ConfigError("alpha values must be >= 0");
    for (double b : betas)
      if (!(b > 0)) throw ConfigError("beta values must be > 0");
    if (!(mu > 0)) throw ConfigError("mu must be > 0");
    if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (!(tol > 0)) throw ConfigError("tol must be > 0");
    if (task == Task::ssl) {
      if (gammas.empty()) throw ConfigError("gamma grid must be nonempty");
      if (fractions.empty()) throw ConfigError("fraction list must be nonempty");
      for (double g : gammas)
        if (!(g > 0)) throw ConfigError("gamma values must be > 0");
      for (double f : fractions)
        if (!(f > 0 && f < 1)) throw ConfigError("fractions must lie in (0, 1)");
      if (repeats < 1) throw ConfigError("repeats must be >= 1");
    }
  }

  static ExperimentConfig from_json(const json& j, const std::filesystem::path& base_dir = {}) {
    ExperimentConfig c;
    try {
      auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
      };
      if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        c.dataset_name = d.value("name", c.dataset_name);
        if (d.contains("features")) c.features = resolve(d.at("features").get<std::string>());
        if (d.contains("labels")) c.labels = resolve(d.at("labels").get<std::string>());
      }
      if (j.contains("task")) c.task = parse_task(j.at("task").get<std::string>());
      c.bank = c.task == Task::ssl ? KernelBank::ssl7 : KernelBank::clustering12;
      if (j.contains("kernel_bank")) c.bank = parse_bank(j.at("kernel_bank").get<std::string>());
      if (j.contains("regularizers")) {
        c.regularizers.clear();
        for (const auto& r : j.at("regularizers")) c.regularizers.push_back(parse_regularizer(r.get<std::string>()));
      }
      if (j.contains("alpha")) c.alphas = j.at("alpha").get<std::vector<double>>();
      if (j.contains("beta")) c.betas = j.at("beta").get<std::vector<double>>();
      if (j.contains("gamma")) c.gammas = j.at("gamma").get<std::vector<double>>();
      if (j.contains("fractions")) c.fractions = j.at("fractions").get<std::vector<double>>();
      if (j.contains("solver")) {
        const auto& s = j.at("solver");
        c.mu = s.value("mu", c.mu);
        c.max_iter = s.value("max_iter", c.max_iter);
        c.tol = s.value("tol", c.tol);
      }
      c.seed = j.value("seed", c.seed);
      c.repeats = j.value("repeats", c.repeats);
      if (j.contains("output_dir")) c.output_dir = resolve(j.at("output_dir").get<std::string>());
      c.save_z = j.value("save_z", c.save_z);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("invalid config: ") + e.what());
    } catch (const InputError& e) {
      throw ConfigError(std::string("invalid config: ") + e.what());
    }
    c.validate();
    return c;
  }

  static ExperimentConfig load(const std::filesystem::path& path) {
    return from_json(read_json(path), path.parent_path());
  }

  json to_json() const {
    json regs = json::array();
    for (auto r : regularizers) regs.push_back(std::string(regularizer_name(r)));
    json j{{"dataset", {{"name", dataset_name}, {"features", features.string()}, {"labels", labels.string()}}},
           {"task", std::string(task_name(task))},
           {"kernel_bank", std::string(bank_name(bank))},
           {"regularizers", regs},
           {"alpha", alphas},
           {"beta", betas},
           {"solver", {{"mu", mu}, {"max_iter", max_iter}, {"tol", tol}}},
           {"seed", seed},
           {"output_dir", output_dir.string()},
           {"save_z", save_z}};
    if (task == Task::ssl) {
      j["gamma"] = gammas;
      j["fractions"] = fractions;
      j["repeats"] = repeats;
    }
    return j;
  }
};

enum class RowKind { cell, best, mean };

inline std::string_view row_kind_name(RowKind k) {
  switch (k) {
    case RowKind::cell: return "cell";
    case RowKind::best: return "best";
    case RowKind::mean: break;
  }
  return "mean";
}

struct ResultRow {
  std::string dataset;
  RowKind kind = RowKind::cell;
  int kernel_index = -1;  // -1 on mean rows
  std::string kernel;
  Regularizer regularizer = Regularizer::sparse;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();     // ssl only
  double fraction = std::numeric_limits<double>::quiet_NaN();  // ssl only
  std::string metric;  // "acc" or "nmi"
  double value = 0;
  double stddev = 0;
  int count = 1;       // repeats behind a cell, cells behind a summary
  double runtime_ms = 0;
  bool converged = false;
  int iterations = 0;
};

struct FailureRecord {
  int kernel_index = -1;
  std::string kernel;
  Regularizer regularizer = Regularizer::sparse;
  double alpha = 0, beta = 0;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double fraction = std::numeric_limits<double>::quiet_NaN();
  std::string message;
};

struct CellZ {
  int kernel_index = 0;
  Regularizer regularizer = Regularizer::sparse;
  double alpha = 0, beta = 0;
  Matrix z;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<FailureRecord> failures;
  std::vector<CellZ> z;  // filled when save_z is set
  int workers = 1;
  double wall_clock_ms = 0;
};

// Worker-pool size from SLSP_WORKERS, else the hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("SLSP_WORKERS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Calls fn(i) for i in [0, n) on up to `workers` threads. fn must not throw.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

namespace detail {

inline double nan_low(double v) { return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v; }

inline auto row_key(const ResultRow& r) {
  return std::make_tuple(static_cast<int>(r.kind), static_cast<int>(r.regularizer), nan_low(r.fraction),
                         r.metric, r.kernel_index, nan_low(r.alpha), nan_low(r.beta), nan_low(r.gamma));
}

inline void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) { return row_key(a) < row_key(b); });
}

inline void sort_failures(std::vector<FailureRecord>& f) {
  std::stable_sort(f.begin(), f.end(), [](const FailureRecord& a, const FailureRecord& b) {
    return std::make_tuple(static_cast<int>(a.regularizer), a.kernel_index, a.alpha, a.beta,
                           nan_low(a.gamma), nan_low(a.fraction)) <
           std::make_tuple(static_cast<int>(b.regularizer), b.kernel_index, b.alpha, b.beta,
                           nan_low(b.gamma), nan_low(b.fraction));
  });
}

struct Cell {
  int kernel_index;
  Regularizer regularizer;
  double alpha, beta;
};

inline std::vector<Cell> enumerate_cells(std::size_t kernels, const ExperimentConfig& c) {
  std::vector<Cell> cells;
  for (auto reg : c.regularizers)
    for (std::size_t k = 0; k < kernels; ++k)
      for (double a : c.alphas)
        for (double b : c.betas) cells.push_back({static_cast<int>(k), reg, a, b});
  return cells;
}

inline SolverConfig solver_config(const ExperimentConfig& c, const Cell& cell) {
  SolverConfig s;
  s.alpha = cell.alpha;
  s.beta = cell.beta;
  s.mu = c.mu;
  s.regularizer = cell.regularizer;
  s.max_iter = c.max_iter;
  s.tol = c.tol;
  s.seed = c.seed;
  s.track_objective = false;
  return s;
}

// Normalized bank kernels; members that fail to build are reported as
// failures for every cell that would have used them.
struct BuiltBank {
  std::vector<KernelSpec> specs;
  std::vector<std::optional<KernelMatrix>> kernels;
  std::vector<std::string> errors;
};

inline BuiltBank build_bank(const Dataset& data, KernelBank bank, int workers) {
  BuiltBank b;
  b.specs = bank_specs(bank);
  b.kernels.resize(b.specs.size());
  b.errors.resize(b.specs.size());
  parallel_for(b.specs.size(), workers, [&](std::size_t i) {
    try {
      b.kernels[i] = normalize_kernel(compute_kernel(data, b.specs[i]));
    } catch (const std::exception& e) {
      b.errors[i] = e.what();
    }
  });
  return b;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace detail

// Adds best (max) and mean summary rows for every (regularizer, fraction,
// metric) group of cell rows. Rows come back in canonical order.
inline void append_summaries(std::vector<ResultRow>& rows) {
  using Key = std::tuple<int, double, std::string>;
  std::map<Key, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows)
    if (r.kind == RowKind::cell)
      groups[{static_cast<int>(r.regularizer), detail::nan_low(r.fraction), r.metric}].push_back(&r);

  std::vector<ResultRow> summaries;
  for (auto& [key, members] : groups) {
    const ResultRow* best = members.front();
    double sum = 0;
    for (const auto* m : members) {
      if (m->value > best->value) best = m;
      sum += m->value;
    }
    const double mean = sum / static_cast<double>(members.size());
    double var = 0;
    for (const auto* m : members) var += (m->value - mean) * (m->value - mean);

    ResultRow b = *best;
    b.kind = RowKind::best;
    b.runtime_ms = 0;
    summaries.push_back(b);

    ResultRow m;
    m.dataset = best->dataset;
    m.kind = RowKind::mean;
    m.kernel = "*";
    m.regularizer = best->regularizer;
    m.fraction = best->fraction;
    m.metric = best->metric;
    m.value = mean;
    m.stddev = std::sqrt(var / static_cast<double>(members.size()));
    m.count = static_cast<int>(members.size());
    m.converged = std::all_of(members.begin(), members.end(), [](const ResultRow* r) { return r->converged; });
    m.iterations = 0;
    summaries.push_back(m);
  }
  rows.insert(rows.end(), summaries.begin(), summaries.end());
  detail::sort_rows(rows);
}

// One solve + spectral clustering per (kernel, regularizer, alpha, beta)
// cell, scored against the dataset labels with Acc and NMI.
inline ExperimentResult run_clustering_experiment(const ExperimentConfig& cfg, const Dataset& data) {
  cfg.validate();
  data.validate();
  if (!data.labels) throw ConfigError("clustering experiment needs ground-truth labels");
  const auto start = std::chrono::steady_clock::now();

  ExperimentResult out;
  out.workers = worker_count();
  const auto bank = detail::build_bank(data, cfg.bank, out.workers);
  const auto cells = detail::enumerate_cells(bank.specs.size(), cfg);

  struct Outcome {
    std::vector<ResultRow> rows;
    std::optional<FailureRecord> failure;
    std::optional<CellZ> z;
  };
  std::vector<Outcome> outcomes(cells.size());

  parallel_for(cells.size(), out.workers, [&](std::size_t i) {
    const auto& cell = cells[i];
    const auto& spec = bank.specs[static_cast<std::size_t>(cell.kernel_index)];
    auto fail = [&](const std::string& msg) {
      outcomes[i].failure = FailureRecord{cell.kernel_index, spec.name(), cell.regularizer,
                                          cell.alpha, cell.beta,
                                          std::numeric_limits<double>::quiet_NaN(),
                                          std::numeric_limits<double>::quiet_NaN(), msg};
    };
    const auto& kernel = bank.kernels[static_cast<std::size_t>(cell.kernel_index)];
    if (!kernel) {
      fail(bank.errors[static_cast<std::size_t>(cell.kernel_index)]);
      return;
    }
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const auto solved = solve(kernel->values, detail::solver_config(cfg, cell));
      const auto clusters = cluster(solved.z, data.num_classes, cfg.seed);
      const double ms = detail::elapsed_ms(t0);
      ResultRow row;
      row.dataset = cfg.dataset_name;
      row.kernel_index = cell.kernel_index;
      row.kernel = spec.name();
      row.regularizer = cell.regularizer;
      row.alpha = cell.alpha;
      row.beta = cell.beta;
      row.runtime_ms = ms;
      row.converged = solved.z.converged;
      row.iterations = solved.z.iterations;
      row.metric = "acc";
      row.value = accuracy(clusters.assignments, *data.labels);
      outcomes[i].rows.push_back(row);
      row.metric = "nmi";
      row.value = nmi(clusters.assignments, *data.labels);
      outcomes[i].rows.push_back(row);
      if (cfg.save_z) outcomes[i].z = CellZ{cell.kernel_index, cell.regularizer, cell.alpha, cell.beta, solved.z.values};
    } catch (const std::exception& e) {
      fail(e.what());
    }
  });

  for (auto& o : outcomes) {
    for (auto& r : o.rows) out.rows.push_back(std::move(r));
    if (o.failure) out.failures.push_back(std::move(*o.failure));
    if (o.z) out.z.push_back(std::move(*o.z));
  }
  append_summaries(out.rows);
  detail::sort_failures(out.failures);
  out.wall_clock_ms = detail::elapsed_ms(start);
  return out;
}

// Learns Z once per (kernel, regularizer, alpha, beta) cell and runs the
// repeated stratified label-propagation protocol for every (gamma, fraction).
// All cells share the same labeled splits (seeded from cfg.seed).
inline ExperimentResult run_ssl_experiment(const ExperimentConfig& cfg, const Dataset& data) {
  cfg.validate();
  data.validate();
  if (!data.labels) throw ConfigError("ssl experiment needs ground-truth labels");
  const auto start = std::chrono::steady_clock::now();

  ExperimentResult out;
  out.workers = worker_count();
  const auto bank = detail::build_bank(data, cfg.bank, out.workers);
  const auto cells = detail::enumerate_cells(bank.specs.size(), cfg);
  const std::uint64_t split_seed = derive_seed(cfg.seed, 0x55);

  struct Outcome {
    std::vector<ResultRow> rows;
    std::vector<FailureRecord> failures;
    std::optional<CellZ> z;
  };
  std::vector<Outcome> outcomes(cells.size());

  parallel_for(cells.size(), out.workers, [&](std::size_t i) {
    const auto& cell = cells[i];
    const auto& spec = bank.specs[static_cast<std::size_t>(cell.kernel_index)];
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto fail = [&](const std::string& msg, double gamma, double fraction) {
      outcomes[i].failures.push_back(FailureRecord{cell.kernel_index, spec.name(), cell.regularizer,
                                                   cell.alpha, cell.beta, gamma, fraction, msg});
    };
    const auto& kernel = bank.kernels[static_cast<std::size_t>(cell.kernel_index)];
    if (!kernel) {
      fail(bank.errors[static_cast<std::size_t>(cell.kernel_index)], nan, nan);
      return;
    }
    SolveResult solved;
    double solve_ms = 0;
    try {
      const auto t0 = std::chrono::steady_clock::now();
      solved = solve(kernel->values, detail::solver_config(cfg, cell));
      solve_ms = detail::elapsed_ms(t0);
    } catch (const std::exception& e) {
      fail(e.what(), nan, nan);
      return;
    }
    if (cfg.save_z) outcomes[i].z = CellZ{cell.kernel_index, cell.regularizer, cell.alpha, cell.beta, solved.z.values};
    for (double gamma : cfg.gammas) {
      for (double fraction : cfg.fractions) {
        try {
          const auto t0 = std::chrono::steady_clock::now();
          const auto s = ssl_experiment(solved.z, *data.labels, fraction, cfg.repeats, gamma, split_seed);
          ResultRow row;
          row.dataset = cfg.dataset_name;
          row.kernel_index = cell.kernel_index;
          row.kernel = spec.name();
          row.regularizer = cell.regularizer;
          row.alpha = cell.alpha;
          row.beta = cell.beta;
          row.gamma = gamma;
          row.fraction = fraction;
          row.metric = "acc";
          row.value = s.mean_accuracy;
          row.stddev = s.std_accuracy;
          row.count = static_cast<int>(s.per_repeat.size());
          row.runtime_ms = solve_ms + detail::elapsed_ms(t0);
          row.converged = solved.z.converged;
          row.iterations = solved.z.iterations;
          outcomes[i].rows.push_back(row);
        } catch (const std::exception& e) {
          fail(e.what(), gamma, fraction);
        }
      }
    }
  });

  for (auto& o : outcomes) {
    for (auto& r : o.rows) out.rows.push_back(std::move(r));
    for (auto& f : o.failures) out.failures.push_back(std::move(f));
    if (o.z) out.z.push_back(std::move(*o.z));
  }
  append_summaries(out.rows);
  detail::sort_failures(out.failures);
  out.wall_clock_ms = detail::elapsed_ms(start);
  return out;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& data) {
  return cfg.task == Task::clustering ? run_clustering_experiment(cfg, data) : run_ssl_experiment(cfg, data);
}

namespace detail {

inline std::string csv_num(double v) { return std::isnan(v) ? std::string() : format_double(v); }

inline std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

inline std::string z_filename(const CellZ& z) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s_k%02d_a%g_b%g.csv", std::string(regularizer_name(z.regularizer)).c_str(),
                z.kernel_index, z.alpha, z.beta);
  return buf;
}

}  // namespace detail

inline constexpr const char* kResultsHeader =
    "dataset,kind,kernel_index,kernel,regularizer,alpha,beta,gamma,fraction,metric,value,std,count,converged,iterations";

// Deterministic table: identical configs give byte-identical files. Timing
// lives in timings.csv, which is not deterministic.
inline void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    out << detail::csv_text(r.dataset) << ',' << row_kind_name(r.kind) << ',' << r.kernel_index << ','
        << detail::csv_text(r.kernel) << ',' << regularizer_name(r.regularizer) << ','
        << detail::csv_num(r.alpha) << ',' << detail::csv_num(r.beta) << ',' << detail::csv_num(r.gamma) << ','
        << detail::csv_num(r.fraction) << ',' << r.metric << ',' << format_double(r.value) << ','
        << format_double(r.stddev) << ',' << r.count << ',' << (r.converged ? 1 : 0) << ',' << r.iterations
        << '\n';
  }
}

struct PersistedFiles {
  std::filesystem::path results, timings, failures, manifest;
  std::vector<std::filesystem::path> z;
};

// Writes results.csv, timings.csv, failures.csv, manifest.json and, when the
// result carries them, z/<reg>_k<idx>_a<alpha>_b<beta>.csv.
inline PersistedFiles persist_results(const ExperimentResult& result, const ExperimentConfig& cfg,
                                      const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());

  PersistedFiles files;
  files.results = dir / "results.csv";
  {
    auto out = detail::open_out(files.results);
    write_results_csv(out, result.rows);
    if (!out) throw Error("write failed: '" + files.results.string() + "'");
  }

  files.timings = dir / "timings.csv";
  {
    auto out = detail::open_out(files.timings);
    out << "kind,kernel_index,regularizer,alpha,beta,gamma,fraction,metric,runtime_ms\n";
    for (const auto& r : result.rows) {
      if (r.kind != RowKind::cell) continue;
      out << row_kind_name(r.kind) << ',' << r.kernel_index << ',' << regularizer_name(r.regularizer) << ','
          << detail::csv_num(r.alpha) << ',' << detail::csv_num(r.beta) << ',' << detail::csv_num(r.gamma) << ','
          << detail::csv_num(r.fraction) << ',' << r.metric << ',' << format_double(r.runtime_ms) << '\n';
    }
    if (!out) throw Error("write failed: '" + files.timings.string() + "'");
  }

  files.failures = dir / "failures.csv";
  {
    auto out = detail::open_out(files.failures);
    out << "kernel_index,kernel,regularizer,alpha,beta,gamma,fraction,message\n";
    for (const auto& f : result.failures)
      out << f.kernel_index << ',' << detail::csv_text(f.kernel) << ',' << regularizer_name(f.regularizer) << ','
          << format_double(f.alpha) << ',' << format_double(f.beta) << ',' << detail::csv_num(f.gamma) << ','
          << detail::csv_num(f.fraction) << ',' << detail::csv_text(f.message) << '\n';
    if (!out) throw Error("write failed: '" + files.failures.string() + "'");
  }

  for (const auto& z : result.z) {
    auto path = dir / "z" / detail::z_filename(z);
    write_matrix_csv(path, z.z);
    files.z.push_back(path);
  }

  std::size_t cell_rows = 0;
  for (const auto& r : result.rows) cell_rows += r.kind == RowKind::cell ? 1 : 0;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);

  json manifest{{"tool", "slsp"},
                {"version", kVersion},
                {"config", cfg.to_json()},
                {"finished_at", stamp},
                {"wall_clock_ms", result.wall_clock_ms},
                {"workers", result.workers},
                {"cell_rows", cell_rows},
                {"summary_rows", result.rows.size() - cell_rows},
                {"failures", result.failures.size()}};
  files.manifest = dir / "manifest.json";
  write_json(files.manifest, manifest);
  return files;
}

}  // namespace slsp
