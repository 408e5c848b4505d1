// slsp: kernels, learn, cluster, ssl, eval and benchmark subcommands.

#include <slsp/slsp.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using slsp::json;

namespace {

// "gaussian(t=0.01)" -> "gaussian_t0.01"
std::string file_stem(const slsp::KernelSpec& spec) {
  std::string out;
  for (char c : spec.name()) {
    if (c == '(' || c == ',') out += '_';
    else if (c == ')' || c == '=') continue;
    else out += c;
  }
  return out;
}

void emit_json(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    slsp::write_json(out, j);
  }
}

void write_kernel(const slsp::KernelMatrix& k, const fs::path& csv) {
  slsp::write_matrix_csv(csv, k.values);
  fs::path sidecar = csv;
  sidecar.replace_extension(".json");
  slsp::write_json(sidecar, slsp::kernel_sidecar(k));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel self-expression similarity learning, spectral clustering and label propagation"};
  app.set_version_flag("--version", slsp::kVersion);
  app.require_subcommand(1);

  // kernels
  std::string k_data, k_labels, k_bank, k_family, k_out, k_out_dir;
  double k_t = 1.0;
  int k_a = 0, k_b = 2;
  bool k_raw = false;
  auto* kernels = app.add_subcommand("kernels", "Compute normalized kernel matrices from a feature CSV");
  kernels->add_option("--data", k_data, "Feature CSV, one sample per row")->required()->check(CLI::ExistingFile);
  kernels->add_option("--labels", k_labels, "Optional label CSV (validated only)")->check(CLI::ExistingFile);
  kernels->add_option("--bank", k_bank, "Kernel bank: clustering12 | ssl7");
  kernels->add_option("--family", k_family, "Single kernel: gaussian | linear | polynomial");
  kernels->add_option("--t", k_t, "Gaussian scale factor");
  kernels->add_option("--a", k_a, "Polynomial intercept (0 or 1)");
  kernels->add_option("--b", k_b, "Polynomial degree (2 or 4)");
  kernels->add_option("--out", k_out, "Output CSV for a single kernel (sidecar written next to it)");
  kernels->add_option("--out-dir", k_out_dir, "Output directory for a bank");
  kernels->add_flag("--raw", k_raw, "Skip normalization");

  // learn
  std::string l_kernel, l_reg = "sparse", l_out, l_diag;
  slsp::SolverConfig l_cfg;
  auto* learn = app.add_subcommand("learn", "Learn the coefficient matrix Z from a kernel CSV");
  learn->add_option("--kernel", l_kernel, "Kernel CSV")->required()->check(CLI::ExistingFile);
  learn->add_option("--reg", l_reg, "Regularizer: lowrank | sparse")->capture_default_str();
  learn->add_option("--alpha", l_cfg.alpha, "Similarity-preserving weight")->capture_default_str();
  learn->add_option("--beta", l_cfg.beta, "Regularizer weight")->capture_default_str();
  learn->add_option("--mu", l_cfg.mu, "ADMM penalty")->capture_default_str();
  learn->add_option("--max-iter", l_cfg.max_iter, "Iteration cap")->capture_default_str();
  learn->add_option("--tol", l_cfg.tol, "Relative-change tolerance on Z")->capture_default_str();
  learn->add_option("--seed", l_cfg.seed, "Initialization seed")->capture_default_str();
  learn->add_option("--out", l_out, "Output Z CSV")->required();
  learn->add_option("--diagnostics", l_diag, "Diagnostics JSON (default: --out with .json extension)");

  // cluster
  std::string c_z, c_labels, c_out;
  int c_classes = 0;
  std::uint64_t c_seed = 0;
  auto* clus = app.add_subcommand("cluster", "Spectral clustering on a learned Z");
  clus->add_option("--z", c_z, "Z CSV")->required()->check(CLI::ExistingFile);
  clus->add_option("--classes", c_classes, "Number of clusters")->required()->check(CLI::PositiveNumber);
  clus->add_option("--seed", c_seed, "k-means seed")->capture_default_str();
  clus->add_option("--labels", c_labels, "Ground-truth labels; adds acc and nmi")->check(CLI::ExistingFile);
  clus->add_option("--out", c_out, "Output JSON (default: stdout)");

  // ssl
  std::string s_z, s_labels, s_out;
  double s_fraction = 0.1, s_gamma = 1.0;
  int s_repeats = 20;
  std::uint64_t s_seed = 0;
  auto* ssl = app.add_subcommand("ssl", "Label propagation with stratified labeled subsets");
  ssl->add_option("--z", s_z, "Z CSV")->required()->check(CLI::ExistingFile);
  ssl->add_option("--labels", s_labels, "Ground-truth labels")->required()->check(CLI::ExistingFile);
  ssl->add_option("--fraction", s_fraction, "Labeled fraction per class")->capture_default_str();
  ssl->add_option("--repeats", s_repeats, "Number of random splits")->capture_default_str();
  ssl->add_option("--gamma", s_gamma, "Fitting weight")->capture_default_str();
  ssl->add_option("--seed", s_seed, "Split seed")->capture_default_str();
  ssl->add_option("--out", s_out, "Output JSON (default: stdout)");

  // eval
  std::string e_pred, e_truth, e_out;
  auto* eval = app.add_subcommand("eval", "Accuracy and NMI of a predicted partition");
  eval->add_option("--pred", e_pred, "Predicted ids, one per line")->required()->check(CLI::ExistingFile);
  eval->add_option("--truth", e_truth, "True ids, one per line")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", e_out, "Output JSON (default: stdout)");

  // benchmark
  std::string b_config, b_out_dir;
  auto* bench = app.add_subcommand("benchmark", "Run a kernel x hyper-parameter grid from a JSON config");
  bench->add_option("--config", b_config, "Experiment config JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--out-dir", b_out_dir, "Override the config's output_dir");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*kernels) {
      auto data = slsp::load_dataset(k_data, k_labels);
      if (!k_bank.empty() == !k_family.empty())
        throw slsp::InputError("give exactly one of --bank or --family");
      if (!k_bank.empty()) {
        if (k_out_dir.empty()) throw slsp::InputError("--bank needs --out-dir");
        const auto specs = slsp::bank_specs(slsp::parse_bank(k_bank));
        for (std::size_t i = 0; i < specs.size(); ++i) {
          auto k = slsp::compute_kernel(data, specs[i]);
          if (!k_raw) k = slsp::normalize_kernel(k);
          char prefix[8];
          std::snprintf(prefix, sizeof prefix, "%02zu_", i);
          write_kernel(k, fs::path(k_out_dir) / (prefix + file_stem(specs[i]) + ".csv"));
        }
        std::cerr << "wrote " << specs.size() << " kernels to " << k_out_dir << "\n";
      } else {
        if (k_out.empty()) throw slsp::InputError("--family needs --out");
        slsp::KernelSpec spec;
        spec.family = slsp::parse_family(k_family);
        spec.t = k_t;
        spec.a = k_a;
        spec.b = k_b;
        auto k = slsp::compute_kernel(data, spec);
        if (!k_raw) k = slsp::normalize_kernel(k);
        write_kernel(k, k_out);
      }
    } else if (*learn) {
      l_cfg.regularizer = slsp::parse_regularizer(l_reg);
      const slsp::Matrix k = slsp::read_matrix_csv(l_kernel);
      const auto result = slsp::solve(k, l_cfg);
      slsp::write_matrix_csv(l_out, result.z.values);
      json residuals = json::array(), objective = json::array();
      for (const auto& r : result.state.residuals) {
        residuals.push_back({{"j", r.j_residual}, {"w", r.w_residual}, {"h", r.h_residual}});
        objective.push_back(r.objective);
      }
      json diag{{"converged", result.z.converged},
                {"iterations", result.z.iterations},
                {"final_rel_change", result.state.rel_change},
                {"residuals", residuals},
                {"objective", objective}};
      fs::path diag_path = l_diag;
      if (diag_path.empty()) diag_path = fs::path(l_out).replace_extension(".json");
      slsp::write_json(diag_path, diag);
      std::cerr << (result.z.converged ? "converged" : "not converged") << " after "
                << result.z.iterations << " iterations\n";
    } else if (*clus) {
      const slsp::Matrix z = slsp::read_matrix_csv(c_z);
      const auto res = slsp::cluster(z, c_classes, c_seed);
      json j{{"assignments", res.assignments}, {"inertia", res.inertia}};
      if (!c_labels.empty()) {
        const auto truth = slsp::read_labels_csv(c_labels);
        j["acc"] = slsp::accuracy(res.assignments, truth);
        j["nmi"] = slsp::nmi(res.assignments, truth);
      }
      emit_json(j, c_out);
    } else if (*ssl) {
      const slsp::Matrix z = slsp::read_matrix_csv(s_z);
      const auto dense = slsp::densify_labels(slsp::read_labels_csv(s_labels));
      if (dense.relabeled) std::cerr << "warning: labels relabeled densely to 0.." << dense.num_classes - 1 << "\n";
      const auto s = slsp::ssl_experiment(z, dense.labels, s_fraction, s_repeats, s_gamma, s_seed);
      emit_json(json{{"fraction", s.fraction},
                     {"mean_acc", s.mean_accuracy},
                     {"std_acc", s.std_accuracy},
                     {"per_repeat", s.per_repeat}},
                s_out);
    } else if (*eval) {
      const auto pred = slsp::read_labels_csv(e_pred);
      const auto truth = slsp::read_labels_csv(e_truth);
      emit_json(json{{"acc", slsp::accuracy(pred, truth)}, {"nmi", slsp::nmi(pred, truth)}}, e_out);
    } else if (*bench) {
      auto cfg = slsp::ExperimentConfig::load(b_config);
      if (!b_out_dir.empty()) cfg.output_dir = b_out_dir;
      if (cfg.features.empty()) throw slsp::ConfigError("config has no dataset.features");
      const auto data = slsp::load_dataset(cfg.features, cfg.labels);
      const auto result = slsp::run_experiment(cfg, data);
      const auto files = slsp::persist_results(result, cfg, cfg.output_dir);
      std::cerr << "wrote " << files.results.string() << " (" << result.rows.size() << " rows, "
                << result.failures.size() << " failures)\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
