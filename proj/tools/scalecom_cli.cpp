// Copyright 2026 The ScaleCom Simulator Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "analyze.hpp"
#include "scalecom/compress.hpp"
#include "scalecom/config.hpp"
#include "scalecom/io.hpp"
#include "scalecom/perfmodel.hpp"
#include "scalecom/problems.hpp"
#include "scalecom/simulator.hpp"
#include "scalecom/theory.hpp"

namespace fs = std::filesystem;
using namespace scalecom;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> workers;
  std::optional<double> beta;
  std::optional<double> rate;
  std::string scheme;
  std::string problem;
  std::string paired;
  std::optional<std::size_t> stride;
  std::optional<std::size_t> iterations;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON experiment config");
  cmd->add_option("--seed", o.seed, "Run seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--workers", o.workers, "Worker count");
  cmd->add_option("--beta", o.beta, "Low-pass filter factor");
  cmd->add_option("--rate", o.rate, "Compression rate");
  cmd->add_option("--scheme", o.scheme, "Compressor (train) or perf scheme");
  cmd->add_option("--problem", o.problem, "quadratic | logistic | mlp | csv");
  cmd->add_option("--paired", o.paired, "Also run the uncompressed baseline (true/false)");
  cmd->add_option("--stride", o.stride, "Metric stride");
  cmd->add_option("--iterations", o.iterations, "Iteration count");
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw ArgumentError("--paired expects true or false, got '" + s + "'");
}

fs::path output_dir(const Overrides& o, const config::ExperimentConfig& cfg, const char* sub) {
  if (!o.out.empty()) return o.out;
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  const char* root = std::getenv("SCALECOM_OUT");
  return fs::path(root && *root ? root : "scalecom_out") / sub;
}

config::ExperimentConfig load(const Overrides& o) {
  config::ExperimentConfig cfg = o.config.empty() ? config::ExperimentConfig{} : config::load_config(o.config);
  if (o.seed) cfg.sim.seed = *o.seed;
  if (o.workers) cfg.sim.workers = *o.workers;
  if (o.beta) cfg.sim.beta = *o.beta;
  if (o.rate) {
    cfg.sim.rate = *o.rate;
    cfg.sim.k = 0;
    cfg.perf.workload.rate = *o.rate;
  }
  if (o.stride) cfg.sim.metric_stride = *o.stride;
  if (o.iterations) cfg.sim.iterations = *o.iterations;
  if (!o.problem.empty()) cfg.problem.name = o.problem;
  if (!o.paired.empty()) cfg.paired = parse_bool(o.paired);
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  os << text;
}

nlohmann::json summary_json(const sim::TrainingTrace& trace, std::optional<std::size_t> diverged_at) {
  const auto s = sim::summarize(trace);
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["iterations"] = s.iterations;
  j["initial_loss"] = num(trace.initial_loss);
  j["final_loss"] = num(s.final_loss);
  j["final_grad_norm_sq"] = num(s.final_grad_norm_sq);
  j["mean_d_over_k"] = num(s.mean_d_over_k);
  j["mean_gamma"] = num(s.mean_gamma);
  j["max_virtual_residual"] = num(s.max_virtual_residual);
  j["upload_bytes_per_worker"] = s.total_upload_bytes_per_worker;
  j["download_bytes_per_worker"] = s.total_download_bytes_per_worker;
  j["index_bytes"] = s.total_index_bytes;
  j["diverged_at"] = diverged_at ? nlohmann::json(*diverged_at) : nlohmann::json(nullptr);
  return j;
}

int cmd_train(const Overrides& o) {
  config::ExperimentConfig cfg;
  std::shared_ptr<problems::Problem> problem;
  try {
    cfg = load(o);
    if (!o.scheme.empty()) cfg.sim.compressor.kind = compress::parse_kind(o.scheme);
    problem = config::make_problem(cfg.problem);
    if (cfg.lr_constant) {
      double sigma = cfg.lr_sigma.value_or(0.0);
      if (!cfg.lr_sigma) {
        RngStream rng(cfg.sim.seed, 0xC0FFEE);
        const DenseVector theta0 = problem->initial_parameters();
        problems::ConstantProbe probe;
        probe.batch_size = cfg.sim.batch_size;
        sigma = problems::estimate_constants(*problem, std::span(&theta0, 1), probe, rng).sigma;
        if (!(sigma > 0.0)) throw ArgumentError("lr_constant: estimated sigma is zero; set lr_sigma");
      }
      cfg.sim.lr = theory::theory_learning_rate(*cfg.lr_constant, cfg.sim.workers, sigma, cfg.sim.iterations);
    }
    cfg.sim.validate(problem->dimension());
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  const fs::path out = output_dir(o, cfg, "train");
  fs::create_directories(out);
  write_text(out / "effective_config.json", config::dump_config(cfg));

  nlohmann::json summary;
  int code = kExitOk;
  auto run_one = [&](sim::Mode mode, const char* name, const char* file) {
    try {
      const auto trace = sim::run(cfg.sim, *problem, mode);
      io::write_trace_file(out / file, trace);
      summary[name] = summary_json(trace, std::nullopt);
    } catch (const sim::DivergenceError& e) {
      io::write_trace_file(out / file, e.partial_trace());
      summary[name] = summary_json(e.partial_trace(), e.iteration());
      std::cerr << name << " diverged: " << e.what() << '\n';
      code = kExitDiverged;
    }
  };
  run_one(sim::Mode::kScaleCom, "scalecom", cfg.paired ? "trace_scalecom.jsonl" : "trace.jsonl");
  if (cfg.paired) run_one(sim::Mode::kBaseline, "baseline", "trace_baseline.jsonl");
  write_text(out / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << '\n';
  return code;
}

struct TheoryFlags {
  std::optional<double> gamma;
  std::optional<std::size_t> d;
  std::optional<std::size_t> k;
  std::optional<double> gamma0;
  std::vector<double> gammas;
  std::optional<double> kappa;
  std::optional<double> beta;
  std::optional<double> epsilon;
  double G = 1.0, L = 1.0, sigma = 1.0, gap = 1.0;
  std::size_t n = 8;
  std::vector<double> T{1e2, 1e3, 1e4, 1e5, 1e6};
  std::optional<double> rate_guidance;
  std::string out;
};

int cmd_theory(const TheoryFlags& f) {
  std::cout.precision(17);
  try {
    if (f.rate_guidance) {
      std::cout << "rate_guidance: " << theory::recommend_compression_rate(*f.rate_guidance) << "X\n";
    }
    std::optional<double> gamma = f.gamma;
    if (f.d && f.k && f.gamma0) {
      const double g = theory::lemma1_gamma(*f.d, *f.k, *f.gamma0);
      std::cout << "lemma1_gamma: " << io::format_number(g) << '\n';
      if (!gamma) gamma = g;
    }
    if (!f.gammas.empty() && f.kappa) {
      const auto g = theory::lemma2_gamma(f.gammas, *f.kappa);
      std::cout << "lemma2_kappa_threshold: " << io::format_number(theory::lemma2_kappa_threshold(f.gammas)) << '\n';
      if (g) {
        std::cout << "lemma2_gamma: " << io::format_number(*g) << '\n';
      } else {
        std::cout << "lemma2_gamma: infeasible (kappa at or below threshold)\n";
      }
    }
    if (!gamma) {
      if (!f.rate_guidance && !(f.d && f.k && f.gamma0) && f.gammas.empty()) {
        std::cerr << "theory: nothing to evaluate; pass --gamma, --rate-guidance, or lemma inputs\n";
        return kExitConfig;
      }
      return kExitOk;
    }
    try {
      const auto range = theory::beta_range(*gamma);
      std::cout << "beta_range: (" << io::format_number(range.lo) << ", " << io::format_number(range.hi) << ")\n";
    } catch (const InfeasibleError& e) {
      std::cout << "beta_range: infeasible (" << e.what() << ")\n";
      return kExitOk;
    }
    if (!f.beta) return kExitOk;
    const double ce = theory::c_epsilon(*f.beta, *gamma);
    std::cout << "c_epsilon: " << io::format_number(ce) << '\n';
    if (!f.epsilon && !(ce > 0.0)) {
      std::cout << "bound: infeasible (beta outside the admissible range)\n";
      return kExitOk;
    }
    const double eps = f.epsilon.value_or(theory::default_epsilon(*f.beta, *gamma));
    std::cout << "epsilon: " << io::format_number(eps) << '\n';
    std::cout << "lambda: " << io::format_number(theory::lambda_constant(*f.beta, *gamma, eps)) << '\n';
    theory::BoundInputs in{f.G, f.L, f.sigma, f.gap, *gamma, *f.beta, eps, f.n};
    try {
      std::cout << "memory_bound: " << io::format_number(theory::memory_bound(in)) << '\n';
      const auto curve = theory::theorem1_bound(in, f.T);
      std::ostringstream csv;
      csv << "T,leading,residual,total\n";
      for (const auto& p : curve) {
        csv << io::format_number(p.T) << ',' << io::format_number(p.leading) << ','
            << io::format_number(p.residual) << ',' << io::format_number(p.total) << '\n';
      }
      std::cout << csv.str();
      if (!f.out.empty()) {
        fs::create_directories(f.out);
        write_text(fs::path(f.out) / "bound.csv", csv.str());
      }
    } catch (const InfeasibleError& e) {
      std::cout << "bound: infeasible (" << e.what() << ")\n";
    }
  } catch (const ArgumentError& e) {
    std::cerr << "theory: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}

int cmd_perf(const Overrides& o) {
  config::ExperimentConfig cfg;
  std::vector<perf::PerfEstimate> rows;
  try {
    cfg = load(o);
    if (o.workers) cfg.perf.system.workers = *o.workers;
    if (!o.scheme.empty()) cfg.perf.schemes = {perf::parse_scheme(o.scheme)};
    rows = perf::sweep(cfg.perf.system, cfg.perf.workload, cfg.perf.axis, cfg.perf.values, cfg.perf.schemes);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  const fs::path out = output_dir(o, cfg, "perf");
  fs::create_directories(out);
  std::ostringstream csv;
  perf::write_csv(csv, rows);
  write_text(out / "perf.csv", csv.str());
  std::cout << csv.str();
  return kExitOk;
}

int cmd_analyze(const std::string& trace_path, const std::string& out_flag, const tools::AnalyzeOptions& opts) {
  std::vector<sim::IterationRecord> records;
  try {
    records = io::read_trace_file(trace_path);
  } catch (const io::ParseError& e) {
    std::cerr << "trace error: " << e.what() << '\n';
    return kExitConfig;
  }
  fs::path out = out_flag;
  if (out.empty()) {
    const char* root = std::getenv("SCALECOM_OUT");
    out = fs::path(root && *root ? root : "scalecom_out") / "analyze";
  }
  tools::analyze_records(records, out, opts);
  std::cout << "analyzed " << records.size() << " records into " << out.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ScaleCom simulator"};
  app.require_subcommand(1);

  Overrides train_o, perf_o;
  auto* train = app.add_subcommand("train", "Run a simulation and write traces");
  add_common(train, train_o);

  TheoryFlags tf;
  auto* theory_cmd = app.add_subcommand("theory", "Evaluate the analytical results");
  theory_cmd->add_option("--gamma", tf.gamma, "Contraction coefficient");
  theory_cmd->add_option("--d", tf.d, "Half Hamming distance");
  theory_cmd->add_option("--k", tf.k, "Support size");
  theory_cmd->add_option("--gamma0", tf.gamma0, "Exact top-k contraction");
  theory_cmd->add_option("--gammas", tf.gammas, "Per-worker contraction coefficients");
  theory_cmd->add_option("--kappa", tf.kappa, "Worker gradient correlation");
  theory_cmd->add_option("--beta", tf.beta, "Filter factor");
  theory_cmd->add_option("--epsilon", tf.epsilon, "Young's inequality parameter");
  theory_cmd->add_option("--G", tf.G, "Gradient bound");
  theory_cmd->add_option("--L", tf.L, "Smoothness constant");
  theory_cmd->add_option("--sigma", tf.sigma, "Gradient noise level");
  theory_cmd->add_option("--gap", tf.gap, "Initial optimality gap");
  theory_cmd->add_option("--n,--workers", tf.n, "Worker count");
  theory_cmd->add_option("--T", tf.T, "Iteration counts for the bound curve");
  theory_cmd->add_option("--rate-guidance", tf.rate_guidance, "FLOPs-to-gradient ratio");
  theory_cmd->add_option("--out", tf.out, "Directory for bound.csv");

  auto* perf_cmd = app.add_subcommand("perf", "Sweep the performance model");
  add_common(perf_cmd, perf_o);

  std::string trace_path, analyze_out;
  tools::AnalyzeOptions aopts;
  auto* analyze = app.add_subcommand("analyze", "Similarity metrics from a trace");
  analyze->add_option("trace", trace_path, "Trace JSONL file")->required();
  analyze->add_option("--out", analyze_out, "Output directory");
  analyze->add_option("--bins", aopts.bins, "Histogram bins");
  analyze->add_option("--qq-points", aopts.qq_points, "Quantile count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*train) return cmd_train(train_o);
    if (*theory_cmd) return cmd_theory(tf);
    if (*perf_cmd) return cmd_perf(perf_o);
    if (*analyze) return cmd_analyze(trace_path, analyze_out, aopts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
