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

// Acceptance checks 1-11. One line per criterion; nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "scalecom/compress.hpp"
#include "scalecom/core.hpp"
#include "scalecom/metrics.hpp"
#include "scalecom/perfmodel.hpp"
#include "scalecom/problems.hpp"
#include "scalecom/simulator.hpp"
#include "scalecom/theory.hpp"

using namespace scalecom;
using compress::Kind;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

// 1. sparsify(mean) == mean(sparsify) on a shared support.
Outcome commutativity() {
  RngStream rng(101, 0);
  double worst = 0.0;
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = 1 + rng.uniform_below(16);
    const std::size_t p = 1 + rng.uniform_below(4096);
    const std::size_t k = 1 + rng.uniform_below(p);
    const IndexSet support = compress::random_k_indices(p, k, rng);
    std::vector<DenseVector> vs;
    std::vector<SparseGradient> payloads;
    for (std::size_t w = 0; w < n; ++w) {
      DenseVector v(p);
      const double scale = std::exp(4.0 * rng.normal());
      for (auto& x : v) x = scale * rng.normal();
      payloads.push_back(compress::sparsify(v, support));
      vs.push_back(std::move(v));
    }
    const DenseVector lhs = densify(compress::sparsify(mean_of(vs), support));
    const DenseVector rhs = densify(sim::sparse_allreduce(payloads));
    const double denom = std::max(lhs.norm(), 1e-300);
    worst = std::max(worst, (lhs - rhs).norm() / denom);
  }
  return {worst <= 1e-12, fmt("1000 cases, max relative error %.3g", worst)};
}

// 2. Exhaustive oracle vs closed form, and the lemma bound.
Outcome lemma1_oracle() {
  RngStream rng(202, 0);
  double worst = 0.0;
  std::size_t checks = 0, violations = 0;
  for (std::size_t p = 1; p <= 10; ++p) {
    for (std::size_t k = 1; k <= std::min<std::size_t>(4, p); ++k) {
      for (std::size_t d = 0; d <= std::min(k, p - k); ++d) {
        for (int trial = 0; trial < 100; ++trial) {
          DenseVector y(p);
          for (auto& x : y) x = rng.normal();
          const auto e = compress::lemma1_expectation_oracle(y, k, d);
          if (e.monte_carlo) return {false, "oracle fell back to sampling"};
          worst = std::max(worst, rel_diff(e.top_k_energy_residual, e.closed_form));
          const double g0 = compress::measure_contraction(y, compress::top_k_indices(y, k)).gamma0;
          const double bound = theory::lemma1_gamma(d, k, g0) * y.squared_norm();
          if (e.top_k_energy_residual > bound + 1e-12 * y.squared_norm()) ++violations;
          ++checks;
        }
      }
    }
  }
  std::ostringstream os;
  os << checks << " cases, max relative error " << fmt("%.3g", worst) << ", bound violations " << violations;
  return {worst <= 1e-10 && violations == 0, os.str()};
}

// 3. theta - v = (lr / beta) mean memory along a compressed quadratic run.
Outcome virtual_sequence() {
  const auto q = problems::make_quadratic(1000, 100.0, 0.1, 303);
  sim::SimConfig cfg;
  cfg.workers = 8;
  cfg.rate = 10;
  cfg.beta = 0.1;
  cfg.lr = 0.1;
  cfg.iterations = 1000;
  cfg.compressor.kind = Kind::kCLTk;
  cfg.seed = 303;
  const auto trace = sim::run(cfg, *q);
  double worst = 0.0;
  std::size_t undefined = 0;
  for (const auto& r : trace.records) {
    if (!std::isfinite(r.virtual_residual)) ++undefined;
    else worst = std::max(worst, r.virtual_residual);
  }
  return {undefined == 0 && worst < 1e-8,
          fmt("max normalized residual %.3g over 1000 iterations", worst)};
}

bool same_trace(const sim::TrainingTrace& a, const sim::TrainingTrace& b) {
  if (a.records.size() != b.records.size() || !(a.final_parameters == b.final_parameters)) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    if (a.records[i].loss != b.records[i].loss) return false;
  }
  return true;
}

// 4. Lossless compression collapses to synchronous / plain SGD bit for bit.
Outcome degenerations() {
  const auto lg = problems::make_logistic(400, 30, 1e-3, 404);
  sim::SimConfig cfg;
  cfg.workers = 4;
  cfg.lr = 0.2;
  cfg.beta = 1.0;
  cfg.batch_size = 8;
  cfg.iterations = 300;
  cfg.compressor.kind = Kind::kIdentity;
  cfg.seed = 404;
  const bool identity = same_trace(sim::run(cfg, *lg, sim::Mode::kScaleCom), sim::run(cfg, *lg, sim::Mode::kBaseline));

  cfg.workers = 1;
  cfg.compressor.kind = Kind::kCLTk;
  cfg.k = lg->dimension();
  cfg.beta = 0.3;
  const auto single = sim::run(cfg, *lg);
  // hand-rolled SGD with the same sample stream
  DenseVector theta = lg->initial_parameters();
  RngStream rng(cfg.seed, 0);
  const auto shard = problems::make_shards(*lg, 1, cfg.data_mode)[0];
  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    const auto batch = problems::sample_minibatch(shard, cfg.batch_size, rng);
    theta.axpy(-cfg.lr, lg->stochastic_gradient(theta, batch, rng));
  }
  const bool plain = single.final_parameters == theta;
  return {identity && plain, std::string("identity+beta=1 vs sync SGD: ") + (identity ? "bitwise" : "differs") +
                                 ", n=1 k=p vs plain SGD: " + (plain ? "bitwise" : "differs")};
}

// 5. Compressed quadratic training keeps pace with SGD and the true top-k oracle.
Outcome convergence_parity() {
  const auto q = problems::make_quadratic(1000, 100.0, 0.5, 505);
  sim::SimConfig cfg;
  cfg.workers = 8;
  cfg.rate = 10;
  cfg.beta = 0.1;
  cfg.lr = 0.1;
  cfg.iterations = 5000;
  cfg.compressor.kind = Kind::kCLTk;
  cfg.metric_stride = 50;
  cfg.seed = 505;
  const auto clt = sim::run(cfg, *q, sim::Mode::kScaleCom);
  const auto sgd = sim::run(cfg, *q, sim::Mode::kBaseline);
  cfg.compressor.kind = Kind::kTrueTopKOracle;
  const auto oracle = sim::run(cfg, *q, sim::Mode::kScaleCom);
  for (std::size_t i = 0; i < clt.records.size(); ++i) {
    if (clt.records[i].batch_ids != sgd.records[i].batch_ids) return {false, "minibatch streams differ"};
  }
  const double loss_c = clt.records.back().loss, loss_s = sgd.records.back().loss;
  const double loss_o = oracle.records.back().loss;
  const double g_c = q->full_gradient(clt.final_parameters).squared_norm();
  const double g_s = q->full_gradient(sgd.final_parameters).squared_norm();
  const double r_loss = loss_c / loss_s, r_grad = g_c / g_s, r_oracle = loss_c / loss_o;
  std::ostringstream os;
  os << "loss ratio vs SGD " << fmt("%.3f", r_loss) << ", grad-norm ratio " << fmt("%.3f", r_grad)
     << ", loss ratio vs true top-k " << fmt("%.3f", r_oracle) << " (initial loss " << fmt("%.3g", clt.initial_loss)
     << ", final " << fmt("%.3g", loss_c) << ")";
  return {r_loss <= 2.0 && r_grad <= 2.0 && r_oracle <= 1.5, os.str()};
}

// 6. lambda < 1 strictly inside the beta range; endpoints solve the quadratic.
Outcome feasibility_scan() {
  double worst_root = 0.0, worst_lambda = 0.0;
  std::size_t checked = 0;
  for (int gi = 0; gi <= 9; ++gi) {
    const double g = gi / 10.0;
    const auto r = theory::beta_range(g);
    for (double b : {r.lo, r.hi}) {
      worst_root = std::max(worst_root, std::abs(2 * (1 + g) * b * b - 2 * (1 + g) * b + g));
    }
    for (int s = 1; s < 1000; ++s) {
      const double b = r.lo + (r.hi - r.lo) * s / 1000.0;
      if (!(b > r.lo && b < r.hi && b > 0.0 && b <= 1.0)) continue;
      const double ce = theory::c_epsilon(b, g);
      worst_lambda = std::max(worst_lambda, theory::lambda_constant(b, g, ce / 2));
      ++checked;
    }
  }
  std::ostringstream os;
  os << checked << " grid points, max lambda " << fmt("%.6f", worst_lambda) << ", max root residual "
     << fmt("%.3g", worst_root);
  return {worst_lambda < 1.0 && worst_root <= 1e-12, os.str()};
}

double tail_cosine(const sim::TrainingTrace& t) {
  const std::size_t from = t.records.size() - t.records.size() / 5;
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = from; i < t.records.size(); ++i) {
    const double c = t.records[i].mean_cosine_distance;
    if (std::isfinite(c)) {
      acc += c;
      ++count;
    }
  }
  return count ? acc / count : std::nan("");
}

// 7. The low-pass filter keeps worker memories more aligned under a scaled lr.
// Measured in the transient phase (first 100 steps at 32 samples per worker)
// while the mean gradient still dominates the sampling noise.
Outcome filter_effect() {
  int wins = 0;
  std::ostringstream os;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto lg = problems::make_logistic(2000, 100, 1e-3, 700 + seed);
    sim::SimConfig cfg;
    cfg.workers = 8;
    cfg.rate = 10;
    cfg.lr = 0.1 * 8;
    cfg.batch_size = 32;
    cfg.iterations = 100;
    cfg.compressor.kind = Kind::kCLTk;
    cfg.metric_stride = 5;
    cfg.seed = seed;
    cfg.beta = 0.1;
    const double low = tail_cosine(sim::run(cfg, *lg));
    cfg.beta = 1.0;
    const double classic = tail_cosine(sim::run(cfg, *lg));
    if (low < classic) ++wins;
    os << (seed > 1 ? " " : "") << fmt("%.3f", low) << "/" << fmt("%.3f", classic);
  }
  return {wins >= 8, std::to_string(wins) + "/10 seeds lower with beta=0.1 (beta=0.1/beta=1: " + os.str() + ")"};
}

// 8. Reduce payloads are flat in n; gather download is n times the upload.
Outcome build_up() {
  const auto q = problems::make_quadratic(512, 10.0, 0.1, 808);
  std::vector<std::uint64_t> up, down;
  for (std::size_t n : {2, 4, 8, 16, 32}) {
    sim::SimConfig cfg;
    cfg.workers = n;
    cfg.rate = 16;
    cfg.beta = 0.5;
    cfg.lr = 0.1;
    cfg.iterations = 5;
    cfg.compressor.kind = Kind::kCLTk;
    cfg.seed = 808;
    const auto t = sim::run(cfg, *q);
    up.push_back(t.records.back().upload_bytes_per_worker);
    down.push_back(t.records.back().download_bytes_per_worker);
  }
  const bool flat = std::all_of(up.begin(), up.end(), [&](auto x) { return x == up[0]; }) &&
                    std::all_of(down.begin(), down.end(), [&](auto x) { return x == down[0]; });
  bool linear = true;
  perf::SystemSpec sys;
  perf::WorkloadSpec wl;
  wl.scheme = perf::Scheme::kLocalTopK;
  for (std::size_t n : {8, 16, 32, 64, 128}) {
    sys.workers = n;
    const auto e = perf::estimate_step(sys, wl);
    const double expected = static_cast<double>(n) * (wl.params / wl.rate * (sys.value_bytes + sys.index_bytes) / sys.bandwidth);
    if (e.download_s != expected) linear = false;
  }
  std::ostringstream os;
  os << "simulator per-worker bytes up " << up[0] << " down " << down[0] << " for n=2..32 ("
     << (flat ? "constant" : "varies") << "), local_topk download = n * upload " << (linear ? "exact" : "off");
  return {flat && linear, os.str()};
}

// 9. Speedup shapes, bandwidth scaling and the calibrated comm fraction.
Outcome perf_shape() {
  const std::vector<double> ns{8, 16, 32, 64, 128};
  const std::vector<perf::Scheme> schemes{perf::Scheme::kNone, perf::Scheme::kLocalTopK, perf::Scheme::kScaleCom};
  const auto rows = perf::sweep(perf::SystemSpec{}, perf::WorkloadSpec{}, perf::SweepAxis::kWorkers, ns, schemes);
  bool scalecom_flat = true, local_decreasing = true;
  for (std::size_t i = 1; i < 5; ++i) {
    if (rows[10 + i].speedup != rows[10].speedup) scalecom_flat = false;
    if (!(rows[5 + i].speedup < rows[4 + i].speedup)) local_decreasing = false;
  }
  perf::SystemSpec sys;
  perf::WorkloadSpec wl;
  wl.scheme = perf::Scheme::kNone;
  const double c32 = perf::estimate_step(sys, wl).comm_s;
  sys.bandwidth = 64e9;
  const bool halves = perf::estimate_step(sys, wl).comm_s * 2 == c32;
  sys.bandwidth = 32e9;
  const std::vector<perf::FractionTarget> targets{{8, 0.56}, {32, 0.20}};
  sys.efficiency = perf::fit_efficiency(sys, wl, targets);
  wl.batch_per_worker = 8;
  const double f8 = perf::estimate_step(sys, wl).comm_fraction;
  wl.batch_per_worker = 32;
  const double f32 = perf::estimate_step(sys, wl).comm_fraction;
  const bool calibrated = f8 > f32 && std::abs(f8 - 0.56) <= 0.15 && std::abs(f32 - 0.20) <= 0.15;
  std::ostringstream os;
  os << "scalecom speedup " << fmt("%.3f", rows[10].speedup) << (scalecom_flat ? " flat" : " varies")
     << ", local_topk " << fmt("%.3f", rows[5].speedup) << "->" << fmt("%.3f", rows[9].speedup)
     << (local_decreasing ? " decreasing" : " not decreasing") << ", bandwidth x2 " << (halves ? "halves" : "does not halve")
     << " comm, efficiency " << fmt("%.4f", sys.efficiency) << " gives comm fraction " << fmt("%.3f", f8) << " (b=8) / "
     << fmt("%.3f", f32) << " (b=32)";
  return {scalecom_flat && local_decreasing && halves && calibrated, os.str()};
}

// 10. Finite-difference validation of every gradient oracle.
Outcome gradient_oracles() {
  RngStream rng(1010, 0);
  auto random_theta = [&](std::size_t p, double scale) {
    DenseVector t(p);
    for (auto& x : t) x = scale * rng.normal();
    return t;
  };
  const auto q = problems::make_quadratic(50, 100.0, 0.1, 1010);
  const auto lg = problems::make_logistic(200, 20, 1e-3, 1010);
  const auto mlp = problems::make_mlp({6, 8, 3}, 64, 1010);
  double eq = 0, el = 0, em = 0;
  for (int i = 0; i < 5; ++i) {
    eq = std::max(eq, problems::finite_difference_check(*q, random_theta(q->dimension(), 1.0), 1e-5));
    el = std::max(el, problems::finite_difference_check(*lg, random_theta(lg->dimension(), 0.5), 1e-5));
    em = std::max(em, problems::finite_difference_check(*mlp, random_theta(mlp->dimension(), 0.5), 1e-5));
  }
  std::ostringstream os;
  os << "max relative error quadratic " << fmt("%.3g", eq) << ", logistic " << fmt("%.3g", el) << ", mlp "
     << fmt("%.3g", em);
  return {eq < 1e-8 && el < 1e-6 && em < 1e-5, os.str()};
}

// 11. One worker's error-feedback magnitudes rank like the global mean's.
// Feature scales log-spaced over three decades; the isotropic instance is
// reported alongside for reference.
double final_snapshot_rho(double feature_spread, std::size_t* at) {
  const auto lg = problems::make_logistic(2000, 400, 1e-3, 1111, 3.0, feature_spread);
  sim::SimConfig cfg;
  cfg.workers = 8;
  cfg.rate = 10;
  cfg.lr = 0.1;
  cfg.beta = 1.0;
  cfg.batch_size = 8;
  cfg.iterations = 500;
  cfg.compressor.kind = Kind::kCLTk;
  cfg.metric_stride = 10;
  cfg.snapshot_stride = 100;
  cfg.seed = 1111;
  const auto t = sim::run(cfg, *lg);
  auto it = std::find_if(t.records.rbegin(), t.records.rend(), [](const auto& r) { return r.snapshot.has_value(); });
  if (it == t.records.rend()) throw Error("run produced no snapshot");
  const auto& snap = *it->snapshot;
  DenseVector a(snap.ef_grad0.size()), b(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = std::abs(snap.ef_grad0[i]);
    b[i] = std::abs(snap.ef_grad_mean[i]);
  }
  *at = it->t;
  return metrics::spearman_rank(a, b, 1111).rho;
}

Outcome similarity_statistics() {
  std::size_t at = 0, at_iso = 0;
  const double rho = final_snapshot_rho(1000.0, &at);
  const double iso = final_snapshot_rho(1.0, &at_iso);
  std::ostringstream os;
  os << "spearman rho " << fmt("%.3f", rho) << " at t=" << at << " (isotropic features: " << fmt("%.3f", iso) << ")";
  return {rho > 0.3, os.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"commutativity", commutativity},
      {"lemma1 oracle", lemma1_oracle},
      {"virtual sequence", virtual_sequence},
      {"exact degenerations", degenerations},
      {"convergence parity", convergence_parity},
      {"feasibility scan", feasibility_scan},
      {"filter effect", filter_effect},
      {"gradient build-up", build_up},
      {"perf model shape", perf_shape},
      {"gradient oracles", gradient_oracles},
      {"similarity statistics", similarity_statistics},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("criterion %2zu %-22s %s  %s [%.2fs]\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
