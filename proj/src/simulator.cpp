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

#include "scalecom/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <string>

namespace scalecom::sim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kSharedStream = std::uint64_t{1} << 40;

using compress::Kind;

std::size_t ceil_div(std::size_t size, double rate) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(size) / rate));
}

}  // namespace

double LrSchedule::at(double base, std::size_t t, std::size_t iterations) const noexcept {
  if (kind == LrScheduleKind::kConstant) return base;
  if (t < warmup_steps) {
    return base * static_cast<double>(t + 1) / static_cast<double>(warmup_steps);
  }
  const std::size_t decay_len = iterations > warmup_steps + 1 ? iterations - warmup_steps - 1 : 0;
  if (decay_len == 0) return base;
  const double frac = std::min(1.0, static_cast<double>(t - warmup_steps) / decay_len);
  return base * (1.0 + (final_scale - 1.0) * frac);
}

void SimConfig::validate(std::size_t dim) const {
  if (workers < 1) throw ArgumentError("workers must be >= 1");
  if (dim < 1 || dim > kMaxDimension) throw ArgumentError("dimension must be in [1, 2^31]");
  if (!(beta > 0.0 && beta <= 1.0)) throw ArgumentError("beta must lie in (0, 1]");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ArgumentError("lr must be > 0");
  if (k == 0 && !(rate >= 1.0)) throw ArgumentError("rate must be >= 1");
  if (k > dim) throw ArgumentError("k must not exceed the dimension");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (momentum < 0.0 || momentum >= 1.0) throw ArgumentError("momentum must lie in [0, 1)");
  if (metric_stride < 1) throw ArgumentError("metric_stride must be >= 1");
  if (schedule.kind == LrScheduleKind::kWarmupDecay && schedule.final_scale < 0.0) {
    throw ArgumentError("lr schedule final_scale must be >= 0");
  }
  compressor.validate(dim);
  if (!partitions.empty()) {
    std::size_t total = 0;
    for (const auto& part : partitions) {
      if (part.size == 0) throw ArgumentError("partition size must be >= 1");
      if (!(part.rate >= 1.0)) throw ArgumentError("partition rate must be >= 1");
      total += part.size;
    }
    if (total != dim) {
      throw ArgumentError("partition sizes sum to " + std::to_string(total) +
                          " but the model has " + std::to_string(dim) + " parameters");
    }
  }
  const std::size_t kk = resolved_k(dim);
  if (kk < 1 || kk > dim) throw ArgumentError("resolved k must lie in [1, p]");
}

std::size_t SimConfig::resolved_k(std::size_t dim) const {
  if (!partitions.empty()) {
    std::size_t total = 0;
    for (const auto& part : partitions) total += std::min(part.size, ceil_div(part.size, part.rate));
    return total;
  }
  if (k > 0) return k;
  return std::min(dim, ceil_div(dim, rate));
}

std::size_t leader_schedule(std::size_t t, std::size_t workers) {
  if (workers == 0) throw ArgumentError("leader_schedule: need at least one worker");
  return t % workers;
}

namespace {

SimState base_state(const SimConfig& cfg, DenseVector theta0) {
  SimState state;
  state.velocity = DenseVector(theta0.size());
  state.virtual_theta = theta0;
  state.theta = std::move(theta0);
  state.shared_rng = RngStream(cfg.seed, kSharedStream);
  return state;
}

}  // namespace

SimState make_state(const SimConfig& cfg, const problems::Problem& problem) {
  cfg.validate(problem.dimension());
  SimState state = base_state(cfg, problem.initial_parameters());
  const auto shards = problems::make_shards(problem, cfg.workers, cfg.data_mode);
  state.workers.reserve(cfg.workers);
  for (std::size_t w = 0; w < cfg.workers; ++w) {
    state.workers.push_back(WorkerState{feedback::ErrorFeedbackMemory(problem.dimension(), cfg.beta),
                                        shards[w], RngStream(cfg.seed, w)});
  }
  state.initial_loss = problem.loss(state.theta);
  return state;
}

SimState make_state(const SimConfig& cfg, DenseVector theta0) {
  cfg.validate(theta0.size());
  const std::size_t dim = theta0.size();
  SimState state = base_state(cfg, std::move(theta0));
  for (std::size_t w = 0; w < cfg.workers; ++w) {
    state.workers.push_back(
        WorkerState{feedback::ErrorFeedbackMemory(dim, cfg.beta), {}, RngStream(cfg.seed, w)});
  }
  return state;
}

WorkerGradients compute_worker_gradients(SimState& state, const SimConfig& cfg,
                                         const problems::Problem& problem) {
  const std::size_t n = state.workers.size();
  WorkerGradients out;
  out.grads.resize(n);
  out.batch_ids.resize(n);
  auto work = [&](std::size_t w) {
    auto& worker = state.workers[w];
    const auto batch = problems::sample_minibatch(worker.shard, cfg.batch_size, worker.rng);
    out.batch_ids[w] = batch.fingerprint();
    out.grads[w] = problem.stochastic_gradient(state.theta, batch, worker.rng);
  };
  if (cfg.parallel && n > 1) {
    std::vector<std::future<void>> jobs;
    jobs.reserve(n);
    for (std::size_t w = 0; w < n; ++w) jobs.push_back(std::async(std::launch::async, work, w));
    for (auto& j : jobs) j.get();
  } else {
    for (std::size_t w = 0; w < n; ++w) work(w);
  }
  return out;
}

IndexSet select_support(const DenseVector& selector, const SimConfig& cfg, std::size_t k,
                        RngStream& shared_rng) {
  const std::size_t p = selector.size();
  const Kind kind = cfg.compressor.kind;
  if (kind == Kind::kIdentity) return IndexSet::full(p);

  auto pick = [&](std::size_t offset, std::size_t len, std::size_t kk) -> std::vector<Index> {
    if (kind == Kind::kRandomK) {
      const IndexSet local = compress::random_k_indices(len, kk, shared_rng);
      std::vector<Index> out;
      for (Index i : local) out.push_back(static_cast<Index>(offset + i));
      return out;
    }
    if (kind == Kind::kTopKChunked && cfg.compressor.chunks > 1) {
      DenseVector slice(std::vector<double>(selector.begin() + static_cast<std::ptrdiff_t>(offset),
                                            selector.begin() +
                                                static_cast<std::ptrdiff_t>(offset + len)));
      const IndexSet local =
          compress::chunked_top_k_indices(slice, kk, std::min(cfg.compressor.chunks, len));
      std::vector<Index> out;
      for (Index i : local) out.push_back(static_cast<Index>(offset + i));
      return out;
    }
    return compress::top_k_in_range(selector, offset, len, kk);
  };

  if (cfg.partitions.empty()) return IndexSet(pick(0, p, k), p);
  std::vector<Index> all;
  std::size_t offset = 0;
  for (const auto& part : cfg.partitions) {
    const auto local = pick(offset, part.size, std::min(part.size, ceil_div(part.size, part.rate)));
    all.insert(all.end(), local.begin(), local.end());
    offset += part.size;
  }
  return IndexSet(std::move(all), p);
}

SparseGradient sparse_allreduce(std::span<const SparseGradient> payloads) {
  if (payloads.empty()) throw ArgumentError("sparse all-reduce: no payloads");
  const IndexSet& support = payloads.front().support();
  std::vector<double> acc(support.size(), 0.0);
  for (const auto& payload : payloads) {
    if (!(payload.support() == support)) {
      throw ArgumentError("sparse all-reduce: workers sent mismatched supports");
    }
    const auto vals = payload.values();
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += vals[j];
  }
  const double n = static_cast<double>(payloads.size());
  for (double& a : acc) a /= n;
  return SparseGradient(support, std::move(acc));
}

namespace {

void require_finite_grads(std::span<const DenseVector> grads, std::size_t t) {
  for (std::size_t w = 0; w < grads.size(); ++w) {
    if (!grads[w].all_finite()) {
      throw DivergenceError(t, "non-finite gradient on worker " + std::to_string(w) +
                                   " at iteration " + std::to_string(t));
    }
  }
}

bool is_metric_step(const SimConfig& cfg, std::size_t t) {
  return t % cfg.metric_stride == 0 || t + 1 == cfg.iterations;
}

double mean_pairwise_cosine(const std::vector<WorkerState>& workers) {
  if (workers.size() < 2) return kNaN;
  for (const auto& w : workers) {
    if (w.memory.memory().squared_norm() == 0.0) return kNaN;
  }
  double acc = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < workers.size(); ++i) {
    for (std::size_t j = i + 1; j < workers.size(); ++j) {
      acc += cosine_distance(workers[i].memory.memory(), workers[j].memory.memory());
      ++pairs;
    }
  }
  return acc / static_cast<double>(pairs);
}

DenseVector mean_memory(const std::vector<WorkerState>& workers) {
  DenseVector acc(workers.front().memory.dim());
  for (const auto& w : workers) {
    const auto& m = w.memory.memory();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += m[i];
  }
  acc.scale(1.0 / static_cast<double>(workers.size()));
  return acc;
}

void update_model(SimState& state, const SimConfig& cfg, const DenseVector& avg,
                  const DenseVector& uncompressed_avg, double lr) {
  if (cfg.momentum > 0.0) {
    for (std::size_t i = 0; i < avg.size(); ++i) {
      state.velocity[i] = cfg.momentum * state.velocity[i] + avg[i];
      state.theta[i] -= lr * state.velocity[i];
    }
  } else {
    for (std::size_t i = 0; i < avg.size(); ++i) state.theta[i] -= lr * avg[i];
  }
  for (std::size_t i = 0; i < avg.size(); ++i) state.virtual_theta[i] -= lr * uncompressed_avg[i];
}

void finish_record(SimState& state, const SimConfig& cfg, const problems::Problem* problem,
                   IterationRecord& rec) {
  const bool metrics = is_metric_step(cfg, rec.t);
  rec.mean_cosine_distance = metrics ? mean_pairwise_cosine(state.workers) : kNaN;
  rec.memory_norm = mean_memory(state.workers).norm();
  rec.virtual_residual = virtual_sequence_residual(state, rec.lr, cfg.beta);
  if (problem != nullptr) {
    rec.loss = problem->loss(state.theta);
    rec.grad_norm_sq = metrics ? problem->full_gradient(state.theta).squared_norm() : kNaN;
    const double limit = cfg.divergence_factor * state.initial_loss;
    if (!std::isfinite(rec.loss) || (state.initial_loss > 0.0 && rec.loss > limit)) {
      throw DivergenceError(rec.t, "loss diverged at iteration " + std::to_string(rec.t));
    }
  }
  if (!state.theta.all_finite()) {
    throw DivergenceError(rec.t, "parameters became non-finite at iteration " +
                                     std::to_string(rec.t));
  }
  ++state.t;
}

}  // namespace

IterationRecord apply_scalecom(SimState& state, const SimConfig& cfg,
                               std::span<const DenseVector> grads,
                               const problems::Problem* problem) {
  const std::size_t n = state.workers.size();
  const std::size_t p = state.theta.size();
  if (grads.size() != n) throw DimensionError("apply_scalecom: one gradient per worker expected");
  for (const auto& g : grads) require_same_size(state.theta, g, "apply_scalecom");
  const std::size_t t = state.t;
  require_finite_grads(grads, t);

  IterationRecord rec;
  rec.t = t;
  rec.leader = leader_schedule(t, n);
  rec.lr = cfg.schedule.at(cfg.lr, t, cfg.iterations);
  const Kind kind = cfg.compressor.kind;
  rec.compressed = t >= cfg.warmup_steps && kind != Kind::kIdentity;
  const std::size_t k = cfg.resolved_k(p);
  const auto bv = static_cast<std::uint64_t>(cfg.value_bytes);
  const auto bi = static_cast<std::uint64_t>(cfg.index_bytes);

  std::vector<DenseVector> ef;
  ef.reserve(n);
  for (std::size_t w = 0; w < n; ++w) ef.push_back(feedback::residual_input(state.workers[w].memory, grads[w]));
  const bool metrics = is_metric_step(cfg, t);
  const bool need_mean = metrics || kind == Kind::kTrueTopKOracle || cfg.snapshot_stride > 0;
  const DenseVector ef_mean = need_mean ? mean_of(ef) : DenseVector();

  DenseVector avg;
  std::vector<DenseVector> sent(n);
  IndexSet reported_support;
  if (!rec.compressed) {
    avg = mean_of(ef);
    reported_support = IndexSet::full(p);
    rec.support_size = p;
    rec.upload_bytes_per_worker = p * bv;
    rec.download_bytes_per_worker = p * bv;
  } else if (cfg.compressor.shared_support()) {
    // Barrier: the support is fixed before any worker compresses.
    const DenseVector& selector = kind == Kind::kTrueTopKOracle ? ef_mean : ef[rec.leader];
    const IndexSet support = select_support(selector, cfg, k, state.shared_rng);
    std::vector<SparseGradient> payloads;
    payloads.reserve(n);
    for (std::size_t w = 0; w < n; ++w) payloads.push_back(compress::sparsify(ef[w], support));
    avg = densify(sparse_allreduce(payloads));
    for (std::size_t w = 0; w < n; ++w) sent[w] = densify(payloads[w]);
    reported_support = support;
    rec.support_size = support.size();
    const std::uint64_t kk = support.size();
    switch (kind) {
      case Kind::kRandomK:
        rec.upload_bytes_per_worker = kk * bv;
        rec.download_bytes_per_worker = kk * bv;
        break;
      case Kind::kTrueTopKOracle:
        rec.upload_bytes_per_worker = p * bv;
        rec.download_bytes_per_worker = kk * (bv + bi);
        break;
      default:
        rec.upload_bytes_per_worker = kk * bv;
        rec.index_bytes = kk * bi;
        rec.download_bytes_per_worker = kk * bv;
        break;
    }
  } else {
    // Local top-k: supports differ, so the server gathers every payload.
    std::vector<DenseVector> dense(n);
    for (std::size_t w = 0; w < n; ++w) {
      const IndexSet own = select_support(ef[w], cfg, k, state.shared_rng);
      if (w == 0) reported_support = own;
      sent[w] = densify(compress::sparsify(ef[w], own));
    }
    avg = mean_of(sent);
    rec.support_size = k;
    rec.upload_bytes_per_worker = k * (bv + bi);
    rec.download_bytes_per_worker = n * k * (bv + bi);
  }

  if (rec.compressed) {
    for (std::size_t w = 0; w < n; ++w) feedback::update_memory(state.workers[w].memory, grads[w], sent[w]);
  }
  const DenseVector grad_mean = mean_of(grads);
  update_model(state, cfg, avg, grad_mean, rec.lr);

  if (metrics) {
    const double total = ef_mean.squared_norm();
    if (total > 0.0) {
      const auto est = compress::measure_contraction(ef_mean, reported_support);
      rec.gamma = (ef_mean - avg).squared_norm() / total;
      rec.gamma0 = est.gamma0;
      rec.d_over_k = est.d_over_k;
    } else {
      rec.gamma = rec.gamma0 = rec.d_over_k = kNaN;
    }
  } else {
    rec.gamma = rec.gamma0 = rec.d_over_k = kNaN;
  }
  if (cfg.snapshot_stride > 0 && t % cfg.snapshot_stride == 0) {
    Snapshot snap;
    snap.memory0 = state.workers[0].memory.memory();
    if (n > 1) snap.memory1 = state.workers[1].memory.memory();
    snap.ef_grad0 = ef[0];
    snap.ef_grad_mean = ef_mean;
    rec.snapshot = std::move(snap);
  }
  finish_record(state, cfg, problem, rec);
  return rec;
}

IterationRecord apply_baseline(SimState& state, const SimConfig& cfg,
                               std::span<const DenseVector> grads,
                               const problems::Problem* problem) {
  const std::size_t n = state.workers.size();
  const std::size_t p = state.theta.size();
  if (grads.size() != n) throw DimensionError("apply_baseline: one gradient per worker expected");
  for (const auto& g : grads) require_same_size(state.theta, g, "apply_baseline");
  const std::size_t t = state.t;
  require_finite_grads(grads, t);

  IterationRecord rec;
  rec.t = t;
  rec.leader = leader_schedule(t, n);
  rec.lr = cfg.schedule.at(cfg.lr, t, cfg.iterations);
  rec.support_size = p;
  rec.upload_bytes_per_worker = p * cfg.value_bytes;
  rec.download_bytes_per_worker = p * cfg.value_bytes;
  const DenseVector avg = mean_of(grads);
  update_model(state, cfg, avg, avg, rec.lr);
  const bool metrics = is_metric_step(cfg, t);
  rec.gamma = rec.gamma0 = rec.d_over_k = metrics ? 0.0 : kNaN;
  if (cfg.snapshot_stride > 0 && t % cfg.snapshot_stride == 0) {
    Snapshot snap;
    snap.memory0 = state.workers[0].memory.memory();
    if (n > 1) snap.memory1 = state.workers[1].memory.memory();
    snap.ef_grad0 = grads[0];
    snap.ef_grad_mean = avg;
    rec.snapshot = std::move(snap);
  }
  finish_record(state, cfg, problem, rec);
  return rec;
}

IterationRecord step_scalecom(SimState& state, const SimConfig& cfg,
                              const problems::Problem& problem) {
  auto wg = compute_worker_gradients(state, cfg, problem);
  auto rec = apply_scalecom(state, cfg, wg.grads, &problem);
  rec.batch_ids = std::move(wg.batch_ids);
  return rec;
}

IterationRecord step_baseline_sgd(SimState& state, const SimConfig& cfg,
                                  const problems::Problem& problem) {
  auto wg = compute_worker_gradients(state, cfg, problem);
  auto rec = apply_baseline(state, cfg, wg.grads, &problem);
  rec.batch_ids = std::move(wg.batch_ids);
  return rec;
}

double virtual_sequence_residual(const SimState& state, double lr, double beta) {
  const DenseVector m = mean_memory(state.workers);
  double acc = 0.0;
  const double scale = lr / beta;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double r = (state.theta[i] - state.virtual_theta[i]) - scale * m[i];
    acc += r * r;
  }
  return std::sqrt(acc) / std::max(1.0, state.theta.norm());
}

TrainingTrace run(const SimConfig& cfg, const problems::Problem& problem, Mode mode) {
  SimState state = make_state(cfg, problem);
  TrainingTrace trace;
  trace.initial_loss = state.initial_loss;
  trace.records.reserve(cfg.iterations);
  try {
    for (std::size_t t = 0; t < cfg.iterations; ++t) {
      trace.records.push_back(mode == Mode::kScaleCom ? step_scalecom(state, cfg, problem)
                                                      : step_baseline_sgd(state, cfg, problem));
    }
  } catch (DivergenceError& e) {
    trace.final_parameters = state.theta;
    e.set_partial_trace(std::move(trace));
    throw;
  }
  trace.final_parameters = std::move(state.theta);
  return trace;
}

TraceSummary summarize(const TrainingTrace& trace) {
  TraceSummary s;
  s.iterations = trace.records.size();
  if (trace.records.empty()) return s;
  s.final_loss = trace.records.back().loss;
  s.final_grad_norm_sq = trace.records.back().grad_norm_sq;
  double dk = 0.0, gamma = 0.0;
  std::size_t ndk = 0, ngamma = 0;
  for (const auto& r : trace.records) {
    if (r.compressed && std::isfinite(r.d_over_k)) {
      dk += r.d_over_k;
      ++ndk;
    }
    if (r.compressed && std::isfinite(r.gamma)) {
      gamma += r.gamma;
      ++ngamma;
    }
    if (std::isfinite(r.virtual_residual)) {
      s.max_virtual_residual = std::max(s.max_virtual_residual, r.virtual_residual);
    }
    s.total_upload_bytes_per_worker += r.upload_bytes_per_worker;
    s.total_download_bytes_per_worker += r.download_bytes_per_worker;
    s.total_index_bytes += r.index_bytes;
  }
  s.mean_d_over_k = ndk ? dk / ndk : kNaN;
  s.mean_gamma = ngamma ? gamma / ngamma : kNaN;
  return s;
}

}  // namespace scalecom::sim
