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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "scalecom/compress.hpp"
#include "scalecom/core.hpp"
#include "scalecom/feedback.hpp"
#include "scalecom/problems.hpp"

namespace scalecom::sim {

enum class LrScheduleKind { kConstant, kWarmupDecay };

/// Constant, or linear ramp over `warmup_steps` followed by linear decay to
/// `final_scale * lr` at the last iteration.
struct LrSchedule {
  LrScheduleKind kind = LrScheduleKind::kConstant;
  std::size_t warmup_steps = 0;
  double final_scale = 1.0;

  double at(double base, std::size_t t, std::size_t iterations) const noexcept;
};

/// Contiguous slice of the flat parameter vector compressed with its own rate.
struct Partition {
  std::size_t size = 0;
  double rate = 1.0;
};

struct SimConfig {
  std::size_t workers = 1;
  // Entries kept per step. Zero means ceil(p / rate).
  std::size_t k = 0;
  double rate = 1.0;
  double lr = 0.1;
  double beta = 1.0;
  std::size_t iterations = 100;
  // Steps run uncompressed before the compressor switches on.
  std::size_t warmup_steps = 0;
  compress::CompressorKind compressor{};
  std::size_t batch_size = 1;
  double momentum = 0.0;
  LrSchedule schedule{};
  std::vector<Partition> partitions;
  problems::DataMode data_mode = problems::DataMode::kIid;
  std::uint64_t seed = 0;
  // Gradient norm, contraction and similarity metrics every `metric_stride`
  // steps (and on the last one); loss and byte counters every step.
  std::size_t metric_stride = 1;
  // Vector snapshots for offline analysis; zero disables.
  std::size_t snapshot_stride = 0;
  // Compute worker gradients concurrently; reduction order is unchanged.
  bool parallel = false;
  std::size_t value_bytes = 4;
  std::size_t index_bytes = 4;
  double divergence_factor = 1e6;

  // Throws ArgumentError describing the first violated constraint.
  void validate(std::size_t dim) const;
  std::size_t resolved_k(std::size_t dim) const;
};

struct WorkerState {
  feedback::ErrorFeedbackMemory memory;
  problems::Shard shard;
  RngStream rng;
};

struct Snapshot {
  DenseVector memory0;
  std::optional<DenseVector> memory1;
  DenseVector ef_grad0;
  DenseVector ef_grad_mean;
};

/// Everything recorded about one step; describes the state after the update.
/// NaN marks metrics that were not computed or are undefined.
struct IterationRecord {
  std::size_t t = 0;
  std::size_t leader = 0;
  bool compressed = false;
  double lr = 0.0;
  double loss = 0.0;
  double grad_norm_sq = 0.0;
  double gamma = 0.0;
  double gamma0 = 0.0;
  double d_over_k = 0.0;
  double mean_cosine_distance = 0.0;
  double virtual_residual = 0.0;
  double memory_norm = 0.0;  // |mean memory|
  std::size_t support_size = 0;
  std::uint64_t upload_bytes_per_worker = 0;
  std::uint64_t download_bytes_per_worker = 0;
  std::uint64_t index_bytes = 0;
  std::vector<std::uint64_t> batch_ids;
  std::optional<Snapshot> snapshot;
};

struct TrainingTrace {
  std::vector<IterationRecord> records;
  double initial_loss = 0.0;
  DenseVector final_parameters;
};

/// Mutable run state: shared model, per-worker states and diagnostics.
struct SimState {
  DenseVector theta;
  DenseVector velocity;
  // Iterate driven by uncompressed averaged gradients; satisfies
  // theta - v = (lr / beta) * mean memory for constant lr without momentum.
  DenseVector virtual_theta;
  std::vector<WorkerState> workers;
  RngStream shared_rng{0, 0};
  std::size_t t = 0;
  double initial_loss = 0.0;
};

class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t iteration, const std::string& what)
      : Error(what), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }
  const TrainingTrace& partial_trace() const noexcept { return partial_; }
  void set_partial_trace(TrainingTrace trace) { partial_ = std::move(trace); }

 private:
  std::size_t iteration_;
  TrainingTrace partial_;
};

std::size_t leader_schedule(std::size_t t, std::size_t workers);

SimState make_state(const SimConfig& cfg, const problems::Problem& problem);
// State without a problem: theta given explicitly, every worker on an empty shard.
SimState make_state(const SimConfig& cfg, DenseVector theta0);

struct WorkerGradients {
  std::vector<DenseVector> grads;
  std::vector<std::uint64_t> batch_ids;
};

WorkerGradients compute_worker_gradients(SimState& state, const SimConfig& cfg,
                                         const problems::Problem& problem);

// Support chosen by `selector` (a leader, or the global mean for the oracle).
IndexSet select_support(const DenseVector& selector, const SimConfig& cfg, std::size_t k,
                        RngStream& shared_rng);

/// One compressed step on the supplied worker gradients: leader top-k,
/// shared sparsification, reduction, low-pass memory update, model update.
/// Loss-dependent fields are left at zero when `problem` is null.
IterationRecord apply_scalecom(SimState& state, const SimConfig& cfg,
                               std::span<const DenseVector> grads,
                               const problems::Problem* problem = nullptr);

// Mean of payloads on one shared support, summed in ascending worker order.
// Throws ArgumentError when the supports differ.
SparseGradient sparse_allreduce(std::span<const SparseGradient> payloads);

// Uncompressed synchronous SGD on the supplied worker gradients.
IterationRecord apply_baseline(SimState& state, const SimConfig& cfg,
                               std::span<const DenseVector> grads,
                               const problems::Problem* problem = nullptr);

IterationRecord step_scalecom(SimState& state, const SimConfig& cfg,
                              const problems::Problem& problem);
IterationRecord step_baseline_sgd(SimState& state, const SimConfig& cfg,
                                  const problems::Problem& problem);

// |(theta - v) - (lr / beta) mean_memory| / max(1, |theta|)
double virtual_sequence_residual(const SimState& state, double lr, double beta);

enum class Mode { kScaleCom, kBaseline };

// Throws DivergenceError carrying the partial trace.
TrainingTrace run(const SimConfig& cfg, const problems::Problem& problem,
                  Mode mode = Mode::kScaleCom);

struct TraceSummary {
  std::size_t iterations = 0;
  double final_loss = 0.0;
  double final_grad_norm_sq = 0.0;
  double mean_d_over_k = 0.0;
  double mean_gamma = 0.0;
  double max_virtual_residual = 0.0;
  std::uint64_t total_upload_bytes_per_worker = 0;
  std::uint64_t total_download_bytes_per_worker = 0;
  std::uint64_t total_index_bytes = 0;
};

// Means skip NaN entries (uncomputed or undefined).
TraceSummary summarize(const TrainingTrace& trace);

}  // namespace scalecom::sim
