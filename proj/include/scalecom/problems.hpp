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
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scalecom/core.hpp"

namespace scalecom::problems {

/// Sample positions drawn by one worker for one step.
struct MiniBatch {
  std::vector<std::size_t> indices;

  std::size_t size() const noexcept { return indices.size(); }
  // FNV-1a over the indices; lets paired runs prove they saw the same data.
  std::uint64_t fingerprint() const noexcept;
};

/// Half-open range of sample ids a worker draws from.
struct Shard {
  std::size_t begin = 0;
  std::size_t end = 0;
};

enum class DataMode {
  kIid,      // every worker samples the whole dataset
  kSharded,  // contiguous disjoint slices
};

/// Objective with a stochastic gradient oracle. Implementations are
/// immutable after construction; all methods are safe to call concurrently.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string_view name() const noexcept = 0;
  virtual std::size_t dimension() const noexcept = 0;
  // Zero means samples are generated on the fly (no finite dataset).
  virtual std::size_t num_samples() const noexcept = 0;

  virtual double loss(const DenseVector& theta) const = 0;
  virtual DenseVector full_gradient(const DenseVector& theta) const = 0;
  // |B|^-1 sum_j grad f_j(theta). Throws ArgumentError on an empty batch.
  virtual DenseVector stochastic_gradient(const DenseVector& theta, const MiniBatch& batch,
                                          RngStream& rng) const = 0;

  virtual DenseVector initial_parameters() const { return DenseVector(dimension()); }
  // Exact gradient Lipschitz constant when known analytically.
  virtual std::optional<double> lipschitz_constant() const { return std::nullopt; }
};

/// f(theta) = 1/2 (theta - theta*)^T A (theta - theta*) with diagonal A.
/// Per-sample gradients are A theta - b_j with b_j = b + N(0, noise^2 I); the
/// loss is shifted by the optimum so that it is zero at theta*.
class QuadraticProblem final : public Problem {
 public:
  QuadraticProblem(DenseVector diag, DenseVector b, double noise);

  std::string_view name() const noexcept override { return "quadratic"; }
  std::size_t dimension() const noexcept override { return diag_.size(); }
  std::size_t num_samples() const noexcept override { return 0; }
  double loss(const DenseVector& theta) const override;
  DenseVector full_gradient(const DenseVector& theta) const override;
  DenseVector stochastic_gradient(const DenseVector& theta, const MiniBatch& batch,
                                  RngStream& rng) const override;
  std::optional<double> lipschitz_constant() const override;

  const DenseVector& diag() const noexcept { return diag_; }
  const DenseVector& b() const noexcept { return b_; }
  const DenseVector& optimum() const noexcept { return optimum_; }
  double noise() const noexcept { return noise_; }

 private:
  DenseVector diag_;
  DenseVector b_;
  DenseVector optimum_;
  double noise_;
};

// Diagonal log-spaced in [1/condition, 1]; optimum drawn N(0, 1).
std::shared_ptr<QuadraticProblem> make_quadratic(std::size_t dim, double condition_number,
                                                 double noise, std::uint64_t seed);

/// Row-major feature matrix with one label per row.
struct Dataset {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> features;
  std::vector<double> labels;

  std::span<const double> row(std::size_t r) const noexcept {
    return {features.data() + r * cols, cols};
  }
};

struct CsvOptions {
  char delimiter = ',';
  // nullopt: header detected when the first row does not parse as numbers.
  std::optional<bool> has_header;
};

// Feature columns followed by one label column. Blank lines and lines
// starting with '#' are skipped. Throws ArgumentError with a line number on
// malformed rows.
Dataset load_csv_dataset(const std::filesystem::path& path, const CsvOptions& options = {});

/// Binary logistic regression with L2 penalty l2/2 |theta|^2.
class LogisticProblem final : public Problem {
 public:
  LogisticProblem(Dataset data, double l2);

  std::string_view name() const noexcept override { return "logistic"; }
  std::size_t dimension() const noexcept override { return data_.cols; }
  std::size_t num_samples() const noexcept override { return data_.rows; }
  double loss(const DenseVector& theta) const override;
  DenseVector full_gradient(const DenseVector& theta) const override;
  DenseVector stochastic_gradient(const DenseVector& theta, const MiniBatch& batch,
                                  RngStream& rng) const override;

  const Dataset& data() const noexcept { return data_; }
  double l2() const noexcept { return l2_; }

 private:
  void accumulate_gradient(const DenseVector& theta, std::size_t row, DenseVector& out) const;

  Dataset data_;
  double l2_;
};

// Gaussian features; labels ~ Bernoulli(sigmoid(x . w)) with w ~ N(0, signal^2 / p).
// Feature j has standard deviation feature_spread^(-j / (p - 1)), so the
// scales are log-spaced over [1 / feature_spread, 1]; 1 gives isotropic data.
std::shared_ptr<LogisticProblem> make_logistic(std::size_t samples, std::size_t dim, double l2,
                                               std::uint64_t seed, double signal = 3.0,
                                               double feature_spread = 1.0);

enum class Activation { kTanh, kRelu };

/// Fully connected network with softmax cross-entropy. Parameters are packed
/// layer by layer as W (out x in, row-major) followed by the bias.
class MlpProblem final : public Problem {
 public:
  MlpProblem(std::vector<std::size_t> layers, Activation activation, Dataset data,
             std::uint64_t init_seed);

  std::string_view name() const noexcept override { return "mlp"; }
  std::size_t dimension() const noexcept override { return dim_; }
  std::size_t num_samples() const noexcept override { return data_.rows; }
  double loss(const DenseVector& theta) const override;
  DenseVector full_gradient(const DenseVector& theta) const override;
  DenseVector stochastic_gradient(const DenseVector& theta, const MiniBatch& batch,
                                  RngStream& rng) const override;
  DenseVector initial_parameters() const override;

  const std::vector<std::size_t>& layers() const noexcept { return layers_; }

 private:
  // Adds the gradient of sample `row` into `grad` (if non-null); returns its loss.
  double sample_pass(const DenseVector& theta, std::size_t row, DenseVector* grad) const;

  std::vector<std::size_t> layers_;
  Activation activation_;
  Dataset data_;
  std::uint64_t init_seed_;
  std::size_t dim_ = 0;
};

// Gaussian blobs, one per class, in `layers.front()` dimensions.
std::shared_ptr<MlpProblem> make_mlp(std::vector<std::size_t> layers, std::size_t samples,
                                     std::uint64_t seed, Activation activation = Activation::kTanh);

std::vector<Shard> make_shards(const Problem& problem, std::size_t workers, DataMode mode);

// Draws `batch_size` ids uniformly with replacement from the shard.
MiniBatch sample_minibatch(const Shard& shard, std::size_t batch_size, RngStream& rng);

// Max over coordinates of |fd_i - g_i| / max(1, |fd_i|, |g_i|), with
// central differences of step h.
double finite_difference_check(const Problem& problem, const DenseVector& theta, double h);

struct ProblemConstants {
  double G = 0.0;      // max observed stochastic gradient norm
  double L = 0.0;      // analytic, or max secant ratio along the trajectory
  double sigma = 0.0;  // sqrt of max over points of mean |g_hat - grad|^2
};

struct ConstantProbe {
  std::size_t batch_size = 1;
  std::size_t probes = 16;
};

ProblemConstants estimate_constants(const Problem& problem,
                                    std::span<const DenseVector> trajectory,
                                    const ConstantProbe& probe, RngStream& rng);

}  // namespace scalecom::problems
