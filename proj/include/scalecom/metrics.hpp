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

#include "scalecom/core.hpp"

namespace scalecom::metrics {

/// Symmetric n x n cosine distances; entries touching a zero vector are empty.
struct SimilarityMatrix {
  std::size_t n = 0;
  std::vector<std::optional<double>> entries;

  const std::optional<double>& at(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
  // Mean over defined upper-triangle entries; NaN when none are defined.
  double mean_off_diagonal() const;
};

SimilarityMatrix memory_similarity(std::span<const DenseVector> memories);

struct Overlap {
  double d_over_k = 0.0;
  double overlap = 0.0;  // 1 - d/k
};

// Compares `support` with the top-k of the mean error-feedback gradient,
// where k must equal |support|.
Overlap overlap_vs_true_topk(std::span<const DenseVector> ef_grads, const IndexSet& support,
                             std::size_t k);

// Fraction of the mean's top-`k_true` entries that fall inside `support`;
// lets the reference and compressed k differ.
double true_topk_coverage(std::span<const DenseVector> ef_grads, const IndexSet& support,
                          std::size_t k_true);

/// Counts of |v_i| over log-spaced bins spanning [min positive, max].
struct Histogram {
  std::vector<double> edges;  // bins + 1 entries; empty when v has no nonzero entry
  std::vector<std::size_t> counts;
  std::size_t zeros = 0;

  std::size_t total() const noexcept;
};

Histogram magnitude_histogram(const DenseVector& v, std::size_t bins);

// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;
  bool permutation = false;
};

inline constexpr std::size_t kPermutationMaxLength = 500;
inline constexpr std::size_t kPermutations = 10000;

// Two-sided p-value: permutation test up to kPermutationMaxLength entries,
// normal approximation rho sqrt(p - 1) beyond. Throws UndefinedError on
// constant input.
SpearmanResult spearman_rank(const DenseVector& x, const DenseVector& y, std::uint64_t seed = 0);

struct QqResult {
  std::vector<double> qx;
  std::vector<double> qy;
  double r_squared = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
};

// Paired quantiles at probabilities (i + 1/2) / count and R^2 of the
// least-squares line through them.
QqResult qq_quantiles(const DenseVector& x, const DenseVector& y, std::size_t count);

}  // namespace scalecom::metrics
