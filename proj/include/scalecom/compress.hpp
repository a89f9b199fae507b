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
#include <string>
#include <string_view>

#include "scalecom/core.hpp"

namespace scalecom::compress {

/// Compressor family understood by the simulator.
///
///  - kIdentity: full support, lossless.
///  - kTopKLocal: every worker keeps its own top-k (supports differ, so the
///    server has to gather instead of reduce).
///  - kTopKChunked: cyclic leader selection where the leader uses chunk-wise
///    quasi-sorting with `chunks` chunks.
///  - kRandomK: one shared uniformly random support per step.
///  - kTrueTopKOracle: top-k of the globally averaged error-feedback gradient.
///  - kCLTk: cyclic leader selection with exact top-k.
enum class Kind { kIdentity, kTopKLocal, kTopKChunked, kRandomK, kTrueTopKOracle, kCLTk };

struct CompressorKind {
  Kind kind = Kind::kCLTk;
  std::size_t chunks = 1;

  // True when all workers sparsify on one shared support.
  bool shared_support() const noexcept { return kind != Kind::kTopKLocal; }
  void validate(std::size_t dim) const;
};

std::string_view to_string(Kind kind);
Kind parse_kind(std::string_view name);

struct ContractionEstimate {
  double gamma = 0.0;     // |y - comp(y)|^2 / |y|^2 for the given support
  double gamma0 = 0.0;    // same ratio for exact top-k of y
  double d_over_k = 0.0;  // hamming(I, top_k(y)) / (2k)
  // Measurement exceeded the lossless bound (should not happen for |I| = k).
  bool exceeds_one() const noexcept { return gamma > 1.0; }
};

// Indices of the k largest-magnitude entries; ties go to the lower index.
IndexSet top_k_indices(const DenseVector& v, std::size_t k);

// Top-k restricted to positions [offset, offset + length); returned indices
// are absolute.
std::vector<Index> top_k_in_range(const DenseVector& v, std::size_t offset, std::size_t length,
                                  std::size_t k);

// Chunk-wise quasi-sort: each of `chunks` contiguous chunks contributes its
// ceil(k * len / p) largest entries, then the candidates are trimmed to k.
IndexSet chunked_top_k_indices(const DenseVector& v, std::size_t k, std::size_t chunks);

SparseGradient sparsify(const DenseVector& v, const IndexSet& support);

IndexSet random_k_indices(std::size_t dim, std::size_t k, RngStream& rng);

// Size of the symmetric difference; always even for equal-size sets.
std::size_t hamming_distance(const IndexSet& a, const IndexSet& b);

// |a ∩ b| / |b|
double recall(const IndexSet& candidate, const IndexSet& reference);

ContractionEstimate measure_contraction(const DenseVector& y, const IndexSet& support);

struct Lemma1Expectation {
  // E[|y|^2 - sum_{i in top-k ∩ I} y_i^2] over all I at distance 2d; this is
  // the quantity bounded in closed form by |y|^2 - ((k-d)/k) sum_{top-k} y_i^2.
  double top_k_energy_residual = 0.0;
  // E|y - sparsify(y, I)|^2 over the same sets, which also credits the energy
  // picked up outside the top-k set.
  double exact_residual = 0.0;
  // |y|^2 - ((k-d)/k) sum_{top-k} y_i^2
  double closed_form = 0.0;
  double combinations = 0.0;
  bool monte_carlo = false;
  double standard_error = 0.0;  // of top_k_energy_residual; zero when exhaustive
};

inline constexpr double kLemma1ExhaustiveLimit = 1e6;
inline constexpr std::size_t kLemma1MonteCarloSamples = 100000;

// Expectation over every index set of size k that shares exactly k - d
// entries with top_k(y). Enumerates exhaustively up to 1e6 sets and samples
// 1e5 sets otherwise.
Lemma1Expectation lemma1_expectation_oracle(const DenseVector& y, std::size_t k, std::size_t d,
                                            std::uint64_t seed = 0);

}  // namespace scalecom::compress
