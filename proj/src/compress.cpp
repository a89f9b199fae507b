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

#include "scalecom/compress.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

namespace scalecom::compress {

namespace {

// Strict order: larger magnitude first, lower index on ties.
struct MagnitudeOrder {
  const DenseVector* v;
  bool operator()(Index a, Index b) const noexcept {
    const double ma = std::fabs((*v)[a]);
    const double mb = std::fabs((*v)[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  }
};

void check_k(std::size_t k, std::size_t dim, const char* what) {
  if (k > dim) {
    throw ArgumentError(std::string(what) + ": k=" + std::to_string(k) + " exceeds dimension " +
                        std::to_string(dim));
  }
}

double binomial(std::size_t n, std::size_t r) {
  if (r > n) return 0.0;
  r = std::min(r, n - r);
  double out = 1.0;
  for (std::size_t i = 1; i <= r; ++i) out = out * static_cast<double>(n - r + i) / i;
  return std::round(out);
}

// Visits every r-subset of [0, n) in lexicographic order.
template <typename Fn>
void for_each_combination(std::size_t n, std::size_t r, Fn&& fn) {
  std::vector<std::size_t> pick(r);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    fn(pick);
    if (r == 0) return;
    std::size_t i = r;
    while (i > 0 && pick[i - 1] == n - r + i - 1) --i;
    if (i == 0) return;
    ++pick[i - 1];
    for (std::size_t j = i; j < r; ++j) pick[j] = pick[j - 1] + 1;
  }
}

// Floyd's algorithm: r distinct positions in [0, n).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t r, RngStream& rng) {
  std::unordered_set<std::size_t> chosen;
  std::vector<std::size_t> out;
  out.reserve(r);
  for (std::size_t j = n - r; j < n; ++j) {
    const std::size_t t = rng.uniform_below(j + 1);
    if (chosen.insert(t).second) {
      out.push_back(t);
    } else {
      chosen.insert(j);
      out.push_back(j);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void CompressorKind::validate(std::size_t dim) const {
  if (chunks < 1) throw ArgumentError("compressor: chunks must be >= 1");
  if (chunks > dim) throw ArgumentError("compressor: chunks must not exceed dimension");
}

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::kIdentity: return "identity";
    case Kind::kTopKLocal: return "local_topk";
    case Kind::kTopKChunked: return "chunked_topk";
    case Kind::kRandomK: return "random_k";
    case Kind::kTrueTopKOracle: return "true_topk";
    case Kind::kCLTk: return "clt_k";
  }
  return "unknown";
}

Kind parse_kind(std::string_view name) {
  for (Kind k : {Kind::kIdentity, Kind::kTopKLocal, Kind::kTopKChunked, Kind::kRandomK,
                 Kind::kTrueTopKOracle, Kind::kCLTk}) {
    if (to_string(k) == name) return k;
  }
  throw ArgumentError("unknown compressor '" + std::string(name) + "'");
}

std::vector<Index> top_k_in_range(const DenseVector& v, std::size_t offset, std::size_t length,
                                  std::size_t k) {
  check_k(k, length, "top_k");
  std::vector<Index> order(length);
  std::iota(order.begin(), order.end(), static_cast<Index>(offset));
  const MagnitudeOrder cmp{&v};
  if (k < length) {
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                     cmp);
    order.resize(k);
  }
  std::sort(order.begin(), order.end());
  return order;
}

IndexSet top_k_indices(const DenseVector& v, std::size_t k) {
  check_k(k, v.size(), "top_k_indices");
  return IndexSet(top_k_in_range(v, 0, v.size(), k), v.size());
}

IndexSet chunked_top_k_indices(const DenseVector& v, std::size_t k, std::size_t chunks) {
  const std::size_t p = v.size();
  check_k(k, p, "chunked_top_k_indices");
  if (chunks < 1 || chunks > p) throw ArgumentError("chunked_top_k_indices: need 1 <= chunks <= p");
  if (chunks == 1) return top_k_indices(v, k);

  std::vector<Index> candidates;
  const std::size_t base = p / chunks;
  const std::size_t extra = p % chunks;
  std::size_t offset = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t len = base + (c < extra ? 1 : 0);
    // ceil(k * len / p) in integer arithmetic, never more than the chunk holds
    const std::size_t quota = std::min(len, (k * len + p - 1) / p);
    auto local = top_k_in_range(v, offset, len, quota);
    candidates.insert(candidates.end(), local.begin(), local.end());
    offset += len;
  }
  if (candidates.size() > k) {
    const MagnitudeOrder cmp{&v};
    std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                     candidates.end(), cmp);
    candidates.resize(k);
  }
  std::sort(candidates.begin(), candidates.end());
  return IndexSet(std::move(candidates), p);
}

SparseGradient sparsify(const DenseVector& v, const IndexSet& support) {
  if (support.dim() != v.size()) {
    throw ArgumentError("sparsify: support dimension " + std::to_string(support.dim()) +
                        " does not match vector dimension " + std::to_string(v.size()));
  }
  std::vector<double> values;
  values.reserve(support.size());
  for (Index i : support) values.push_back(v[i]);
  return SparseGradient(support, std::move(values));
}

IndexSet random_k_indices(std::size_t dim, std::size_t k, RngStream& rng) {
  check_k(k, dim, "random_k_indices");
  auto picked = sample_without_replacement(dim, k, rng);
  std::vector<Index> out(picked.begin(), picked.end());
  return IndexSet(std::move(out), dim);
}

std::size_t hamming_distance(const IndexSet& a, const IndexSet& b) {
  if (a.size() != b.size()) {
    throw ArgumentError("hamming_distance: set sizes differ (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
  }
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return 2 * (a.size() - common);
}

double recall(const IndexSet& candidate, const IndexSet& reference) {
  if (reference.empty()) throw ArgumentError("recall: empty reference set");
  std::size_t hits = 0;
  for (Index i : candidate) hits += reference.contains(i) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(reference.size());
}

namespace {

double residual_energy(const DenseVector& y, const IndexSet& support) {
  // Sum over the complement directly; avoids |y|^2 - kept cancellation.
  double acc = 0.0;
  auto it = support.begin();
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (it != support.end() && *it == i) {
      ++it;
      continue;
    }
    acc += y[i] * y[i];
  }
  return acc;
}

}  // namespace

ContractionEstimate measure_contraction(const DenseVector& y, const IndexSet& support) {
  const double total = y.squared_norm();
  if (total == 0.0) throw UndefinedError("measure_contraction: zero vector");
  if (support.empty()) throw ArgumentError("measure_contraction: empty support");
  if (support.dim() != y.size()) throw ArgumentError("measure_contraction: dimension mismatch");
  const std::size_t k = support.size();
  const IndexSet exact = top_k_indices(y, k);
  ContractionEstimate out;
  out.gamma = residual_energy(y, support) / total;
  out.gamma0 = residual_energy(y, exact) / total;
  out.d_over_k = static_cast<double>(hamming_distance(support, exact)) / (2.0 * k);
  return out;
}

Lemma1Expectation lemma1_expectation_oracle(const DenseVector& y, std::size_t k, std::size_t d,
                                            std::uint64_t seed) {
  const std::size_t p = y.size();
  if (d > k) throw ArgumentError("lemma1_expectation_oracle: d exceeds k");
  if (k < 1) throw ArgumentError("lemma1_expectation_oracle: k must be >= 1");
  check_k(k, p, "lemma1_expectation_oracle");
  if (d > p - k) {
    throw ArgumentError("lemma1_expectation_oracle: no index set at distance 2d exists (d > p - k)");
  }
  const double total = y.squared_norm();
  if (total == 0.0) throw UndefinedError("lemma1_expectation_oracle: zero vector");

  const IndexSet top = top_k_indices(y, k);
  std::vector<double> inside;
  std::vector<double> outside;
  for (std::size_t i = 0; i < p; ++i) {
    const double e = y[i] * y[i];
    (top.contains(static_cast<Index>(i)) ? inside : outside).push_back(e);
  }
  const double top_energy = std::accumulate(inside.begin(), inside.end(), 0.0);

  Lemma1Expectation out;
  out.closed_form = total - (static_cast<double>(k - d) / static_cast<double>(k)) * top_energy;
  const std::size_t keep = k - d;
  out.combinations = binomial(k, keep) * binomial(p - k, d);

  if (out.combinations <= kLemma1ExhaustiveLimit) {
    std::vector<Index> top_idx(top.begin(), top.end());
    std::vector<Index> rest_idx;
    for (std::size_t i = 0; i < p; ++i) {
      if (!top.contains(static_cast<Index>(i))) rest_idx.push_back(static_cast<Index>(i));
    }
    double sum_top_residual = 0.0;
    double sum_exact = 0.0;
    double visited = 0.0;
    std::vector<Index> chosen;
    for_each_combination(k, keep, [&](const std::vector<std::size_t>& from_top) {
      for_each_combination(p - k, d, [&](const std::vector<std::size_t>& from_rest) {
        chosen.clear();
        for (std::size_t j : from_top) chosen.push_back(top_idx[j]);
        for (std::size_t j : from_rest) chosen.push_back(rest_idx[j]);
        const IndexSet candidate = IndexSet::from_unsorted(chosen, p);
        double kept_top = 0.0;
        for (Index i : candidate) kept_top += top.contains(i) ? y[i] * y[i] : 0.0;
        sum_top_residual += total - kept_top;
        sum_exact += residual_energy(y, candidate);
        visited += 1.0;
      });
    });
    out.top_k_energy_residual = sum_top_residual / visited;
    out.exact_residual = sum_exact / visited;
    return out;
  }

  out.monte_carlo = true;
  RngStream rng(seed, 0x4C454D31ULL);
  double m1 = 0.0, m2 = 0.0, exact = 0.0;
  for (std::size_t s = 0; s < kLemma1MonteCarloSamples; ++s) {
    double kept_inside = 0.0;
    for (std::size_t j : sample_without_replacement(k, keep, rng)) kept_inside += inside[j];
    double kept_outside = 0.0;
    for (std::size_t j : sample_without_replacement(p - k, d, rng)) kept_outside += outside[j];
    const double r = total - kept_inside;
    m1 += r;
    m2 += r * r;
    exact += r - kept_outside;
  }
  const double ns = static_cast<double>(kLemma1MonteCarloSamples);
  out.top_k_energy_residual = m1 / ns;
  out.exact_residual = exact / ns;
  const double var = std::max(0.0, m2 / ns - out.top_k_energy_residual * out.top_k_energy_residual);
  out.standard_error = std::sqrt(var / ns);
  return out;
}

}  // namespace scalecom::compress
