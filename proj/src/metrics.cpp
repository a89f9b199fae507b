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

#include "scalecom/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "scalecom/compress.hpp"

namespace scalecom::metrics {

double SimilarityMatrix::mean_off_diagonal() const {
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (at(i, j)) {
        acc += *at(i, j);
        ++count;
      }
    }
  }
  return count ? acc / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

SimilarityMatrix memory_similarity(std::span<const DenseVector> memories) {
  const std::size_t n = memories.size();
  if (n < 2) throw ArgumentError("memory_similarity: need at least two memories");
  for (const auto& m : memories) require_same_size(memories.front(), m, "memory_similarity");
  SimilarityMatrix out;
  out.n = n;
  out.entries.assign(n * n, std::nullopt);
  std::vector<bool> nonzero(n);
  for (std::size_t i = 0; i < n; ++i) nonzero[i] = memories[i].squared_norm() > 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (nonzero[i]) out.entries[i * n + i] = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!nonzero[i] || !nonzero[j]) continue;
      const double c = cosine_distance(memories[i], memories[j]);
      out.entries[i * n + j] = c;
      out.entries[j * n + i] = c;
    }
  }
  return out;
}

Overlap overlap_vs_true_topk(std::span<const DenseVector> ef_grads, const IndexSet& support,
                             std::size_t k) {
  if (ef_grads.empty()) throw ArgumentError("overlap_vs_true_topk: no gradients");
  if (support.size() != k) {
    throw ArgumentError("overlap_vs_true_topk: support has " + std::to_string(support.size()) +
                        " entries but k = " + std::to_string(k));
  }
  const DenseVector mean = mean_of(ef_grads);
  if (support.dim() != mean.size()) throw ArgumentError("overlap_vs_true_topk: dimension mismatch");
  const IndexSet truth = compress::top_k_indices(mean, k);
  Overlap out;
  out.d_over_k = static_cast<double>(compress::hamming_distance(support, truth)) / (2.0 * k);
  out.overlap = 1.0 - out.d_over_k;
  return out;
}

double true_topk_coverage(std::span<const DenseVector> ef_grads, const IndexSet& support,
                          std::size_t k_true) {
  if (ef_grads.empty()) throw ArgumentError("true_topk_coverage: no gradients");
  if (k_true < 1) throw ArgumentError("true_topk_coverage: k_true must be >= 1");
  const DenseVector mean = mean_of(ef_grads);
  if (support.dim() != mean.size()) throw ArgumentError("true_topk_coverage: dimension mismatch");
  return compress::recall(support, compress::top_k_indices(mean, k_true));
}

std::size_t Histogram::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), zeros);
}

Histogram magnitude_histogram(const DenseVector& v, std::size_t bins) {
  if (bins < 2) throw ArgumentError("magnitude_histogram: bins must be >= 2");
  Histogram h;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double x : v) {
    const double a = std::fabs(x);
    if (a == 0.0) {
      ++h.zeros;
      continue;
    }
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  if (h.zeros == v.size()) return h;
  h.counts.assign(bins, 0);
  h.edges.resize(bins + 1);
  const double span = std::log(hi / lo);
  for (std::size_t b = 0; b <= bins; ++b) {
    h.edges[b] = lo * std::exp(span * static_cast<double>(b) / static_cast<double>(bins));
  }
  h.edges.front() = lo;
  h.edges.back() = hi;
  for (double x : v) {
    const double a = std::fabs(x);
    if (a == 0.0) continue;
    std::size_t b = 0;
    if (span > 0.0) {
      const double pos = static_cast<double>(bins) * std::log(a / lo) / span;
      b = std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, std::floor(pos))));
    }
    ++h.counts[b];
  }
  return h;
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t q = i; q <= j; ++q) ranks[order[q]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedError("rank correlation undefined for constant input");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

SpearmanResult spearman_rank(const DenseVector& x, const DenseVector& y, std::uint64_t seed) {
  require_same_size(x, y, "spearman_rank");
  const std::size_t n = x.size();
  if (n < 3) throw ArgumentError("spearman_rank: need at least three entries");
  const auto rx = average_ranks(x.values());
  auto ry = average_ranks(y.values());
  SpearmanResult out;
  out.rho = pearson(rx, ry);
  if (n <= kPermutationMaxLength) {
    out.permutation = true;
    RngStream rng(seed, 0x5350524DULL);
    std::size_t extreme = 0;
    const double target = std::fabs(out.rho) - 1e-12;
    for (std::size_t s = 0; s < kPermutations; ++s) {
      for (std::size_t i = n - 1; i > 0; --i) std::swap(ry[i], ry[rng.uniform_below(i + 1)]);
      if (std::fabs(pearson(rx, ry)) >= target) ++extreme;
    }
    out.p_value = static_cast<double>(extreme + 1) / static_cast<double>(kPermutations + 1);
  } else {
    const double z = out.rho * std::sqrt(static_cast<double>(n - 1));
    out.p_value = std::erfc(std::fabs(z) / std::sqrt(2.0));
  }
  return out;
}

namespace {

double quantile(const std::vector<double>& sorted, double prob) {
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

QqResult qq_quantiles(const DenseVector& x, const DenseVector& y, std::size_t count) {
  if (count < 2) throw ArgumentError("qq_quantiles: count must be >= 2");
  if (x.empty() || y.empty()) throw ArgumentError("qq_quantiles: empty input");
  std::vector<double> sx(x.begin(), x.end());
  std::vector<double> sy(y.begin(), y.end());
  std::sort(sx.begin(), sx.end());
  std::sort(sy.begin(), sy.end());
  QqResult out;
  for (std::size_t i = 0; i < count; ++i) {
    const double prob = (static_cast<double>(i) + 0.5) / static_cast<double>(count);
    out.qx.push_back(quantile(sx, prob));
    out.qy.push_back(quantile(sy, prob));
  }
  const double n = static_cast<double>(count);
  const double mx = std::accumulate(out.qx.begin(), out.qx.end(), 0.0) / n;
  const double my = std::accumulate(out.qy.begin(), out.qy.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    sxy += (out.qx[i] - mx) * (out.qy[i] - my);
    sxx += (out.qx[i] - mx) * (out.qx[i] - mx);
    syy += (out.qy[i] - my) * (out.qy[i] - my);
  }
  if (sxx == 0.0) throw UndefinedError("qq_quantiles: x quantiles are constant");
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return out;
}

}  // namespace scalecom::metrics
