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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "scalecom/compress.hpp"
#include "scalecom/theory.hpp"

using namespace scalecom;
using namespace scalecom::compress;

namespace {

std::vector<Index> ids(const IndexSet& s) { return {s.begin(), s.end()}; }

DenseVector random_vector(RngStream& rng, std::size_t p) {
  DenseVector v(p);
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST(TopK, Examples) {
  EXPECT_EQ(ids(top_k_indices({0.1, -4, 2, 2, 0}, 2)), (std::vector<Index>{1, 2}));
  EXPECT_EQ(ids(top_k_indices({5}, 1)), (std::vector<Index>{0}));
  EXPECT_EQ(ids(top_k_indices({1, 1, 1}, 3)), (std::vector<Index>{0, 1, 2}));
  EXPECT_THROW(top_k_indices({1, 2}, 3), ArgumentError);
}

TEST(TopK, AgreesWithStableSort) {
  RngStream rng(11, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t p = 1 + rng.uniform_below(40);
    DenseVector v(p);
    // coarse values force ties
    for (auto& x : v) x = static_cast<double>(static_cast<int>(rng.uniform_below(7)) - 3);
    const std::size_t k = 1 + rng.uniform_below(p);
    std::vector<Index> order(p);
    for (std::size_t i = 0; i < p; ++i) order[i] = static_cast<Index>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return std::fabs(v[a]) > std::fabs(v[b]); });
    order.resize(k);
    std::sort(order.begin(), order.end());
    EXPECT_EQ(ids(top_k_indices(v, k)), order);
  }
}

TEST(ChunkedTopK, Examples) {
  EXPECT_EQ(ids(chunked_top_k_indices({9, 1, 1, 8}, 2, 1)), (std::vector<Index>{0, 3}));
  EXPECT_EQ(ids(chunked_top_k_indices({9, 8, 1, 1}, 2, 2)), (std::vector<Index>{0, 2}));
  EXPECT_EQ(ids(chunked_top_k_indices({1, 1, 1, 1}, 4, 2)), (std::vector<Index>{0, 1, 2, 3}));
  EXPECT_THROW(chunked_top_k_indices({1, 2}, 1, 3), ArgumentError);
}

TEST(ChunkedTopK, ExactlyKAndRecall) {
  RngStream rng(12, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t p = 2 + rng.uniform_below(200);
    const auto v = random_vector(rng, p);
    const std::size_t k = 1 + rng.uniform_below(p);
    const std::size_t chunks = 1 + rng.uniform_below(p);
    const auto c = chunked_top_k_indices(v, k, chunks);
    const auto exact = top_k_indices(v, k);
    EXPECT_EQ(c.size(), k);
    const double r = recall(c, exact);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
    EXPECT_EQ(chunked_top_k_indices(v, k, 1), exact);
    EXPECT_DOUBLE_EQ(recall(chunked_top_k_indices(v, k, 1), exact), 1.0);
  }
}

TEST(Sparsify, Examples) {
  const auto s = sparsify({2, 0.1, 7}, IndexSet({1}, 3));
  EXPECT_EQ(ids(s.support()), (std::vector<Index>{1}));
  EXPECT_EQ(std::vector<double>(s.values().begin(), s.values().end()), (std::vector<double>{0.1}));
  const DenseVector v{3, -5, 1};
  EXPECT_EQ(densify(sparsify(v, IndexSet::full(3))), v);
  const DenseVector w{1, -3, 0.5};
  EXPECT_EQ(densify(sparsify(w, top_k_indices(w, 1))), DenseVector({0, -3, 0}));
  EXPECT_THROW(sparsify(v, IndexSet({0}, 4)), ArgumentError);
}

TEST(Sparsify, ClassicalTopKReduction) {
  RngStream rng(13, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto v = random_vector(rng, 50);
    const std::size_t k = 1 + rng.uniform_below(50);
    const auto kept = densify(sparsify(v, top_k_indices(v, k)));
    // Classical top-k: zero everything below the k-th largest magnitude.
    std::vector<double> mags;
    for (double x : v) mags.push_back(std::fabs(x));
    std::sort(mags.rbegin(), mags.rend());
    for (std::size_t i = 0; i < v.size(); ++i) {
      EXPECT_EQ(kept[i], std::fabs(v[i]) >= mags[k - 1] ? v[i] : 0.0);
    }
  }
}

TEST(Commutativity, SharedSupport) {
  RngStream rng(14, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.uniform_below(16);
    const std::size_t p = 1 + rng.uniform_below(300);
    std::vector<DenseVector> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(random_vector(rng, p));
    const auto support = random_k_indices(p, 1 + rng.uniform_below(p), rng);
    const auto lhs = densify(sparsify(mean_of(xs), support));
    std::vector<DenseVector> parts;
    for (const auto& x : xs) parts.push_back(densify(sparsify(x, support)));
    EXPECT_EQ(lhs, mean_of(parts));
  }
}

TEST(RandomK, Examples) {
  RngStream rng(1, 2);
  EXPECT_EQ(ids(random_k_indices(3, 3, rng)), (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(ids(random_k_indices(1, 1, rng)), (std::vector<Index>{0}));
  RngStream a(9, 9), b(9, 9);
  EXPECT_EQ(random_k_indices(100, 10, a), random_k_indices(100, 10, b));
  EXPECT_THROW(random_k_indices(3, 4, rng), ArgumentError);
}

TEST(RandomK, Uniform) {
  RngStream rng(2, 0);
  std::vector<int> hits(10, 0);
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    for (Index i : random_k_indices(10, 3, rng)) ++hits[i];
  }
  for (int h : hits) EXPECT_NEAR(h / double(trials), 0.3, 0.02);
}

TEST(Hamming, Examples) {
  EXPECT_EQ(hamming_distance(IndexSet({1, 2, 3}, 10), IndexSet({1, 2, 3}, 10)), 0u);
  EXPECT_EQ(hamming_distance(IndexSet({1, 2, 3}, 10), IndexSet({4, 5, 6}, 10)), 6u);
  EXPECT_EQ(hamming_distance(IndexSet({1, 2, 3}, 10), IndexSet({1, 2, 4}, 10)), 2u);
  EXPECT_THROW(hamming_distance(IndexSet({1}, 10), IndexSet({1, 2}, 10)), ArgumentError);
}

TEST(Hamming, Metric) {
  RngStream rng(15, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t p = 2 + rng.uniform_below(30);
    const std::size_t k = 1 + rng.uniform_below(p);
    const auto a = random_k_indices(p, k, rng);
    const auto b = random_k_indices(p, k, rng);
    const auto c = random_k_indices(p, k, rng);
    EXPECT_EQ(hamming_distance(a, b), hamming_distance(b, a));
    EXPECT_EQ(hamming_distance(a, a), 0u);
    EXPECT_LE(hamming_distance(a, c), hamming_distance(a, b) + hamming_distance(b, c));
    EXPECT_EQ(hamming_distance(a, b) % 2, 0u);
    EXPECT_LE(hamming_distance(a, b), 2 * k);
  }
}

TEST(MeasureContraction, Examples) {
  const DenseVector y{3, 4};
  auto e = measure_contraction(y, IndexSet({1}, 2));
  EXPECT_DOUBLE_EQ(e.gamma0, 0.36);
  EXPECT_DOUBLE_EQ(e.gamma, 0.36);
  EXPECT_DOUBLE_EQ(e.d_over_k, 0.0);
  e = measure_contraction(y, IndexSet({0}, 2));
  EXPECT_DOUBLE_EQ(e.gamma, 0.64);
  EXPECT_DOUBLE_EQ(e.d_over_k, 1.0);
  EXPECT_DOUBLE_EQ(measure_contraction({1, -2, 3}, IndexSet::full(3)).gamma, 0.0);
  EXPECT_THROW(measure_contraction({0, 0}, IndexSet({0}, 2)), UndefinedError);
}

TEST(MeasureContraction, OrderedBounds) {
  RngStream rng(16, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t p = 1 + rng.uniform_below(60);
    const auto y = random_vector(rng, p);
    const std::size_t k = 1 + rng.uniform_below(p);
    const auto e = measure_contraction(y, random_k_indices(p, k, rng));
    EXPECT_LE(e.gamma0, e.gamma + 1e-15);
    EXPECT_LE(e.gamma, 1.0);
    EXPECT_FALSE(e.exceeds_one());
    EXPECT_GE(e.d_over_k, 0.0);
    EXPECT_LE(e.d_over_k, 1.0);
  }
}

TEST(Lemma1Oracle, Examples) {
  const DenseVector y{3, 4, 0, 0};
  const auto d0 = lemma1_expectation_oracle({3, 4, 1}, 1, 0);
  EXPECT_DOUBLE_EQ(d0.top_k_energy_residual, 10.0);
  EXPECT_DOUBLE_EQ(d0.exact_residual, 10.0);
  const auto dk = lemma1_expectation_oracle({3, 4}, 1, 1);
  EXPECT_DOUBLE_EQ(dk.closed_form, 25.0);
  EXPECT_DOUBLE_EQ(dk.top_k_energy_residual, 25.0);
  const auto half = lemma1_expectation_oracle(y, 2, 1);
  EXPECT_DOUBLE_EQ(half.closed_form, 12.5);
  EXPECT_DOUBLE_EQ(half.top_k_energy_residual, 12.5);
  EXPECT_DOUBLE_EQ(half.exact_residual, 12.5);
  EXPECT_EQ(half.combinations, 4.0);
  EXPECT_THROW(lemma1_expectation_oracle(y, 1, 2), ArgumentError);
  EXPECT_THROW(lemma1_expectation_oracle({1, 2}, 2, 1), ArgumentError);
}

TEST(Lemma1Oracle, BoundHolds) {
  RngStream rng(17, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t p = 2 + rng.uniform_below(9);
    const auto y = random_vector(rng, p);
    const std::size_t k = 1 + rng.uniform_below(std::min<std::size_t>(4, p - 1));
    const double total = y.squared_norm();
    const double gamma0 = measure_contraction(y, top_k_indices(y, k)).gamma0;
    for (std::size_t d = 0; d <= std::min(k, p - k); ++d) {
      const auto e = lemma1_expectation_oracle(y, k, d);
      EXPECT_NEAR(e.top_k_energy_residual, e.closed_form, 1e-10 * total);
      EXPECT_LE(e.exact_residual, e.top_k_energy_residual + 1e-12 * total);
      EXPECT_LE(e.top_k_energy_residual, theory::lemma1_gamma(d, k, gamma0) * total * (1 + 1e-12));
    }
  }
}

TEST(Lemma1Oracle, MonteCarloBranch) {
  RngStream rng(18, 0);
  const auto y = random_vector(rng, 60);
  const auto e = lemma1_expectation_oracle(y, 20, 10, 3);
  EXPECT_TRUE(e.monte_carlo);
  EXPECT_GT(e.standard_error, 0.0);
  EXPECT_NEAR(e.top_k_energy_residual, e.closed_form, 5 * e.standard_error);
}

TEST(CompressorKind, ParseAndValidate) {
  for (auto k : {Kind::kIdentity, Kind::kTopKLocal, Kind::kTopKChunked, Kind::kRandomK,
                 Kind::kTrueTopKOracle, Kind::kCLTk}) {
    EXPECT_EQ(parse_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_kind("sketch"), ArgumentError);
  CompressorKind c{Kind::kTopKChunked, 0};
  EXPECT_THROW(c.validate(10), ArgumentError);
  c.chunks = 11;
  EXPECT_THROW(c.validate(10), ArgumentError);
}
