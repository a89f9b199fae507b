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
#include <fstream>
#include <numeric>

#include "scalecom/problems.hpp"

using namespace scalecom;
using namespace scalecom::problems;

namespace {

MiniBatch batch_of(std::size_t n) {
  MiniBatch b;
  b.indices.resize(n);
  std::iota(b.indices.begin(), b.indices.end(), 0);
  return b;
}

}  // namespace

TEST(Quadratic, NoiselessEqualsFullGradient) {
  const auto q = make_quadratic(20, 50.0, 0.0, 3);
  RngStream rng(1, 0);
  DenseVector theta(20);
  for (auto& x : theta) x = rng.normal();
  EXPECT_EQ(q->stochastic_gradient(theta, batch_of(4), rng), q->full_gradient(theta));
}

TEST(Quadratic, DirectFormula) {
  QuadraticProblem q(DenseVector{2.0}, DenseVector{4.0}, 0.0);
  RngStream rng(1, 0);
  EXPECT_EQ(q.stochastic_gradient(DenseVector{0.0}, batch_of(1), rng), DenseVector({-4.0}));
  EXPECT_EQ(q.full_gradient(q.optimum()).norm(), 0.0);
  EXPECT_EQ(q.loss(q.optimum()), 0.0);
  EXPECT_EQ(*q.lipschitz_constant(), 2.0);
}

TEST(Quadratic, Construction) {
  const auto q = make_quadratic(100, 100.0, 0.1, 7);
  EXPECT_DOUBLE_EQ(*q->lipschitz_constant(), 1.0);
  const double lo = *std::min_element(q->diag().begin(), q->diag().end());
  EXPECT_NEAR(1.0 / lo, 100.0, 1e-9);
  EXPECT_LT(q->full_gradient(q->optimum()).norm(), 1e-14);
  EXPECT_THROW(make_quadratic(0, 10, 0, 1), ArgumentError);
  EXPECT_THROW(QuadraticProblem(DenseVector{-1.0}, DenseVector{0.0}, 0.0), ArgumentError);
}

TEST(Quadratic, EmptyBatchRejected) {
  const auto q = make_quadratic(3, 2, 0.1, 1);
  RngStream rng(0, 0);
  EXPECT_THROW(q->stochastic_gradient(DenseVector(3), MiniBatch{}, rng), ArgumentError);
}

TEST(Unbiasedness, QuadraticAndLogistic) {
  const auto q = make_quadratic(5, 10.0, 0.5, 2);
  const auto lg = make_logistic(200, 5, 1e-3, 4);
  for (const Problem* p : {static_cast<const Problem*>(q.get()), static_cast<const Problem*>(lg.get())}) {
    RngStream rng(8, 0);
    DenseVector theta(5);
    for (auto& x : theta) x = 0.3 * rng.normal();
    const auto shard = make_shards(*p, 1, DataMode::kIid)[0];
    const auto full = p->full_gradient(theta);
    const int draws = 10000;
    DenseVector sum(5), sum2(5);
    for (int i = 0; i < draws; ++i) {
      const auto g = p->stochastic_gradient(theta, sample_minibatch(shard, 2, rng), rng);
      for (std::size_t j = 0; j < 5; ++j) {
        sum[j] += g[j];
        sum2[j] += g[j] * g[j];
      }
    }
    for (std::size_t j = 0; j < 5; ++j) {
      const double mean = sum[j] / draws;
      const double var = sum2[j] / draws - mean * mean;
      const double se = std::sqrt(std::max(var, 0.0) / draws);
      EXPECT_LE(std::fabs(mean - full[j]), 3 * se + 1e-12) << p->name() << " coordinate " << j;
    }
  }
}

TEST(Logistic, GradientAtZeroClosedForm) {
  // Balanced labels and symmetric features: sigmoid(0) = 1/2 for every row.
  Dataset d;
  d.rows = 4;
  d.cols = 2;
  d.features = {1, 2, -1, -2, 3, 0, -3, 0};
  d.labels = {1, 0, 0, 1};
  LogisticProblem p(d, 0.0);
  const auto g = p.full_gradient(DenseVector(2));
  DenseVector expect(2);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 2; ++c) expect[c] += (0.5 - d.labels[r]) * d.row(r)[c] / 4.0;
  }
  EXPECT_NEAR(g[0], expect[0], 1e-15);
  EXPECT_NEAR(g[1], expect[1], 1e-15);
  EXPECT_NEAR(p.loss(DenseVector(2)), std::log(2.0), 1e-15);
}

TEST(Logistic, LabelsValidated) {
  Dataset d;
  d.rows = 1;
  d.cols = 1;
  d.features = {1};
  d.labels = {2};
  EXPECT_THROW(LogisticProblem(d, 0.0), ArgumentError);
}

TEST(FiniteDifference, AllProblems) {
  RngStream rng(5, 0);
  const auto q = make_quadratic(50, 100.0, 0.1, 1);
  DenseVector tq(50);
  for (auto& x : tq) x = rng.normal();
  EXPECT_LT(finite_difference_check(*q, tq, 1e-5), 1e-8);

  const auto lg = make_logistic(100, 10, 1e-2, 2);
  DenseVector tl(10);
  for (auto& x : tl) x = 0.5 * rng.normal();
  EXPECT_LT(finite_difference_check(*lg, tl, 1e-5), 1e-6);

  const auto mlp = make_mlp({4, 16, 3}, 50, 3);
  EXPECT_LE(mlp->dimension(), 1000u);
  EXPECT_LT(finite_difference_check(*mlp, mlp->initial_parameters(), 1e-5), 1e-5);

  const auto relu = make_mlp({4, 8, 3}, 50, 3, Activation::kRelu);
  EXPECT_LT(finite_difference_check(*relu, relu->initial_parameters(), 1e-5), 1e-5);
  EXPECT_THROW(finite_difference_check(*q, tq, 0.0), ArgumentError);
}

namespace {

class Exploding final : public Problem {
 public:
  std::string_view name() const noexcept override { return "exploding"; }
  std::size_t dimension() const noexcept override { return 1; }
  std::size_t num_samples() const noexcept override { return 0; }
  double loss(const DenseVector& t) const override { return t[0] > 0 ? INFINITY : 0.0; }
  DenseVector full_gradient(const DenseVector&) const override { return DenseVector(1); }
  DenseVector stochastic_gradient(const DenseVector&, const MiniBatch&, RngStream&) const override {
    return DenseVector(1);
  }
};

}  // namespace

TEST(FiniteDifference, NonFiniteLoss) {
  Exploding p;
  EXPECT_THROW(finite_difference_check(p, DenseVector(1), 1e-3), NumericError);
}

TEST(Mlp, PackingAndInit) {
  const auto mlp = make_mlp({3, 5, 2}, 20, 9);
  EXPECT_EQ(mlp->dimension(), 3u * 5 + 5 + 5 * 2 + 2);
  const auto theta = mlp->initial_parameters();
  EXPECT_EQ(theta, make_mlp({3, 5, 2}, 20, 9)->initial_parameters());
  EXPECT_TRUE(std::isfinite(mlp->loss(theta)));
  EXPECT_TRUE(std::isfinite(mlp->loss(DenseVector(mlp->dimension()))));
}

TEST(Shards, IidAndSharded) {
  const auto lg = make_logistic(10, 3, 0.0, 1);
  for (const auto& s : make_shards(*lg, 4, DataMode::kIid)) {
    EXPECT_EQ(s.begin, 0u);
    EXPECT_EQ(s.end, 10u);
  }
  const auto sh = make_shards(*lg, 3, DataMode::kSharded);
  EXPECT_EQ(sh[0].begin, 0u);
  EXPECT_EQ(sh[2].end, 10u);
  for (std::size_t i = 1; i < 3; ++i) EXPECT_EQ(sh[i].begin, sh[i - 1].end);
  RngStream rng(1, 1);
  for (int t = 0; t < 100; ++t) {
    for (auto idx : sample_minibatch(sh[1], 5, rng).indices) {
      EXPECT_GE(idx, sh[1].begin);
      EXPECT_LT(idx, sh[1].end);
    }
  }
}

TEST(EstimateConstants, QuadraticAndLogistic) {
  const auto q = make_quadratic(10, 10.0, 0.0, 1);
  RngStream rng(2, 0);
  std::vector<DenseVector> traj{DenseVector(10), DenseVector(10, 0.5)};
  const auto c = estimate_constants(*q, traj, {}, rng);
  EXPECT_EQ(c.L, *q->lipschitz_constant());
  EXPECT_EQ(c.sigma, 0.0);
  EXPECT_GT(c.G, 0.0);

  const auto lg = make_logistic(500, 8, 1e-3, 3);
  std::vector<DenseVector> tl{DenseVector(8)};
  std::vector<double> sig;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RngStream r(seed, 0);
    sig.push_back(estimate_constants(*lg, tl, {1, 2000}, r).sigma);
  }
  for (double s : sig) {
    EXPECT_GT(s, 0.0);
    EXPECT_NEAR(s, sig[0], 0.1 * sig[0]);
  }
}

TEST(Csv, LoadsWithHeaderCommentsAndBlanks) {
  const auto d = load_csv_dataset(SCALECOM_TEST_DATA "/tiny.csv");
  EXPECT_EQ(d.rows, 4u);
  EXPECT_EQ(d.cols, 2u);
  EXPECT_EQ(d.row(2)[0], 1.5);
  EXPECT_EQ(d.labels[1], 0.0);
  LogisticProblem p(d, 0.1);
  EXPECT_EQ(p.dimension(), 2u);
}

TEST(Csv, ErrorNamesLine) {
  try {
    load_csv_dataset(SCALECOM_TEST_DATA "/bad_field.csv", {';', false});
    FAIL() << "expected an error";
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_csv_dataset(SCALECOM_TEST_DATA "/missing.csv"), ArgumentError);
}
