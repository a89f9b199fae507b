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
#include <optional>
#include <span>
#include <vector>

namespace scalecom::theory {

// gamma = d/k + (1 - d/k) gamma0
double lemma1_gamma(std::size_t d, std::size_t k, double gamma0);

// Smallest kappa (exclusive) for which the correlated-worker bound applies.
double lemma2_kappa_threshold(std::span<const double> gammas);

// n sum(gamma_i) / (1 + kappa n (n - 1)), or nullopt when kappa is at or
// below the threshold. n is the number of entries in `gammas`.
std::optional<double> lemma2_gamma(std::span<const double> gammas, double kappa);

struct BetaRange {
  double lo = 0.0;
  double hi = 0.0;
};

// Roots of 2(1+g) b^2 - 2(1+g) b + g. Throws InfeasibleError for gamma >= 1.
BetaRange beta_range(double gamma);

double lambda_constant(double beta, double gamma, double epsilon);
double c_epsilon(double beta, double gamma);
// min(1, C_eps / 2); InfeasibleError when C_eps <= 0.
double default_epsilon(double beta, double gamma);

struct BoundInputs {
  double G = 1.0;
  double L = 1.0;
  double sigma = 1.0;
  double gap = 1.0;  // f(theta_1) - f*
  double gamma = 0.0;
  double beta = 0.5;
  double epsilon = 0.5;
  std::size_t workers = 1;
};

struct BoundPoint {
  double T = 0.0;
  double leading = 0.0;   // gap sigma / (2 sqrt(nT)) + 2 L sigma / sqrt(nT)
  double residual = 0.0;  // explicit 1/T term
  double total = 0.0;
};

// Throws InfeasibleError when lambda >= 1, ArgumentError on sigma <= 0.
std::vector<BoundPoint> theorem1_bound(const BoundInputs& in, std::span<const double> t_grid);

// beta^2 (1+g) G^2 (1 + 1/eps) (G^2 + sigma^2/n) lambda / (1 - lambda)
double memory_bound(const BoundInputs& in);

// c sqrt(n) / (sigma sqrt(T))
double theory_learning_rate(double c, std::size_t workers, double sigma, std::size_t iterations);

// [196, inf) -> 25, [128, 196) -> 50, (0, 128) -> 400
int recommend_compression_rate(double flops_per_gradient_ratio);

}  // namespace scalecom::theory
