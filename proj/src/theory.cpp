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

#include "scalecom/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "scalecom/core.hpp"

namespace scalecom::theory {

namespace {

void require_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

double lemma1_gamma(std::size_t d, std::size_t k, double gamma0) {
  if (k < 1) throw ArgumentError("lemma1_gamma: k must be >= 1");
  if (d > k) throw ArgumentError("lemma1_gamma: d must not exceed k");
  require_unit(gamma0, "lemma1_gamma: gamma0");
  const double r = static_cast<double>(d) / static_cast<double>(k);
  return r + (1.0 - r) * gamma0;
}

double lemma2_kappa_threshold(std::span<const double> gammas) {
  const std::size_t n = gammas.size();
  if (n < 2) throw ArgumentError("lemma2: need at least two workers");
  for (double g : gammas) require_unit(g, "lemma2: gamma_i");
  const double nd = static_cast<double>(n);
  const double sum = std::accumulate(gammas.begin(), gammas.end(), 0.0);
  return (nd * sum - 1.0) / (nd * (nd - 1.0));
}

std::optional<double> lemma2_gamma(std::span<const double> gammas, double kappa) {
  const double threshold = lemma2_kappa_threshold(gammas);
  if (!(kappa > 0.0)) throw ArgumentError("lemma2: kappa must be > 0");
  if (!(kappa > threshold)) return std::nullopt;
  const double nd = static_cast<double>(gammas.size());
  const double sum = std::accumulate(gammas.begin(), gammas.end(), 0.0);
  const double g = nd * sum / (1.0 + kappa * nd * (nd - 1.0));
  // kappa within rounding of the threshold
  if (!(g < 1.0)) return std::nullopt;
  return g;
}

BetaRange beta_range(double gamma) {
  if (!(gamma >= 0.0)) throw ArgumentError("beta_range: gamma must be >= 0");
  if (gamma >= 1.0) throw InfeasibleError("beta_range: no admissible beta for gamma >= 1");
  // Roots are symmetric about 1/2; the small one comes from their product
  // gamma / (2 (1 + gamma)) to avoid cancellation.
  const double hi = 0.5 + 0.5 * std::sqrt((1.0 - gamma) / (1.0 + gamma));
  return {gamma / (2.0 * (1.0 + gamma) * hi), hi};
}

double lambda_constant(double beta, double gamma, double epsilon) {
  const double one_g = 1.0 + gamma;
  return (1.0 + epsilon) * one_g * beta * beta + one_g * (1.0 - beta) * (1.0 - beta);
}

double c_epsilon(double beta, double gamma) {
  const double one_g = 1.0 + gamma;
  return (1.0 - one_g * (beta - 1.0) * (beta - 1.0)) / (one_g * beta * beta) - 1.0;
}

double default_epsilon(double beta, double gamma) {
  const double c = c_epsilon(beta, gamma);
  if (!(c > 0.0)) throw InfeasibleError("beta lies outside the admissible range for this gamma");
  return std::min(1.0, c / 2.0);
}

namespace {

double lambda_of(const BoundInputs& in) {
  if (!(in.epsilon > 0.0)) throw ArgumentError("bound: epsilon must be > 0");
  const double lambda = lambda_constant(in.beta, in.gamma, in.epsilon);
  if (!(lambda < 1.0)) {
    throw InfeasibleError("bound: lambda = " + std::to_string(lambda) + " is not below 1");
  }
  return lambda;
}

}  // namespace

std::vector<BoundPoint> theorem1_bound(const BoundInputs& in, std::span<const double> t_grid) {
  if (!(in.sigma > 0.0)) throw ArgumentError("bound: sigma must be > 0");
  if (in.workers < 1) throw ArgumentError("bound: workers must be >= 1");
  const double lambda = lambda_of(in);
  const double n = static_cast<double>(in.workers);
  const double s2 = in.sigma * in.sigma;
  const double g2 = in.G * in.G;
  const double tail = 3.0 * n * n / s2 * (1.0 + in.gamma) * in.L * in.L * g2 *
                      (1.0 + 1.0 / in.epsilon) * (g2 + s2 / n) * lambda / (1.0 - lambda);
  std::vector<BoundPoint> out;
  out.reserve(t_grid.size());
  for (double T : t_grid) {
    if (!(T > 0.0)) throw ArgumentError("bound: T must be > 0");
    BoundPoint pt;
    pt.T = T;
    const double root = std::sqrt(n * T);
    pt.leading = in.gap * in.sigma / (2.0 * root) + 2.0 * in.L * in.sigma / root;
    pt.residual = tail / T;
    pt.total = pt.leading + pt.residual;
    out.push_back(pt);
  }
  return out;
}

double memory_bound(const BoundInputs& in) {
  if (in.workers < 1) throw ArgumentError("memory_bound: workers must be >= 1");
  const double lambda = lambda_of(in);
  const double g2 = in.G * in.G;
  const double s2n = in.sigma * in.sigma / static_cast<double>(in.workers);
  return in.beta * in.beta * (1.0 + in.gamma) * g2 * (1.0 + 1.0 / in.epsilon) * (g2 + s2n) *
         lambda / (1.0 - lambda);
}

double theory_learning_rate(double c, std::size_t workers, double sigma, std::size_t iterations) {
  if (!(c > 0.0) || !(sigma > 0.0) || workers < 1 || iterations < 1) {
    throw ArgumentError("theory_learning_rate: c, sigma, n and T must be positive");
  }
  return c * std::sqrt(static_cast<double>(workers)) /
         (sigma * std::sqrt(static_cast<double>(iterations)));
}

int recommend_compression_rate(double ratio) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw ArgumentError("recommend_compression_rate: ratio must be a positive number");
  }
  if (ratio >= 196.0) return 25;
  if (ratio >= 128.0) return 50;
  return 400;
}

}  // namespace scalecom::theory
