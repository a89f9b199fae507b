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
#include <string>
#include <vector>

#include "scalecom/perfmodel.hpp"
#include "scalecom/problems.hpp"
#include "scalecom/simulator.hpp"

namespace scalecom::config {

struct ProblemSpec {
  std::string name = "quadratic";  // quadratic | logistic | mlp | csv
  std::size_t dim = 100;
  double condition = 100.0;
  double noise = 0.1;
  std::size_t samples = 1000;
  double l2 = 1e-3;
  double signal = 3.0;
  double feature_spread = 1.0;  // logistic only
  std::vector<std::size_t> layers{8, 16, 4};
  std::string activation = "tanh";
  std::string csv_path;
  std::uint64_t seed = 1;
};

std::shared_ptr<problems::Problem> make_problem(const ProblemSpec& spec);

struct PerfSpec {
  perf::SystemSpec system{};
  perf::WorkloadSpec workload{};
  perf::SweepAxis axis = perf::SweepAxis::kWorkers;
  std::vector<double> values{8, 16, 32, 64, 128};
  std::vector<perf::Scheme> schemes{perf::Scheme::kNone, perf::Scheme::kLocalTopK,
                                    perf::Scheme::kScaleCom};
};

struct ExperimentConfig {
  sim::SimConfig sim{};
  ProblemSpec problem{};
  // When set, lr = c sqrt(n) / (sigma sqrt(T)); sigma estimated at theta_0
  // unless given.
  std::optional<double> lr_constant;
  std::optional<double> lr_sigma;
  bool paired = false;
  std::string out_dir;
  PerfSpec perf{};
};

// Throws io::ParseError with the line of the offending key.
ExperimentConfig parse_config(const std::string& text, const std::string& source);
ExperimentConfig load_config(const std::filesystem::path& path);

// Effective configuration with every default filled in; parse_config
// accepts it back unchanged.
std::string dump_config(const ExperimentConfig& cfg);

}  // namespace scalecom::config
