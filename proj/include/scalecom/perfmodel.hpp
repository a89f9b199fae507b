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
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

namespace scalecom::perf {

enum class Scheme { kNone, kLocalTopK, kScaleCom };
enum class OverlapMode { kSerial, kPipelined };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view name);

struct SystemSpec {
  std::size_t workers = 8;
  double peak_flops = 100e12;
  double efficiency = 0.5;
  double bandwidth = 32e9;  // bytes/s, worker <-> server
  double value_bytes = 2.0;
  double index_bytes = 4.0;
  OverlapMode overlap = OverlapMode::kSerial;

  void validate() const;
};

struct WorkloadSpec {
  double flops_per_sample = 8e9;  // forward + backward
  double params = 25.5e6;
  std::size_t batch_per_worker = 8;
  double rate = 112.0;
  Scheme scheme = Scheme::kScaleCom;

  void validate() const;
};

struct PerfEstimate {
  Scheme scheme = Scheme::kNone;
  std::size_t workers = 0;
  std::size_t batch_per_worker = 0;
  double bandwidth = 0.0;
  double compute_s = 0.0;
  double upload_s = 0.0;
  double download_s = 0.0;
  double index_s = 0.0;
  double comm_s = 0.0;
  double total_s = 0.0;
  double comm_fraction = 0.0;
  double speedup = 1.0;  // uncompressed total / this total
};

PerfEstimate estimate_step(const SystemSpec& sys, const WorkloadSpec& wl);

enum class SweepAxis { kWorkers, kBatch, kBandwidth };

// One estimate per value of the chosen axis, for each scheme in `schemes`
// (scheme-major order).
std::vector<PerfEstimate> sweep(const SystemSpec& sys, const WorkloadSpec& wl, SweepAxis axis,
                                std::span<const double> values, std::span<const Scheme> schemes);

// Leader index bytes over round-trip uncompressed bytes: bi / (2 r bv).
double index_overhead_fraction(const WorkloadSpec& wl, const SystemSpec& sys);

struct FractionTarget {
  std::size_t batch_per_worker = 0;
  double comm_fraction = 0.0;
};

// Efficiency in (0, 1] minimizing squared comm-fraction error over targets.
double fit_efficiency(SystemSpec sys, WorkloadSpec wl, std::span<const FractionTarget> targets);

inline constexpr std::string_view kCsvHeader =
    "scheme,n,b,bandwidth,compute_s,upload_s,download_s,index_s,total_s,comm_fraction,speedup";

void write_csv(std::ostream& os, std::span<const PerfEstimate> rows);

}  // namespace scalecom::perf
