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

#include "scalecom/perfmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scalecom/core.hpp"
#include "scalecom/io.hpp"

namespace scalecom::perf {

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::kNone: return "none";
    case Scheme::kLocalTopK: return "local_topk";
    case Scheme::kScaleCom: return "scalecom";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::kNone, Scheme::kLocalTopK, Scheme::kScaleCom}) {
    if (to_string(s) == name) return s;
  }
  throw ArgumentError("unknown scheme '" + std::string(name) + "'");
}

void SystemSpec::validate() const {
  if (workers < 1) throw ArgumentError("system: workers must be >= 1");
  if (!(peak_flops > 0.0)) throw ArgumentError("system: peak_flops must be > 0");
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw ArgumentError("system: efficiency must lie in (0, 1]");
  if (!(bandwidth > 0.0)) throw ArgumentError("system: bandwidth must be > 0");
  if (!(value_bytes > 0.0)) throw ArgumentError("system: value_bytes must be > 0");
  if (!(index_bytes >= 0.0)) throw ArgumentError("system: index_bytes must be >= 0");
}

void WorkloadSpec::validate() const {
  if (!(flops_per_sample > 0.0)) throw ArgumentError("workload: flops_per_sample must be > 0");
  if (!(params >= 1.0)) throw ArgumentError("workload: params must be >= 1");
  if (batch_per_worker < 1) throw ArgumentError("workload: batch_per_worker must be >= 1");
  if (!(rate >= 1.0)) throw ArgumentError("workload: rate must be >= 1");
}

namespace {

PerfEstimate raw_estimate(const SystemSpec& sys, const WorkloadSpec& wl) {
  PerfEstimate e;
  e.scheme = wl.scheme;
  e.workers = sys.workers;
  e.batch_per_worker = wl.batch_per_worker;
  e.bandwidth = sys.bandwidth;
  e.compute_s = static_cast<double>(wl.batch_per_worker) * wl.flops_per_sample /
                (sys.peak_flops * sys.efficiency);
  const double bw = sys.bandwidth;
  const double kept = wl.params / wl.rate;
  switch (wl.scheme) {
    case Scheme::kNone:
      e.upload_s = wl.params * sys.value_bytes / bw;
      e.download_s = e.upload_s;
      break;
    case Scheme::kLocalTopK:
      e.upload_s = kept * (sys.value_bytes + sys.index_bytes) / bw;
      e.download_s = static_cast<double>(sys.workers) * e.upload_s;
      break;
    case Scheme::kScaleCom:
      e.index_s = kept * sys.index_bytes / bw;
      e.upload_s = kept * sys.value_bytes / bw;
      e.download_s = e.upload_s;
      break;
  }
  e.comm_s = e.index_s + e.upload_s + e.download_s;
  e.total_s = sys.overlap == OverlapMode::kSerial ? e.compute_s + e.comm_s
                                                  : std::max(e.compute_s, e.comm_s);
  e.comm_fraction = (e.total_s - e.compute_s) / e.total_s;
  return e;
}

}  // namespace

PerfEstimate estimate_step(const SystemSpec& sys, const WorkloadSpec& wl) {
  sys.validate();
  wl.validate();
  PerfEstimate e = raw_estimate(sys, wl);
  WorkloadSpec base = wl;
  base.scheme = Scheme::kNone;
  e.speedup = wl.scheme == Scheme::kNone ? 1.0 : raw_estimate(sys, base).total_s / e.total_s;
  return e;
}

std::vector<PerfEstimate> sweep(const SystemSpec& sys, const WorkloadSpec& wl, SweepAxis axis,
                                std::span<const double> values, std::span<const Scheme> schemes) {
  if (values.empty()) throw ArgumentError("sweep: no values");
  if (schemes.empty()) throw ArgumentError("sweep: no schemes");
  std::vector<PerfEstimate> out;
  for (Scheme scheme : schemes) {
    for (double v : values) {
      SystemSpec s = sys;
      WorkloadSpec w = wl;
      w.scheme = scheme;
      switch (axis) {
        case SweepAxis::kWorkers:
          if (!(v >= 1.0) || v != std::floor(v)) throw ArgumentError("sweep: worker counts must be positive integers");
          s.workers = static_cast<std::size_t>(v);
          break;
        case SweepAxis::kBatch:
          if (!(v >= 1.0) || v != std::floor(v)) throw ArgumentError("sweep: batch sizes must be positive integers");
          w.batch_per_worker = static_cast<std::size_t>(v);
          break;
        case SweepAxis::kBandwidth:
          s.bandwidth = v;
          break;
      }
      out.push_back(estimate_step(s, w));
    }
  }
  return out;
}

double index_overhead_fraction(const WorkloadSpec& wl, const SystemSpec& sys) {
  sys.validate();
  wl.validate();
  return sys.index_bytes / (2.0 * wl.rate * sys.value_bytes);
}

double fit_efficiency(SystemSpec sys, WorkloadSpec wl, std::span<const FractionTarget> targets) {
  if (targets.empty()) throw ArgumentError("fit_efficiency: no targets");
  auto loss = [&](double log_eff) {
    sys.efficiency = std::exp(log_eff);
    double acc = 0.0;
    for (const auto& t : targets) {
      wl.batch_per_worker = t.batch_per_worker;
      const double diff = estimate_step(sys, wl).comm_fraction - t.comm_fraction;
      acc += diff * diff;
    }
    return acc;
  };
  // Coarse grid then golden-section refinement on log efficiency.
  const double lo = std::log(1e-4);
  const double hi = 0.0;
  constexpr int kGrid = 400;
  int best = 0;
  double best_loss = loss(lo);
  for (int i = 1; i <= kGrid; ++i) {
    const double l = loss(lo + (hi - lo) * i / kGrid);
    if (l < best_loss) {
      best_loss = l;
      best = i;
    }
  }
  const double step = (hi - lo) / kGrid;
  double a = std::max(lo, lo + step * (best - 1));
  double b = std::min(hi, lo + step * (best + 1));
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double c = b - phi * (b - a);
    const double d = a + phi * (b - a);
    if (loss(c) < loss(d)) b = d; else a = c;
  }
  return std::exp(0.5 * (a + b));
}

void write_csv(std::ostream& os, std::span<const PerfEstimate> rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << to_string(r.scheme) << ',' << r.workers << ',' << r.batch_per_worker << ','
       << io::format_number(r.bandwidth) << ',' << io::format_number(r.compute_s) << ','
       << io::format_number(r.upload_s) << ',' << io::format_number(r.download_s) << ','
       << io::format_number(r.index_s) << ',' << io::format_number(r.total_s) << ','
       << io::format_number(r.comm_fraction) << ',' << io::format_number(r.speedup) << '\n';
  }
}

}  // namespace scalecom::perf
