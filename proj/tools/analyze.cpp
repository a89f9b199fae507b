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

#include "analyze.hpp"

#include <cmath>
#include <fstream>

#include "scalecom/io.hpp"
#include "scalecom/metrics.hpp"

namespace scalecom::tools {

namespace {

std::ofstream open_csv(const std::filesystem::path& path, const char* header) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  os << header << '\n';
  return os;
}

DenseVector magnitudes(const DenseVector& v) {
  DenseVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::fabs(v[i]);
  return out;
}

}  // namespace

void analyze_records(const std::vector<sim::IterationRecord>& records,
                     const std::filesystem::path& out_dir, const AnalyzeOptions& opts) {
  std::filesystem::create_directories(out_dir);
  auto cosine = open_csv(out_dir / "cosine.csv", "t,mean_cosine_distance,defined");
  auto overlap = open_csv(out_dir / "overlap.csv", "t,leader,d_over_k,overlap,gamma,gamma0");
  auto hist = open_csv(out_dir / "histogram.csv", "t,vector,bin,lower,upper,count");
  auto spear = open_csv(out_dir / "spearman.csv", "t,rho,p_value,method");
  auto qq = open_csv(out_dir / "qq.csv", "t,index,worker0_quantile,mean_quantile,r_squared");

  for (const auto& r : records) {
    const bool defined = std::isfinite(r.mean_cosine_distance);
    cosine << r.t << ',' << io::format_number(r.mean_cosine_distance) << ',' << (defined ? 1 : 0) << '\n';
    overlap << r.t << ',' << r.leader << ',' << io::format_number(r.d_over_k) << ','
            << io::format_number(std::isfinite(r.d_over_k) ? 1.0 - r.d_over_k : r.d_over_k) << ','
            << io::format_number(r.gamma) << ',' << io::format_number(r.gamma0) << '\n';
    if (!r.snapshot) continue;
    const auto& s = *r.snapshot;
    const std::pair<const char*, const DenseVector*> vectors[] = {{"memory0", &s.memory0},
                                                                  {"ef_grad0", &s.ef_grad0}};
    for (const auto& [name, vec] : vectors) {
      const auto h = metrics::magnitude_histogram(*vec, opts.bins);
      hist << r.t << ',' << name << ",zero,0,0," << h.zeros << '\n';
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        hist << r.t << ',' << name << ',' << b << ',' << io::format_number(h.edges[b]) << ','
             << io::format_number(h.edges[b + 1]) << ',' << h.counts[b] << '\n';
      }
    }
    try {
      const auto sr = metrics::spearman_rank(magnitudes(s.ef_grad0), magnitudes(s.ef_grad_mean), r.t);
      spear << r.t << ',' << io::format_number(sr.rho) << ',' << io::format_number(sr.p_value) << ','
            << (sr.permutation ? "permutation" : "normal") << '\n';
    } catch (const UndefinedError&) {
      spear << r.t << ",nan,nan,undefined\n";
    }
    try {
      const auto q = metrics::qq_quantiles(s.ef_grad0, s.ef_grad_mean, opts.qq_points);
      for (std::size_t i = 0; i < q.qx.size(); ++i) {
        qq << r.t << ',' << i << ',' << io::format_number(q.qx[i]) << ',' << io::format_number(q.qy[i])
           << ',' << io::format_number(q.r_squared) << '\n';
      }
    } catch (const UndefinedError&) {
    }
  }
}

}  // namespace scalecom::tools
