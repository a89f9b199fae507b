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
#include <filesystem>
#include <vector>

#include "scalecom/simulator.hpp"

namespace scalecom::tools {

struct AnalyzeOptions {
  std::size_t bins = 20;
  std::size_t qq_points = 50;
};

// Writes cosine.csv, overlap.csv, histogram.csv, spearman.csv and qq.csv
// into `out_dir`. Snapshot-derived files only hold rows for records that
// carry a snapshot.
void analyze_records(const std::vector<sim::IterationRecord>& records,
                     const std::filesystem::path& out_dir, const AnalyzeOptions& opts);

}  // namespace scalecom::tools
