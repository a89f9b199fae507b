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
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "scalecom/core.hpp"
#include "scalecom/simulator.hpp"

namespace scalecom::io {

/// Malformed input; `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what);

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

// 17 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double x);

// One record per line. Non-finite metrics are written as null.
void write_trace(std::ostream& os, const sim::TrainingTrace& trace);
void write_trace_file(const std::filesystem::path& path, const sim::TrainingTrace& trace);
std::string record_to_json_line(const sim::IterationRecord& rec);

// Throws ParseError naming the offending line.
std::vector<sim::IterationRecord> read_trace(std::istream& is, const std::string& source);
std::vector<sim::IterationRecord> read_trace_file(const std::filesystem::path& path);

}  // namespace scalecom::io
