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

#include "scalecom/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace scalecom::io {

using nlohmann::json;

ParseError::ParseError(std::string source, std::size_t line, const std::string& what)
    : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
      source_(std::move(source)),
      line_(line) {}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vector_json(const DenseVector& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(number_or_null(x));
  return arr;
}

double read_number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  if (it->is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!it->is_number()) throw std::invalid_argument(std::string("field '") + key + "' is not a number");
  return it->get<double>();
}

template <typename T>
T read_integer(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  if (!it->is_number_unsigned()) {
    throw std::invalid_argument(std::string("field '") + key + "' is not a non-negative integer");
  }
  return it->get<T>();
}

DenseVector read_vector(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("snapshot vector is not an array");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (x.is_null()) {
      v.push_back(std::numeric_limits<double>::quiet_NaN());
    } else if (x.is_number()) {
      v.push_back(x.get<double>());
    } else {
      throw std::invalid_argument("snapshot entry is not a number");
    }
  }
  return DenseVector(std::move(v));
}

}  // namespace

std::string record_to_json_line(const sim::IterationRecord& r) {
  json j;
  j["t"] = r.t;
  j["leader"] = r.leader;
  j["compressed"] = r.compressed;
  j["lr"] = number_or_null(r.lr);
  j["loss"] = number_or_null(r.loss);
  j["grad_norm_sq"] = number_or_null(r.grad_norm_sq);
  j["gamma"] = number_or_null(r.gamma);
  j["gamma0"] = number_or_null(r.gamma0);
  j["d_over_k"] = number_or_null(r.d_over_k);
  j["mean_cosine_distance"] = number_or_null(r.mean_cosine_distance);
  j["virtual_residual"] = number_or_null(r.virtual_residual);
  j["memory_norm"] = number_or_null(r.memory_norm);
  j["support_size"] = r.support_size;
  j["upload_bytes"] = r.upload_bytes_per_worker;
  j["download_bytes"] = r.download_bytes_per_worker;
  j["index_bytes"] = r.index_bytes;
  j["batch_ids"] = r.batch_ids;
  if (r.snapshot) {
    json s;
    s["memory0"] = vector_json(r.snapshot->memory0);
    if (r.snapshot->memory1) s["memory1"] = vector_json(*r.snapshot->memory1);
    s["ef_grad0"] = vector_json(r.snapshot->ef_grad0);
    s["ef_grad_mean"] = vector_json(r.snapshot->ef_grad_mean);
    j["snapshot"] = std::move(s);
  }
  return j.dump();
}

void write_trace(std::ostream& os, const sim::TrainingTrace& trace) {
  for (const auto& r : trace.records) os << record_to_json_line(r) << '\n';
}

void write_trace_file(const std::filesystem::path& path, const sim::TrainingTrace& trace) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  write_trace(os, trace);
  if (!os) throw Error("write to '" + path.string() + "' failed");
}

std::vector<sim::IterationRecord> read_trace(std::istream& is, const std::string& source) {
  std::vector<sim::IterationRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
      sim::IterationRecord r;
      r.t = read_integer<std::size_t>(j, "t");
      r.leader = read_integer<std::size_t>(j, "leader");
      if (!j.contains("compressed") || !j["compressed"].is_boolean()) {
        throw std::invalid_argument("field 'compressed' missing or not boolean");
      }
      r.compressed = j["compressed"].get<bool>();
      r.lr = read_number(j, "lr");
      r.loss = read_number(j, "loss");
      r.grad_norm_sq = read_number(j, "grad_norm_sq");
      r.gamma = read_number(j, "gamma");
      r.gamma0 = read_number(j, "gamma0");
      r.d_over_k = read_number(j, "d_over_k");
      r.mean_cosine_distance = read_number(j, "mean_cosine_distance");
      r.virtual_residual = read_number(j, "virtual_residual");
      r.memory_norm = read_number(j, "memory_norm");
      r.support_size = read_integer<std::size_t>(j, "support_size");
      r.upload_bytes_per_worker = read_integer<std::uint64_t>(j, "upload_bytes");
      r.download_bytes_per_worker = read_integer<std::uint64_t>(j, "download_bytes");
      r.index_bytes = read_integer<std::uint64_t>(j, "index_bytes");
      if (j.contains("batch_ids")) r.batch_ids = j["batch_ids"].get<std::vector<std::uint64_t>>();
      if (j.contains("snapshot")) {
        const json& s = j["snapshot"];
        sim::Snapshot& snap = r.snapshot.emplace();
        snap.memory0 = read_vector(s.at("memory0"));
        if (s.contains("memory1")) snap.memory1.emplace(read_vector(s["memory1"]));
        snap.ef_grad0 = read_vector(s.at("ef_grad0"));
        snap.ef_grad_mean = read_vector(s.at("ef_grad_mean"));
      }
      if (!out.empty() && r.t <= out.back().t) throw std::invalid_argument("iteration index is not increasing");
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return out;
}

std::vector<sim::IterationRecord> read_trace_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError(path.string(), 0, "cannot open trace");
  return read_trace(is, path.string());
}

}  // namespace scalecom::io
