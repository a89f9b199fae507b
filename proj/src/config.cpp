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

#include "scalecom/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "scalecom/compress.hpp"
#include "scalecom/io.hpp"

namespace scalecom::config {

using nlohmann::json;

std::shared_ptr<problems::Problem> make_problem(const ProblemSpec& spec) {
  if (spec.name == "quadratic") return problems::make_quadratic(spec.dim, spec.condition, spec.noise, spec.seed);
  if (spec.name == "logistic") return problems::make_logistic(spec.samples, spec.dim, spec.l2, spec.seed, spec.signal,
                                                                  spec.feature_spread);
  if (spec.name == "mlp") {
    const auto act = spec.activation == "relu" ? problems::Activation::kRelu : problems::Activation::kTanh;
    return problems::make_mlp(spec.layers, spec.samples, spec.seed, act);
  }
  if (spec.name == "csv") {
    return std::make_shared<problems::LogisticProblem>(problems::load_csv_dataset(spec.csv_path), spec.l2);
  }
  throw ArgumentError("unknown problem '" + spec.name + "'");
}

namespace {

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Reads one JSON object, anchoring every complaint to the key's line.
class Reader {
 public:
  Reader(const json& obj, const std::string& text, const std::string& source, std::string prefix)
      : obj_(obj), text_(text), source_(source), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) fail("", "expected a JSON object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    std::size_t line = 0;
    if (!key.empty()) {
      const auto pos = text_.find("\"" + key + "\"");
      if (pos != std::string::npos) line = line_of_offset(text_, pos);
    }
    const std::string name = prefix_.empty() ? key : (key.empty() ? prefix_ : prefix_ + "." + key);
    throw io::ParseError(source_, line, (name.empty() ? "" : "'" + name + "': ") + what);
  }

  bool has(const char* key) const { return obj_.contains(key) && !obj_[key].is_null(); }

  const json& at(const char* key) const {
    seen_.insert(key);
    return obj_.at(key);
  }

  template <typename T>
  void get(const char* key, T& out) const {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = obj_[key];
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) fail(key, "expected true or false");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_unsigned()) fail(key, "expected a non-negative integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) fail(key, "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) fail(key, "expected a string");
      }
      out = v.get<T>();
    } catch (const json::exception& e) {
      fail(key, e.what());
    }
  }

  template <typename T>
  void get_opt(const char* key, std::optional<T>& out) const {
    seen_.insert(key);
    if (!has(key)) return;
    T v{};
    get(key, v);
    out = v;
  }

  void mark(const char* key) const { seen_.insert(key); }

  void reject_unknown() const {
    for (const auto& item : obj_.items()) {
      if (!seen_.count(item.key())) fail(item.key(), "unknown key");
    }
  }

  Reader child(const char* key) const { return Reader(at(key), text_, source_, prefix_.empty() ? key : prefix_ + "." + key); }

 private:
  const json& obj_;
  const std::string& text_;
  const std::string& source_;
  std::string prefix_;
  mutable std::set<std::string> seen_;
};

void require(const Reader& r, const char* key, bool ok, const std::string& what) {
  if (!ok) r.fail(key, what);
}

void read_problem(const Reader& r, ProblemSpec& p) {
  r.get("name", p.name);
  r.get("dim", p.dim);
  r.get("condition", p.condition);
  r.get("noise", p.noise);
  r.get("samples", p.samples);
  r.get("l2", p.l2);
  r.get("signal", p.signal);
  r.get("feature_spread", p.feature_spread);
  r.get("layers", p.layers);
  r.get("activation", p.activation);
  r.get("csv", p.csv_path);
  r.get("seed", p.seed);
  r.reject_unknown();
  require(r, "name", p.name == "quadratic" || p.name == "logistic" || p.name == "mlp" || p.name == "csv",
          "must be one of quadratic, logistic, mlp, csv");
  require(r, "dim", p.dim >= 1, "must be >= 1");
  require(r, "condition", p.condition >= 1.0, "must be >= 1");
  require(r, "feature_spread", p.feature_spread >= 1.0, "must be >= 1");
  require(r, "noise", p.noise >= 0.0, "must be >= 0");
  require(r, "samples", p.samples >= 1, "must be >= 1");
  require(r, "l2", p.l2 >= 0.0, "must be >= 0");
  require(r, "layers", p.layers.size() >= 2 &&
                           std::all_of(p.layers.begin(), p.layers.end(), [](std::size_t x) { return x >= 1; }),
          "needs at least an input and an output width, all >= 1");
  require(r, "activation", p.activation == "tanh" || p.activation == "relu", "must be tanh or relu");
  require(r, "csv", p.name != "csv" || !p.csv_path.empty(), "path required for the csv problem");
}

void read_perf(const Reader& r, PerfSpec& p) {
  if (r.has("system")) {
    const Reader s = r.child("system");
    s.get("workers", p.system.workers);
    s.get("peak_flops", p.system.peak_flops);
    s.get("efficiency", p.system.efficiency);
    s.get("bandwidth", p.system.bandwidth);
    s.get("value_bytes", p.system.value_bytes);
    s.get("index_bytes", p.system.index_bytes);
    std::string overlap = p.system.overlap == perf::OverlapMode::kSerial ? "serial" : "pipelined";
    s.get("overlap", overlap);
    s.reject_unknown();
    require(s, "overlap", overlap == "serial" || overlap == "pipelined", "must be serial or pipelined");
    p.system.overlap = overlap == "serial" ? perf::OverlapMode::kSerial : perf::OverlapMode::kPipelined;
    try {
      p.system.validate();
    } catch (const ArgumentError& e) {
      s.fail("", e.what());
    }
  } else {
    r.mark("system");
  }
  if (r.has("workload")) {
    const Reader w = r.child("workload");
    w.get("flops_per_sample", p.workload.flops_per_sample);
    w.get("params", p.workload.params);
    w.get("batch_per_worker", p.workload.batch_per_worker);
    w.get("rate", p.workload.rate);
    w.reject_unknown();
    try {
      p.workload.validate();
    } catch (const ArgumentError& e) {
      w.fail("", e.what());
    }
  }
  std::string axis = "workers";
  r.get("axis", axis);
  require(r, "axis", axis == "workers" || axis == "batch" || axis == "bandwidth",
          "must be workers, batch or bandwidth");
  p.axis = axis == "workers" ? perf::SweepAxis::kWorkers
           : axis == "batch" ? perf::SweepAxis::kBatch
                             : perf::SweepAxis::kBandwidth;
  r.get("values", p.values);
  require(r, "values", !p.values.empty(), "must not be empty");
  if (r.has("schemes")) {
    std::vector<std::string> names;
    r.get("schemes", names);
    p.schemes.clear();
    for (const auto& n : names) {
      try {
        p.schemes.push_back(perf::parse_scheme(n));
      } catch (const ArgumentError& e) {
        r.fail("schemes", e.what());
      }
    }
    require(r, "schemes", !p.schemes.empty(), "must not be empty");
  }
  r.reject_unknown();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw io::ParseError(source, line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
  }
  const Reader r(root, text, source, "");
  ExperimentConfig cfg;
  auto& s = cfg.sim;
  r.get("workers", s.workers);
  r.get("k", s.k);
  r.get("rate", s.rate);
  r.get("lr", s.lr);
  r.get_opt("lr_constant", cfg.lr_constant);
  r.get_opt("lr_sigma", cfg.lr_sigma);
  r.get("beta", s.beta);
  r.get("iterations", s.iterations);
  r.get("warmup_steps", s.warmup_steps);
  std::string compressor(compress::to_string(s.compressor.kind));
  r.get("compressor", compressor);
  r.get("chunks", s.compressor.chunks);
  r.get("batch_size", s.batch_size);
  r.get("momentum", s.momentum);
  r.get("seed", s.seed);
  r.get("metric_stride", s.metric_stride);
  r.get("snapshot_stride", s.snapshot_stride);
  r.get("parallel", s.parallel);
  r.get("value_bytes", s.value_bytes);
  r.get("index_bytes", s.index_bytes);
  r.get("divergence_factor", s.divergence_factor);
  r.get("paired", cfg.paired);
  r.get("out", cfg.out_dir);
  std::string data_mode = s.data_mode == problems::DataMode::kIid ? "iid" : "sharded";
  r.get("data_mode", data_mode);

  require(r, "workers", s.workers >= 1, "must be >= 1");
  require(r, "rate", s.rate >= 1.0, "must be >= 1");
  require(r, "lr", s.lr > 0.0, "must be > 0");
  require(r, "lr_constant", !cfg.lr_constant || *cfg.lr_constant > 0.0, "must be > 0");
  require(r, "lr_sigma", !cfg.lr_sigma || *cfg.lr_sigma > 0.0, "must be > 0");
  require(r, "beta", s.beta > 0.0 && s.beta <= 1.0, "must lie in (0, 1]");
  require(r, "batch_size", s.batch_size >= 1, "must be >= 1");
  require(r, "momentum", s.momentum >= 0.0 && s.momentum < 1.0, "must lie in [0, 1)");
  require(r, "metric_stride", s.metric_stride >= 1, "must be >= 1");
  require(r, "chunks", s.compressor.chunks >= 1, "must be >= 1");
  require(r, "divergence_factor", s.divergence_factor > 1.0, "must be > 1");
  require(r, "data_mode", data_mode == "iid" || data_mode == "sharded", "must be iid or sharded");
  s.data_mode = data_mode == "iid" ? problems::DataMode::kIid : problems::DataMode::kSharded;
  try {
    s.compressor.kind = compress::parse_kind(compressor);
  } catch (const ArgumentError& e) {
    r.fail("compressor", e.what());
  }

  if (r.has("schedule")) {
    const Reader sr = r.child("schedule");
    std::string kind = s.schedule.kind == sim::LrScheduleKind::kConstant ? "constant" : "warmup_decay";
    sr.get("kind", kind);
    sr.get("warmup_steps", s.schedule.warmup_steps);
    sr.get("final_scale", s.schedule.final_scale);
    sr.reject_unknown();
    require(sr, "kind", kind == "constant" || kind == "warmup_decay", "must be constant or warmup_decay");
    require(sr, "final_scale", s.schedule.final_scale >= 0.0, "must be >= 0");
    s.schedule.kind = kind == "constant" ? sim::LrScheduleKind::kConstant : sim::LrScheduleKind::kWarmupDecay;
  } else {
    r.mark("schedule");
  }
  if (r.has("partitions")) {
    const json& arr = r.at("partitions");
    if (!arr.is_array()) r.fail("partitions", "expected an array");
    for (const auto& item : arr) {
      const Reader pr(item, text, source, "partitions[]");
      sim::Partition part;
      pr.get("size", part.size);
      pr.get("rate", part.rate);
      pr.reject_unknown();
      require(pr, "size", part.size >= 1, "must be >= 1");
      require(pr, "rate", part.rate >= 1.0, "must be >= 1");
      s.partitions.push_back(part);
    }
  } else {
    r.mark("partitions");
  }
  if (r.has("problem")) {
    read_problem(r.child("problem"), cfg.problem);
  } else {
    r.mark("problem");
  }
  if (r.has("perf")) {
    read_perf(r.child("perf"), cfg.perf);
  } else {
    r.mark("perf");
  }
  r.reject_unknown();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw io::ParseError(path.string(), 0, "cannot open config");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string dump_config(const ExperimentConfig& cfg) {
  const auto& s = cfg.sim;
  json j;
  j["workers"] = s.workers;
  j["k"] = s.k;
  j["rate"] = s.rate;
  j["lr"] = s.lr;
  j["lr_constant"] = cfg.lr_constant ? json(*cfg.lr_constant) : json(nullptr);
  j["lr_sigma"] = cfg.lr_sigma ? json(*cfg.lr_sigma) : json(nullptr);
  j["beta"] = s.beta;
  j["iterations"] = s.iterations;
  j["warmup_steps"] = s.warmup_steps;
  j["compressor"] = std::string(compress::to_string(s.compressor.kind));
  j["chunks"] = s.compressor.chunks;
  j["batch_size"] = s.batch_size;
  j["momentum"] = s.momentum;
  j["seed"] = s.seed;
  j["metric_stride"] = s.metric_stride;
  j["snapshot_stride"] = s.snapshot_stride;
  j["parallel"] = s.parallel;
  j["value_bytes"] = s.value_bytes;
  j["index_bytes"] = s.index_bytes;
  j["divergence_factor"] = s.divergence_factor;
  j["paired"] = cfg.paired;
  j["out"] = cfg.out_dir;
  j["data_mode"] = s.data_mode == problems::DataMode::kIid ? "iid" : "sharded";
  j["schedule"] = {{"kind", s.schedule.kind == sim::LrScheduleKind::kConstant ? "constant" : "warmup_decay"},
                   {"warmup_steps", s.schedule.warmup_steps},
                   {"final_scale", s.schedule.final_scale}};
  j["partitions"] = json::array();
  for (const auto& p : s.partitions) j["partitions"].push_back({{"size", p.size}, {"rate", p.rate}});
  const auto& p = cfg.problem;
  j["problem"] = {{"name", p.name},       {"dim", p.dim},   {"condition", p.condition},
                  {"noise", p.noise},     {"samples", p.samples}, {"l2", p.l2},
                  {"signal", p.signal},   {"feature_spread", p.feature_spread}, {"layers", p.layers},   {"activation", p.activation},
                  {"csv", p.csv_path},    {"seed", p.seed}};
  const auto& sys = cfg.perf.system;
  const auto& wl = cfg.perf.workload;
  json schemes = json::array();
  for (auto sc : cfg.perf.schemes) schemes.push_back(std::string(perf::to_string(sc)));
  j["perf"] = {
      {"system",
       {{"workers", sys.workers},
        {"peak_flops", sys.peak_flops},
        {"efficiency", sys.efficiency},
        {"bandwidth", sys.bandwidth},
        {"value_bytes", sys.value_bytes},
        {"index_bytes", sys.index_bytes},
        {"overlap", sys.overlap == perf::OverlapMode::kSerial ? "serial" : "pipelined"}}},
      {"workload",
       {{"flops_per_sample", wl.flops_per_sample},
        {"params", wl.params},
        {"batch_per_worker", wl.batch_per_worker},
        {"rate", wl.rate}}},
      {"axis", cfg.perf.axis == perf::SweepAxis::kWorkers ? "workers"
               : cfg.perf.axis == perf::SweepAxis::kBatch ? "batch"
                                                          : "bandwidth"},
      {"values", cfg.perf.values},
      {"schemes", schemes}};
  return j.dump(2) + "\n";
}

}  // namespace scalecom::config
