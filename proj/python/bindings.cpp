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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "scalecom/compress.hpp"
#include "scalecom/config.hpp"
#include "scalecom/core.hpp"
#include "scalecom/io.hpp"
#include "scalecom/metrics.hpp"
#include "scalecom/perfmodel.hpp"
#include "scalecom/simulator.hpp"
#include "scalecom/theory.hpp"

namespace py = pybind11;
using namespace scalecom;

namespace {

std::vector<Index> to_indices(const IndexSet& s) { return {s.begin(), s.end()}; }

IndexSet make_support(const std::vector<Index>& idx, std::size_t dim) {
  return IndexSet::from_unsorted(idx, dim);
}

std::vector<DenseVector> to_vectors(const std::vector<std::vector<double>>& xs) {
  std::vector<DenseVector> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.emplace_back(x);
  return out;
}

py::dict record_dict(const sim::IterationRecord& r) {
  py::dict d;
  d["t"] = r.t;
  d["leader"] = r.leader;
  d["compressed"] = r.compressed;
  d["lr"] = r.lr;
  d["loss"] = r.loss;
  d["grad_norm_sq"] = r.grad_norm_sq;
  d["gamma"] = r.gamma;
  d["d_over_k"] = r.d_over_k;
  d["mean_cosine_distance"] = r.mean_cosine_distance;
  d["virtual_residual"] = r.virtual_residual;
  d["upload_bytes"] = r.upload_bytes_per_worker;
  d["download_bytes"] = r.download_bytes_per_worker;
  d["batch_ids"] = r.batch_ids;
  return d;
}

py::dict train(const std::string& config_json, bool baseline) {
  const auto cfg = config::parse_config(config_json, "<python>");
  const auto problem = config::make_problem(cfg.problem);
  sim::TrainingTrace trace;
  {
    py::gil_scoped_release release;
    trace = sim::run(cfg.sim, *problem, baseline ? sim::Mode::kBaseline : sim::Mode::kScaleCom);
  }
  py::list records;
  for (const auto& r : trace.records) records.append(record_dict(r));
  const auto s = sim::summarize(trace);
  py::dict out;
  out["records"] = records;
  out["initial_loss"] = trace.initial_loss;
  out["final_loss"] = s.final_loss;
  out["final_grad_norm_sq"] = s.final_grad_norm_sq;
  out["mean_d_over_k"] = s.mean_d_over_k;
  out["final_parameters"] = trace.final_parameters.values();
  return out;
}

}  // namespace

PYBIND11_MODULE(_scalecom, m) {
  m.doc() = "ScaleCom gradient-compression simulator";

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ArithmeticError);
  py::register_exception<UndefinedError>(m, "UndefinedError", PyExc_ArithmeticError);
  py::register_exception<io::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<sim::DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  m.def("top_k_indices", [](const std::vector<double>& v, std::size_t k) {
    return to_indices(compress::top_k_indices(DenseVector(v), k));
  }, py::arg("v"), py::arg("k"));
  m.def("chunked_top_k_indices", [](const std::vector<double>& v, std::size_t k, std::size_t chunks) {
    return to_indices(compress::chunked_top_k_indices(DenseVector(v), k, chunks));
  }, py::arg("v"), py::arg("k"), py::arg("chunks"));
  m.def("sparsify", [](const std::vector<double>& v, const std::vector<Index>& support) {
    const auto s = compress::sparsify(DenseVector(v), make_support(support, v.size()));
    return densify(s).values();
  }, py::arg("v"), py::arg("support"));
  m.def("hamming_distance", [](const std::vector<Index>& a, const std::vector<Index>& b, std::size_t dim) {
    return compress::hamming_distance(make_support(a, dim), make_support(b, dim));
  }, py::arg("a"), py::arg("b"), py::arg("dim"));
  m.def("clt_k", [](const std::vector<std::vector<double>>& ef_grads, std::size_t k, std::size_t t) {
    // Leader t mod n picks the support; everyone reduces on it.
    const auto vs = to_vectors(ef_grads);
    if (vs.empty()) throw ArgumentError("clt_k needs at least one worker");
    const auto support = compress::top_k_indices(vs[sim::leader_schedule(t, vs.size())], k);
    std::vector<SparseGradient> payloads;
    for (const auto& v : vs) payloads.push_back(compress::sparsify(v, support));
    const auto g = sim::sparse_allreduce(payloads);
    return py::make_tuple(to_indices(support), densify(g).values());
  }, py::arg("ef_grads"), py::arg("k"), py::arg("t"));
  m.def("update_memory", [](std::vector<double> mem, const std::vector<double>& grad,
                            const std::vector<double>& g, double beta) {
    feedback::ErrorFeedbackMemory em(mem.size(), beta);
    em.memory() = DenseVector(std::move(mem));
    feedback::update_memory(em, DenseVector(grad), DenseVector(g));
    return em.memory().values();
  }, py::arg("memory"), py::arg("grad"), py::arg("g"), py::arg("beta"));

  m.def("lemma1_gamma", &theory::lemma1_gamma, py::arg("d"), py::arg("k"), py::arg("gamma0"));
  m.def("lemma2_gamma", [](const std::vector<double>& gs, double kappa) {
    return theory::lemma2_gamma(gs, kappa);
  }, py::arg("gammas"), py::arg("kappa"));
  m.def("beta_range", [](double gamma) {
    const auto r = theory::beta_range(gamma);
    return py::make_tuple(r.lo, r.hi);
  }, py::arg("gamma"));
  m.def("c_epsilon", &theory::c_epsilon, py::arg("beta"), py::arg("gamma"));
  m.def("lambda_constant", &theory::lambda_constant, py::arg("beta"), py::arg("gamma"), py::arg("epsilon"));
  m.def("theorem1_bound", [](double G, double L, double sigma, double gap, double gamma, double beta,
                             std::optional<double> epsilon, std::size_t workers, const std::vector<double>& T) {
    const double eps = epsilon.value_or(theory::default_epsilon(beta, gamma));
    const theory::BoundInputs in{G, L, sigma, gap, gamma, beta, eps, workers};
    py::list out;
    for (const auto& p : theory::theorem1_bound(in, T)) out.append(py::make_tuple(p.T, p.leading, p.residual, p.total));
    return out;
  }, py::arg("G"), py::arg("L"), py::arg("sigma"), py::arg("gap"), py::arg("gamma"), py::arg("beta"),
     py::arg("epsilon") = py::none(), py::arg("workers"), py::arg("T"));
  m.def("recommend_compression_rate", &theory::recommend_compression_rate, py::arg("ratio"));

  m.def("memory_similarity", [](const std::vector<std::vector<double>>& ms) {
    return metrics::memory_similarity(to_vectors(ms)).mean_off_diagonal();
  }, py::arg("memories"));
  m.def("spearman_rank", [](const std::vector<double>& x, const std::vector<double>& y, std::uint64_t seed) {
    const auto r = metrics::spearman_rank(DenseVector(x), DenseVector(y), seed);
    return py::make_tuple(r.rho, r.p_value);
  }, py::arg("x"), py::arg("y"), py::arg("seed") = 0);

  m.def("estimate_step", [](const std::string& scheme, std::size_t workers, std::size_t batch, double rate,
                            double bandwidth, double efficiency) {
    perf::SystemSpec sys;
    sys.workers = workers;
    sys.bandwidth = bandwidth;
    sys.efficiency = efficiency;
    perf::WorkloadSpec wl;
    wl.scheme = perf::parse_scheme(scheme);
    wl.batch_per_worker = batch;
    wl.rate = rate;
    const auto e = perf::estimate_step(sys, wl);
    py::dict d;
    d["compute_s"] = e.compute_s;
    d["upload_s"] = e.upload_s;
    d["download_s"] = e.download_s;
    d["index_s"] = e.index_s;
    d["comm_s"] = e.comm_s;
    d["total_s"] = e.total_s;
    d["comm_fraction"] = e.comm_fraction;
    d["speedup"] = e.speedup;
    return d;
  }, py::arg("scheme"), py::arg("workers") = 8, py::arg("batch") = 8, py::arg("rate") = 112.0,
     py::arg("bandwidth") = 32e9, py::arg("efficiency") = 0.5);

  m.def("train", &train, py::arg("config_json"), py::arg("baseline") = false);
  m.def("dump_config", [](const std::string& text) {
    return config::dump_config(config::parse_config(text, "<python>"));
  }, py::arg("config_json"));
}
