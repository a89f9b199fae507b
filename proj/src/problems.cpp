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

#include "scalecom/problems.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

namespace scalecom::problems {

std::uint64_t MiniBatch::fingerprint() const noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t idx : indices) {
    std::uint64_t v = idx;
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFF;
      h *= 0x100000001B3ULL;
    }
  }
  return h;
}

namespace {

void require_batch(const MiniBatch& batch) {
  if (batch.indices.empty()) throw ArgumentError("stochastic_gradient: empty mini-batch");
}

void require_theta(const Problem& p, const DenseVector& theta) {
  if (theta.size() != p.dimension()) {
    throw DimensionError(std::string(p.name()) + ": parameter dimension " +
                         std::to_string(theta.size()) + " != " + std::to_string(p.dimension()));
  }
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------------------
// Quadratic

QuadraticProblem::QuadraticProblem(DenseVector diag, DenseVector b, double noise)
    : diag_(std::move(diag)), b_(std::move(b)), optimum_(diag_.size()), noise_(noise) {
  require_same_size(diag_, b_, "QuadraticProblem");
  if (diag_.empty()) throw ArgumentError("QuadraticProblem: empty dimension");
  if (noise_ < 0.0) throw ArgumentError("QuadraticProblem: noise must be >= 0");
  for (std::size_t i = 0; i < diag_.size(); ++i) {
    if (!(diag_[i] > 0.0)) throw ArgumentError("QuadraticProblem: diagonal entries must be > 0");
    optimum_[i] = b_[i] / diag_[i];
  }
}

double QuadraticProblem::loss(const DenseVector& theta) const {
  require_theta(*this, theta);
  double acc = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double e = theta[i] - optimum_[i];
    acc += 0.5 * diag_[i] * e * e;
  }
  return acc;
}

DenseVector QuadraticProblem::full_gradient(const DenseVector& theta) const {
  require_theta(*this, theta);
  DenseVector g(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) g[i] = diag_[i] * theta[i] - b_[i];
  return g;
}

DenseVector QuadraticProblem::stochastic_gradient(const DenseVector& theta, const MiniBatch& batch,
                                                  RngStream& rng) const {
  require_batch(batch);
  DenseVector g = full_gradient(theta);
  if (noise_ > 0.0) {
    // Mean of |B| iid N(0, noise^2) offsets has the law N(0, noise^2 / |B|).
    const double scale = noise_ / std::sqrt(static_cast<double>(batch.size()));
    for (double& gi : g) gi -= scale * rng.normal();
  }
  return g;
}

std::optional<double> QuadraticProblem::lipschitz_constant() const {
  return *std::max_element(diag_.begin(), diag_.end());
}

std::shared_ptr<QuadraticProblem> make_quadratic(std::size_t dim, double condition_number,
                                                 double noise, std::uint64_t seed) {
  if (dim == 0) throw ArgumentError("make_quadratic: dimension must be >= 1");
  if (!(condition_number >= 1.0)) throw ArgumentError("make_quadratic: condition number must be >= 1");
  DenseVector diag(dim);
  DenseVector b(dim);
  RngStream rng(seed, 0x51554144ULL);
  for (std::size_t i = 0; i < dim; ++i) {
    const double frac = dim == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(dim - 1);
    diag[i] = std::pow(condition_number, -frac);
    b[i] = diag[i] * rng.normal();
  }
  return std::make_shared<QuadraticProblem>(std::move(diag), std::move(b), noise);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size()) return std::nullopt;
  return v;
}

}  // namespace

Dataset load_csv_dataset(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("load_csv_dataset: cannot open " + path.string());
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split(view, options.delimiter);
    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (auto f : fields) {
      const auto v = parse_double(f);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (first_row) {
      first_row = false;
      const bool header = options.has_header.value_or(!numeric);
      if (header) continue;
    }
    if (!numeric) {
      throw ArgumentError(path.string() + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    if (row.size() < 2) {
      throw ArgumentError(path.string() + ":" + std::to_string(line_no) +
                          ": need at least one feature and a label");
    }
    if (data.rows == 0) {
      data.cols = row.size() - 1;
    } else if (row.size() - 1 != data.cols) {
      throw ArgumentError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(data.cols + 1) + " fields, got " +
                          std::to_string(row.size()));
    }
    data.features.insert(data.features.end(), row.begin(), row.end() - 1);
    data.labels.push_back(row.back());
    ++data.rows;
  }
  if (data.rows == 0) throw ArgumentError("load_csv_dataset: no data rows in " + path.string());
  return data;
}

// ---------------------------------------------------------------------------
// Logistic

LogisticProblem::LogisticProblem(Dataset data, double l2) : data_(std::move(data)), l2_(l2) {
  if (data_.rows == 0 || data_.cols == 0) throw ArgumentError("LogisticProblem: empty dataset");
  if (data_.features.size() != data_.rows * data_.cols || data_.labels.size() != data_.rows) {
    throw DimensionError("LogisticProblem: dataset arrays inconsistent with shape");
  }
  for (double y : data_.labels) {
    if (y != 0.0 && y != 1.0) throw ArgumentError("LogisticProblem: labels must be 0 or 1");
  }
  if (l2_ < 0.0) throw ArgumentError("LogisticProblem: l2 must be >= 0");
}

double LogisticProblem::loss(const DenseVector& theta) const {
  require_theta(*this, theta);
  double acc = 0.0;
  for (std::size_t r = 0; r < data_.rows; ++r) {
    const auto x = data_.row(r);
    double z = 0.0;
    for (std::size_t c = 0; c < data_.cols; ++c) z += x[c] * theta[c];
    acc += softplus(z) - data_.labels[r] * z;
  }
  return acc / static_cast<double>(data_.rows) + 0.5 * l2_ * theta.squared_norm();
}

void LogisticProblem::accumulate_gradient(const DenseVector& theta, std::size_t row,
                                          DenseVector& out) const {
  const auto x = data_.row(row);
  double z = 0.0;
  for (std::size_t c = 0; c < data_.cols; ++c) z += x[c] * theta[c];
  const double residual = sigmoid(z) - data_.labels[row];
  for (std::size_t c = 0; c < data_.cols; ++c) out[c] += residual * x[c];
}

DenseVector LogisticProblem::full_gradient(const DenseVector& theta) const {
  require_theta(*this, theta);
  DenseVector g(data_.cols);
  for (std::size_t r = 0; r < data_.rows; ++r) accumulate_gradient(theta, r, g);
  g.scale(1.0 / static_cast<double>(data_.rows));
  g.axpy(l2_, theta);
  return g;
}

DenseVector LogisticProblem::stochastic_gradient(const DenseVector& theta, const MiniBatch& batch,
                                                 RngStream& /*rng*/) const {
  require_batch(batch);
  require_theta(*this, theta);
  DenseVector g(data_.cols);
  for (std::size_t r : batch.indices) {
    if (r >= data_.rows) throw ArgumentError("LogisticProblem: sample index out of range");
    accumulate_gradient(theta, r, g);
  }
  g.scale(1.0 / static_cast<double>(batch.size()));
  g.axpy(l2_, theta);
  return g;
}

std::shared_ptr<LogisticProblem> make_logistic(std::size_t samples, std::size_t dim, double l2,
                                               std::uint64_t seed, double signal, double feature_spread) {
  if (samples == 0 || dim == 0) throw ArgumentError("make_logistic: empty dataset");
  if (!(feature_spread >= 1.0)) throw ArgumentError("make_logistic: feature_spread must be >= 1");
  std::vector<double> scale(dim, 1.0);
  for (std::size_t c = 1; c < dim; ++c) {
    scale[c] = std::pow(feature_spread, -static_cast<double>(c) / static_cast<double>(dim - 1));
  }
  RngStream rng(seed, 0x4C4F4749ULL);
  std::vector<double> w(dim);
  for (double& wi : w) wi = signal * rng.normal() / std::sqrt(static_cast<double>(dim));
  Dataset data;
  data.rows = samples;
  data.cols = dim;
  data.features.resize(samples * dim);
  data.labels.resize(samples);
  for (std::size_t r = 0; r < samples; ++r) {
    double z = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double x = scale[c] * rng.normal();
      data.features[r * dim + c] = x;
      z += x * w[c];
    }
    data.labels[r] = rng.uniform() < sigmoid(z) ? 1.0 : 0.0;
  }
  return std::make_shared<LogisticProblem>(std::move(data), l2);
}

// ---------------------------------------------------------------------------
// MLP

MlpProblem::MlpProblem(std::vector<std::size_t> layers, Activation activation, Dataset data,
                       std::uint64_t init_seed)
    : layers_(std::move(layers)), activation_(activation), data_(std::move(data)),
      init_seed_(init_seed) {
  if (layers_.size() < 2) throw ArgumentError("MlpProblem: need input and output layer sizes");
  if (std::find(layers_.begin(), layers_.end(), std::size_t{0}) != layers_.end()) {
    throw ArgumentError("MlpProblem: layer sizes must be positive");
  }
  if (data_.rows == 0) throw ArgumentError("MlpProblem: empty dataset");
  if (data_.cols != layers_.front()) {
    throw DimensionError("MlpProblem: feature count does not match input layer");
  }
  const std::size_t classes = layers_.back();
  for (double y : data_.labels) {
    if (y < 0 || y >= static_cast<double>(classes) || y != std::floor(y)) {
      throw ArgumentError("MlpProblem: labels must be class ids in [0, classes)");
    }
  }
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) dim_ += layers_[l + 1] * (layers_[l] + 1);
}

double MlpProblem::sample_pass(const DenseVector& theta, std::size_t row, DenseVector* grad) const {
  const std::size_t depth = layers_.size() - 1;
  // acts[0] is the input; acts[l] the post-activation output of layer l.
  std::vector<std::vector<double>> acts(depth + 1);
  const auto x = data_.row(row);
  acts[0].assign(x.begin(), x.end());
  std::size_t offset = 0;
  std::vector<std::size_t> offsets(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    offsets[l] = offset;
    const std::size_t in = layers_[l];
    const std::size_t out = layers_[l + 1];
    acts[l + 1].assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      double z = theta[offset + out * in + o];
      for (std::size_t i = 0; i < in; ++i) z += theta[offset + o * in + i] * acts[l][i];
      if (l + 1 < depth) {
        z = activation_ == Activation::kTanh ? std::tanh(z) : std::max(z, 0.0);
      }
      acts[l + 1][o] = z;
    }
    offset += out * (in + 1);
  }
  // softmax cross-entropy on the logits
  auto& logits = acts[depth];
  const double top = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double z : logits) denom += std::exp(z - top);
  const auto label = static_cast<std::size_t>(data_.labels[row]);
  const double loss = std::log(denom) + top - logits[label];
  if (grad == nullptr) return loss;

  std::vector<double> delta(logits.size());
  for (std::size_t o = 0; o < logits.size(); ++o) {
    delta[o] = std::exp(logits[o] - top) / denom - (o == label ? 1.0 : 0.0);
  }
  for (std::size_t l = depth; l-- > 0;) {
    const std::size_t in = layers_[l];
    const std::size_t out = layers_[l + 1];
    const std::size_t off = offsets[l];
    std::vector<double> prev(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      (*grad)[off + out * in + o] += delta[o];
      for (std::size_t i = 0; i < in; ++i) {
        (*grad)[off + o * in + i] += delta[o] * acts[l][i];
        prev[i] += theta[off + o * in + i] * delta[o];
      }
    }
    if (l > 0) {
      for (std::size_t i = 0; i < in; ++i) {
        const double a = acts[l][i];
        prev[i] *= activation_ == Activation::kTanh ? 1.0 - a * a : (a > 0.0 ? 1.0 : 0.0);
      }
    }
    delta = std::move(prev);
  }
  return loss;
}

double MlpProblem::loss(const DenseVector& theta) const {
  require_theta(*this, theta);
  double acc = 0.0;
  for (std::size_t r = 0; r < data_.rows; ++r) acc += sample_pass(theta, r, nullptr);
  return acc / static_cast<double>(data_.rows);
}

DenseVector MlpProblem::full_gradient(const DenseVector& theta) const {
  require_theta(*this, theta);
  DenseVector g(dim_);
  for (std::size_t r = 0; r < data_.rows; ++r) sample_pass(theta, r, &g);
  g.scale(1.0 / static_cast<double>(data_.rows));
  return g;
}

DenseVector MlpProblem::stochastic_gradient(const DenseVector& theta, const MiniBatch& batch,
                                            RngStream& /*rng*/) const {
  require_batch(batch);
  require_theta(*this, theta);
  DenseVector g(dim_);
  for (std::size_t r : batch.indices) {
    if (r >= data_.rows) throw ArgumentError("MlpProblem: sample index out of range");
    sample_pass(theta, r, &g);
  }
  g.scale(1.0 / static_cast<double>(batch.size()));
  return g;
}

DenseVector MlpProblem::initial_parameters() const {
  DenseVector theta(dim_);
  RngStream rng(init_seed_, 0x4D4C5049ULL);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    const std::size_t in = layers_[l];
    const std::size_t out = layers_[l + 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (std::size_t w = 0; w < out * in; ++w) theta[offset + w] = scale * rng.normal();
    offset += out * (in + 1);  // biases start at zero
  }
  return theta;
}

std::shared_ptr<MlpProblem> make_mlp(std::vector<std::size_t> layers, std::size_t samples,
                                     std::uint64_t seed, Activation activation) {
  if (layers.size() < 2) throw ArgumentError("make_mlp: need at least two layer sizes");
  const std::size_t dim = layers.front();
  const std::size_t classes = layers.back();
  RngStream rng(seed, 0x424C4F42ULL);
  std::vector<double> centers(classes * dim);
  for (double& c : centers) c = 2.0 * rng.normal();
  Dataset data;
  data.rows = samples;
  data.cols = dim;
  data.features.resize(samples * dim);
  data.labels.resize(samples);
  for (std::size_t r = 0; r < samples; ++r) {
    const std::size_t label = r % classes;
    data.labels[r] = static_cast<double>(label);
    for (std::size_t c = 0; c < dim; ++c) {
      data.features[r * dim + c] = centers[label * dim + c] + rng.normal();
    }
  }
  return std::make_shared<MlpProblem>(std::move(layers), activation, std::move(data), seed + 1);
}

// ---------------------------------------------------------------------------

std::vector<Shard> make_shards(const Problem& problem, std::size_t workers, DataMode mode) {
  if (workers == 0) throw ArgumentError("make_shards: need at least one worker");
  const std::size_t total = problem.num_samples();
  // Streaming problems have no finite dataset; ids only label the draws.
  const std::size_t universe = total == 0 ? (std::size_t{1} << 31) : total;
  std::vector<Shard> shards(workers);
  if (mode == DataMode::kIid) {
    for (auto& s : shards) s = {0, universe};
    return shards;
  }
  if (universe < workers) throw ArgumentError("make_shards: fewer samples than workers");
  const std::size_t base = universe / workers;
  const std::size_t extra = universe % workers;
  std::size_t begin = 0;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t len = base + (w < extra ? 1 : 0);
    shards[w] = {begin, begin + len};
    begin += len;
  }
  return shards;
}

MiniBatch sample_minibatch(const Shard& shard, std::size_t batch_size, RngStream& rng) {
  if (batch_size == 0) throw ArgumentError("sample_minibatch: batch size must be >= 1");
  if (shard.end <= shard.begin) throw ArgumentError("sample_minibatch: empty shard");
  MiniBatch batch;
  batch.indices.resize(batch_size);
  const std::size_t span = shard.end - shard.begin;
  for (auto& idx : batch.indices) idx = shard.begin + rng.uniform_below(span);
  return batch;
}

double finite_difference_check(const Problem& problem, const DenseVector& theta, double h) {
  if (!(h > 0.0)) throw ArgumentError("finite_difference_check: h must be > 0");
  const DenseVector grad = problem.full_gradient(theta);
  DenseVector probe = theta;
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = problem.loss(probe);
    probe[i] = orig - h;
    const double down = problem.loss(probe);
    probe[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite_difference_check: non-finite loss at coordinate " +
                         std::to_string(i));
    }
    const double fd = (up - down) / (2.0 * h);
    const double scale = std::max({1.0, std::fabs(fd), std::fabs(grad[i])});
    worst = std::max(worst, std::fabs(fd - grad[i]) / scale);
  }
  return worst;
}

ProblemConstants estimate_constants(const Problem& problem,
                                    std::span<const DenseVector> trajectory,
                                    const ConstantProbe& probe, RngStream& rng) {
  if (trajectory.empty()) throw ArgumentError("estimate_constants: empty trajectory");
  if (probe.probes == 0) throw ArgumentError("estimate_constants: need at least one probe");
  ProblemConstants out;
  const auto shards = make_shards(problem, 1, DataMode::kIid);
  double max_var = 0.0;
  std::vector<DenseVector> full;
  full.reserve(trajectory.size());
  for (const auto& theta : trajectory) {
    full.push_back(problem.full_gradient(theta));
    double var = 0.0;
    for (std::size_t s = 0; s < probe.probes; ++s) {
      const MiniBatch batch = sample_minibatch(shards[0], probe.batch_size, rng);
      const DenseVector g = problem.stochastic_gradient(theta, batch, rng);
      out.G = std::max(out.G, g.norm());
      var += (g - full.back()).squared_norm();
    }
    max_var = std::max(max_var, var / static_cast<double>(probe.probes));
  }
  out.sigma = std::sqrt(max_var);
  if (auto L = problem.lipschitz_constant()) {
    out.L = *L;
  } else {
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
      const double step = (trajectory[i] - trajectory[i - 1]).norm();
      if (step == 0.0) continue;
      out.L = std::max(out.L, (full[i] - full[i - 1]).norm() / step);
    }
  }
  return out;
}

}  // namespace scalecom::problems
