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

#include "scalecom/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace scalecom {

DenseVector::DenseVector(std::size_t dim, double fill) : values_(dim, fill) {}

DenseVector::DenseVector(std::vector<double> values) : values_(std::move(values)) {}

DenseVector::DenseVector(std::initializer_list<double> values) : values_(values) {}

double DenseVector::dot(const DenseVector& other) const {
  require_same_size(*this, other, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) acc += values_[i] * other.values_[i];
  return acc;
}

double DenseVector::squared_norm() const noexcept {
  double acc = 0.0;
  for (double v : values_) acc += v * v;
  return acc;
}

double DenseVector::norm() const noexcept { return std::sqrt(squared_norm()); }

bool DenseVector::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void DenseVector::axpy(double scale, const DenseVector& other) {
  require_same_size(*this, other, "axpy");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += scale * other.values_[i];
}

void DenseVector::scale(double factor) noexcept {
  for (double& v : values_) v *= factor;
}

DenseVector operator+(const DenseVector& a, const DenseVector& b) {
  require_same_size(a, b, "operator+");
  DenseVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

DenseVector operator-(const DenseVector& a, const DenseVector& b) {
  require_same_size(a, b, "operator-");
  DenseVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

DenseVector operator*(double c, const DenseVector& a) {
  DenseVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
  return out;
}

void require_same_size(const DenseVector& a, const DenseVector& b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
  }
}

void require_finite(const DenseVector& v, const char* what) {
  if (!v.all_finite()) throw NumericError(std::string(what) + ": non-finite entry");
}

// ---------------------------------------------------------------------------

IndexSet::IndexSet(std::vector<Index> indices, std::size_t dim)
    : indices_(std::move(indices)), dim_(dim) {
  if (dim_ > kMaxDimension) throw ArgumentError("IndexSet: dimension exceeds 2^31");
  if (indices_.size() > dim_) throw ArgumentError("IndexSet: more indices than dimension");
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] >= dim_) {
      throw ArgumentError("IndexSet: index " + std::to_string(indices_[i]) +
                          " out of range for dimension " + std::to_string(dim_));
    }
    if (i > 0 && indices_[i] <= indices_[i - 1]) {
      throw ArgumentError("IndexSet: indices must be strictly increasing");
    }
  }
}

IndexSet IndexSet::from_unsorted(std::vector<Index> indices, std::size_t dim) {
  std::sort(indices.begin(), indices.end());
  return IndexSet(std::move(indices), dim);
}

IndexSet IndexSet::full(std::size_t dim) {
  std::vector<Index> all(dim);
  for (std::size_t i = 0; i < dim; ++i) all[i] = static_cast<Index>(i);
  return IndexSet(std::move(all), dim);
}

bool IndexSet::contains(Index i) const noexcept {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

SparseGradient::SparseGradient(IndexSet support, std::vector<double> values)
    : support_(std::move(support)), values_(std::move(values)) {
  if (values_.size() != support_.size()) {
    throw DimensionError("SparseGradient: values not aligned with support");
  }
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  std::uint64_t mix = seed;
  std::uint64_t key = splitmix64(mix) ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
  for (auto& s : state_) s = splitmix64(key);
}

// xoshiro256**
std::uint64_t RngStream::next_u64() noexcept {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_below(std::uint64_t bound) noexcept {
  // Rejection on the top of the range keeps the draw exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

double RngStream::normal() noexcept {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(angle);
  has_cached_normal_ = true;
  return r * std::cos(angle);
}

// ---------------------------------------------------------------------------

DenseVector densify(const SparseGradient& s) {
  DenseVector out(s.dim());
  const auto idx = s.support().indices();
  const auto vals = s.values();
  for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = vals[i];
  return out;
}

DenseVector mean_of(std::span<const DenseVector> vs) {
  if (vs.empty()) throw ArgumentError("mean_of: empty list");
  DenseVector acc(vs.front().size());
  for (const auto& v : vs) {
    require_same_size(acc, v, "mean_of");
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
  }
  const double n = static_cast<double>(vs.size());
  for (double& a : acc) a /= n;
  return acc;
}

double cosine_distance(const DenseVector& x, const DenseVector& y) {
  require_same_size(x, y, "cosine_distance");
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) throw UndefinedError("cosine_distance: zero-norm input");
  const double d = 1.0 - x.dot(y) / (nx * ny);
  return std::clamp(d, 0.0, 2.0);
}

}  // namespace scalecom
