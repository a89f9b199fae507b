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
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace scalecom {

// Error hierarchy shared by every module.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameter outside its documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Vector lengths disagree.
class DimensionError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

// Quantity is mathematically undefined for the input (zero norm, constant
// ranks, ...).
class UndefinedError : public Error {
 public:
  using Error::Error;
};

// Non-finite value encountered in a numeric routine.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Requested regime violates a feasibility condition of the theory.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

using Index = std::uint32_t;

// Largest supported model dimension.
inline constexpr std::size_t kMaxDimension = std::size_t{1} << 31;

/// Flat, fixed-length vector of doubles. Holds parameters, gradients and
/// error-feedback memories. The length is fixed at construction; entries are
/// mutable in place.
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t dim, double fill = 0.0);
  explicit DenseVector(std::vector<double> values);
  DenseVector(std::initializer_list<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  double dot(const DenseVector& other) const;
  double squared_norm() const noexcept;
  double norm() const noexcept;
  bool all_finite() const noexcept;

  // this += scale * other
  void axpy(double scale, const DenseVector& other);
  void scale(double factor) noexcept;

  friend bool operator==(const DenseVector&, const DenseVector&) = default;

 private:
  std::vector<double> values_;
};

DenseVector operator+(const DenseVector& a, const DenseVector& b);
DenseVector operator-(const DenseVector& a, const DenseVector& b);
DenseVector operator*(double c, const DenseVector& a);

// Throws DimensionError naming `what` if the sizes differ.
void require_same_size(const DenseVector& a, const DenseVector& b, const char* what);

// Throws NumericError if any entry is NaN or infinite.
void require_finite(const DenseVector& v, const char* what);

/// Sorted set of distinct positions into a vector of dimension `dim`.
class IndexSet {
 public:
  IndexSet() = default;
  // Validates that `indices` is strictly increasing and below `dim`.
  IndexSet(std::vector<Index> indices, std::size_t dim);

  // Sorts and validates; duplicates are rejected.
  static IndexSet from_unsorted(std::vector<Index> indices, std::size_t dim);
  static IndexSet full(std::size_t dim);

  std::size_t size() const noexcept { return indices_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(Index i) const noexcept;

  std::span<const Index> indices() const noexcept { return indices_; }
  Index operator[](std::size_t i) const noexcept { return indices_[i]; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<Index> indices_;
  std::size_t dim_ = 0;
};

/// Values aligned index-for-index with a support set.
class SparseGradient {
 public:
  SparseGradient() = default;
  SparseGradient(IndexSet support, std::vector<double> values);

  const IndexSet& support() const noexcept { return support_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  std::size_t dim() const noexcept { return support_.dim(); }
  std::size_t nnz() const noexcept { return values_.size(); }

 private:
  IndexSet support_;
  std::vector<double> values_;
};

/// Deterministic random stream keyed by (seed, stream id). All draws are
/// derived from raw 64-bit engine output so that sequences do not depend on
/// the standard library's distribution implementations.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t next_u64() noexcept;
  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  // Uniform integer in [0, bound); bound > 0.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept;
  double normal() noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t state_[4];
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

DenseVector densify(const SparseGradient& s);

// Element-wise mean accumulated in list order.
DenseVector mean_of(std::span<const DenseVector> vs);

// 1 - x.y / (|x| |y|), clamped to [0, 2].
double cosine_distance(const DenseVector& x, const DenseVector& y);

}  // namespace scalecom
