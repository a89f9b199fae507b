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

#include "scalecom/core.hpp"

namespace scalecom::feedback {

/// Per-worker residual memory with a discounting (low-pass) factor beta in
/// (0, 1]. Starts at zero; beta = 1 is classical error feedback.
class ErrorFeedbackMemory {
 public:
  ErrorFeedbackMemory(std::size_t dim, double beta);

  const DenseVector& memory() const noexcept { return m_; }
  DenseVector& memory() noexcept { return m_; }
  double beta() const noexcept { return beta_; }
  std::size_t dim() const noexcept { return m_.size(); }

 private:
  DenseVector m_;
  double beta_;
};

// m' = (1 - beta) m + beta (m + grad - g)
void update_memory(ErrorFeedbackMemory& mem, const DenseVector& grad, const DenseVector& g);

// m' = m + beta (grad - g); same update, simplified form.
void update_memory_simplified(ErrorFeedbackMemory& mem, const DenseVector& grad,
                              const DenseVector& g);

// m + grad, the vector handed to the compressor.
DenseVector residual_input(const ErrorFeedbackMemory& mem, const DenseVector& grad);

}  // namespace scalecom::feedback
