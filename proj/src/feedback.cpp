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

#include "scalecom/feedback.hpp"

#include <string>

namespace scalecom::feedback {

ErrorFeedbackMemory::ErrorFeedbackMemory(std::size_t dim, double beta) : m_(dim), beta_(beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw ArgumentError("ErrorFeedbackMemory: beta must lie in (0, 1], got " + std::to_string(beta));
  }
}

void update_memory(ErrorFeedbackMemory& mem, const DenseVector& grad, const DenseVector& g) {
  DenseVector& m = mem.memory();
  require_same_size(m, grad, "update_memory");
  require_same_size(m, g, "update_memory");
  const double beta = mem.beta();
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = (1.0 - beta) * m[i] + beta * (m[i] + grad[i] - g[i]);
  }
}

void update_memory_simplified(ErrorFeedbackMemory& mem, const DenseVector& grad,
                              const DenseVector& g) {
  DenseVector& m = mem.memory();
  require_same_size(m, grad, "update_memory");
  require_same_size(m, g, "update_memory");
  const double beta = mem.beta();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] += beta * (grad[i] - g[i]);
}

DenseVector residual_input(const ErrorFeedbackMemory& mem, const DenseVector& grad) {
  require_same_size(mem.memory(), grad, "residual_input");
  return mem.memory() + grad;
}

}  // namespace scalecom::feedback
