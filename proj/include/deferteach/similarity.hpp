// Copyright 2026 The Authors.
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

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "deferteach/dataset.hpp"

namespace deferteach {

struct KernelDescriptor {
  std::string name = "rbf";
  double bandwidth = 1.0;

  bool operator==(const KernelDescriptor&) const = default;
};

// exp(-|u - v|^2 / bandwidth).
double rbf_kernel(std::span<const double> u, std::span<const double> v,
                  double bandwidth);

// Cosine similarity mapped from [-1, 1] onto [0, 1].
double cosine_kernel(std::span<const double> u, std::span<const double> v);

using KernelFn = std::function<double(std::span<const double>,
                                      std::span<const double>)>;

// Resolves a descriptor against the registry ("rbf", "cosine").
// Throws ValidationError for unknown names or invalid parameters.
KernelFn make_kernel(const KernelDescriptor& kernel);

enum class Precision { kDouble, kSingle };

// Dense symmetric n x n matrix of similarities in [0, 1] with a unit diagonal.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t n, KernelDescriptor kernel,
                   Precision precision = Precision::kDouble);

  std::size_t size() const { return n_; }
  const KernelDescriptor& kernel() const { return kernel_; }
  Precision precision() const { return precision_; }

  double operator()(std::size_t i, std::size_t j) const {
    const std::size_t k = i * n_ + j;
    return precision_ == Precision::kDouble ? dvals_[k]
                                            : static_cast<double>(fvals_[k]);
  }

  // Writes both (i, j) and (j, i).
  void set_symmetric(std::size_t i, std::size_t j, double value);

  // Similarities among `indices`, re-indexed 0..k-1 in the given order.
  SimilarityMatrix submatrix(std::span<const PointIndex> indices) const;

 private:
  std::size_t n_ = 0;
  KernelDescriptor kernel_;
  Precision precision_ = Precision::kDouble;
  std::vector<double> dvals_;
  std::vector<float> fvals_;
};

SimilarityMatrix build_similarity_matrix(const TeachingPool& pool,
                                         const KernelDescriptor& kernel,
                                         Precision precision = Precision::kDouble);

// Binary cache: magic "DTSM", u32 version, u64 n, u8 precision, u32 name
// length, name bytes, f64 bandwidth, then the row-major payload. Host byte
// order.
void save_similarity_cache(const std::filesystem::path& path,
                           const SimilarityMatrix& matrix);
SimilarityMatrix load_similarity_cache(const std::filesystem::path& path);

}  // namespace deferteach
