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

#include "deferteach/similarity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

namespace deferteach {

namespace {

void check_inputs(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ValidationError("kernel dimension mismatch: " +
                          std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()));
  }
  auto finite = [](double x) { return std::isfinite(x); };
  if (!std::all_of(u.begin(), u.end(), finite) ||
      !std::all_of(v.begin(), v.end(), finite)) {
    throw ValidationError("kernel input is not finite");
  }
}

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

double rbf_kernel(std::span<const double> u, std::span<const double> v,
                  double bandwidth) {
  check_inputs(u, v);
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ValidationError("rbf bandwidth must be positive");
  }
  double sq = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double d = u[k] - v[k];
    sq += d * d;
  }
  return std::exp(-sq / bandwidth);
}

double cosine_kernel(std::span<const double> u, std::span<const double> v) {
  check_inputs(u, v);
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dot += u[k] * v[k];
    nu += u[k] * u[k];
    nv += v[k] * v[k];
  }
  if (nu == 0.0 || nv == 0.0) {
    throw ValidationError("cosine kernel undefined for a zero vector");
  }
  return clamp_unit(0.5 * (1.0 + dot / std::sqrt(nu * nv)));
}

KernelFn make_kernel(const KernelDescriptor& kernel) {
  using Factory = std::function<KernelFn(const KernelDescriptor&)>;
  static const std::map<std::string, Factory> registry = {
      {"rbf",
       [](const KernelDescriptor& k) -> KernelFn {
         if (!(k.bandwidth > 0.0) || !std::isfinite(k.bandwidth)) {
           throw ValidationError("rbf bandwidth must be positive");
         }
         const double bw = k.bandwidth;
         return [bw](std::span<const double> u, std::span<const double> v) {
           return rbf_kernel(u, v, bw);
         };
       }},
      {"cosine",
       [](const KernelDescriptor&) -> KernelFn {
         return [](std::span<const double> u, std::span<const double> v) {
           return cosine_kernel(u, v);
         };
       }},
  };
  auto it = registry.find(kernel.name);
  if (it == registry.end()) {
    throw ValidationError("unknown kernel \"" + kernel.name + "\"");
  }
  return it->second(kernel);
}

SimilarityMatrix::SimilarityMatrix(std::size_t n, KernelDescriptor kernel,
                                   Precision precision)
    : n_(n), kernel_(std::move(kernel)), precision_(precision) {
  if (precision_ == Precision::kDouble) {
    dvals_.assign(n * n, 0.0);
  } else {
    fvals_.assign(n * n, 0.0f);
  }
  for (std::size_t i = 0; i < n; ++i) set_symmetric(i, i, 1.0);
}

void SimilarityMatrix::set_symmetric(std::size_t i, std::size_t j,
                                     double value) {
  if (precision_ == Precision::kDouble) {
    dvals_[i * n_ + j] = value;
    dvals_[j * n_ + i] = value;
  } else {
    fvals_[i * n_ + j] = static_cast<float>(value);
    fvals_[j * n_ + i] = static_cast<float>(value);
  }
}

SimilarityMatrix SimilarityMatrix::submatrix(
    std::span<const PointIndex> indices) const {
  SimilarityMatrix out(indices.size(), kernel_, precision_);
  for (std::size_t a = 0; a < indices.size(); ++a) {
    for (std::size_t b = a + 1; b < indices.size(); ++b) {
      out.set_symmetric(a, b, (*this)(indices[a], indices[b]));
    }
  }
  return out;
}

SimilarityMatrix build_similarity_matrix(const TeachingPool& pool,
                                         const KernelDescriptor& kernel,
                                         Precision precision) {
  if (pool.empty()) throw ValidationError("similarity of an empty pool");
  const KernelFn fn = make_kernel(kernel);
  const std::size_t n = pool.size();
  SimilarityMatrix m(n, kernel, precision);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& zi = pool.points[i].embedding;
    for (std::size_t j = i + 1; j < n; ++j) {
      m.set_symmetric(i, j, clamp_unit(fn(zi, pool.points[j].embedding)));
    }
  }
  return m;
}

namespace {

constexpr std::array<char, 4> kMagic = {'D', 'T', 'S', 'M'};
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T take(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ValidationError("similarity cache truncated");
  return value;
}

}  // namespace

void save_similarity_cache(const std::filesystem::path& path,
                           const SimilarityMatrix& matrix) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put(out, kCacheVersion);
  put(out, static_cast<std::uint64_t>(matrix.size()));
  put(out, static_cast<std::uint8_t>(
               matrix.precision() == Precision::kDouble ? 0 : 1));
  const std::string& name = matrix.kernel().name;
  put(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put(out, matrix.kernel().bandwidth);
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    for (std::size_t j = 0; j < matrix.size(); ++j) {
      if (matrix.precision() == Precision::kDouble) {
        put(out, matrix(i, j));
      } else {
        put(out, static_cast<float>(matrix(i, j)));
      }
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

SimilarityMatrix load_similarity_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open similarity cache " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ValidationError("not a similarity cache");
  if (take<std::uint32_t>(in) != kCacheVersion) {
    throw ValidationError("unsupported similarity cache version");
  }
  const auto n = static_cast<std::size_t>(take<std::uint64_t>(in));
  const auto prec = take<std::uint8_t>(in);
  if (prec > 1) throw ValidationError("bad precision tag in similarity cache");
  const auto name_len = take<std::uint32_t>(in);
  if (name_len > 256) throw ValidationError("bad kernel name in similarity cache");
  KernelDescriptor kernel;
  kernel.name.resize(name_len);
  in.read(kernel.name.data(), name_len);
  kernel.bandwidth = take<double>(in);

  const Precision precision = prec == 0 ? Precision::kDouble : Precision::kSingle;
  SimilarityMatrix m(n, kernel, precision);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = precision == Precision::kDouble
                           ? take<double>(in)
                           : static_cast<double>(take<float>(in));
      if (j > i) m.set_symmetric(i, j, v);
    }
  }
  return m;
}

}  // namespace deferteach
