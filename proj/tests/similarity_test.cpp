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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <vector>

namespace deferteach {
namespace {

TeachingPool line_pool(const std::vector<double>& xs) {
  TeachingPool pool;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    PoolPoint p;
    p.id = static_cast<std::int64_t>(i);
    p.embedding = {xs[i]};
    pool.points.push_back(p);
  }
  return pool;
}

TeachingPool random_pool(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  TeachingPool pool;
  for (std::size_t i = 0; i < n; ++i) {
    PoolPoint p;
    p.id = static_cast<std::int64_t>(i);
    for (std::size_t d = 0; d < dim; ++d) p.embedding.push_back(g(rng));
    pool.points.push_back(p);
  }
  return pool;
}

TEST(RbfKernel, SpecExamples) {
  const std::vector<double> a = {0.0}, b = {2.0};
  EXPECT_DOUBLE_EQ(rbf_kernel(a, a, 1.0), 1.0);
  EXPECT_NEAR(rbf_kernel(a, b, 1.0), 0.0183156, 1e-7);
  const std::vector<double> c = {0.0, 0.0}, d = {1.0, 1.0};
  EXPECT_NEAR(rbf_kernel(c, d, 2.0), 0.3678794, 1e-7);
}

TEST(RbfKernel, Errors) {
  const std::vector<double> a = {0.0}, b = {1.0, 2.0};
  const std::vector<double> nan = {std::numeric_limits<double>::quiet_NaN()};
  EXPECT_THROW(rbf_kernel(a, b, 1.0), ValidationError);
  EXPECT_THROW(rbf_kernel(a, nan, 1.0), ValidationError);
  EXPECT_THROW(rbf_kernel(a, a, 0.0), ValidationError);
}

TEST(CosineKernel, MapsToUnitInterval) {
  const std::vector<double> a = {1.0, 0.0}, b = {-1.0, 0.0}, c = {0.0, 3.0};
  EXPECT_DOUBLE_EQ(cosine_kernel(a, a), 1.0);
  EXPECT_DOUBLE_EQ(cosine_kernel(a, b), 0.0);
  EXPECT_NEAR(cosine_kernel(a, c), 0.5, 1e-15);
  EXPECT_THROW(cosine_kernel(a, std::vector<double>{0.0, 0.0}), ValidationError);
}

TEST(MakeKernel, Registry) {
  const std::vector<double> a = {0.0}, b = {1.0};
  EXPECT_DOUBLE_EQ(make_kernel({"rbf", 1.0})(a, b), std::exp(-1.0));
  EXPECT_DOUBLE_EQ(make_kernel({"rbf", 4.0})(a, b), std::exp(-0.25));
  EXPECT_THROW(make_kernel({"laplace", 1.0}), ValidationError);
  EXPECT_THROW(make_kernel({"rbf", -1.0}), ValidationError);
}

TEST(BuildSimilarity, SinglePoint) {
  const SimilarityMatrix m = build_similarity_matrix(line_pool({3.0}), {});
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m(0, 0), 1.0);
}

TEST(BuildSimilarity, IdenticalPoints) {
  const SimilarityMatrix m = build_similarity_matrix(line_pool({1.5, 1.5}), {});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(m(i, j), 1.0);
}

TEST(BuildSimilarity, CollinearThreePoints) {
  const SimilarityMatrix m = build_similarity_matrix(line_pool({0, 1, 2}), {});
  // Independent evaluation per pair.
  auto k = [](double x, double y) { return std::exp(-(x - y) * (x - y)); };
  EXPECT_DOUBLE_EQ(m(0, 1), k(0, 1));
  EXPECT_DOUBLE_EQ(m(0, 2), k(0, 2));
  EXPECT_DOUBLE_EQ(m(1, 2), k(1, 2));
  EXPECT_NEAR(m(0, 1), 0.36787944117144233, 1e-15);
  EXPECT_NEAR(m(0, 2), 0.018315638888734179, 1e-15);
}

TEST(BuildSimilarity, EmptyPoolRejected) {
  EXPECT_THROW(build_similarity_matrix(TeachingPool{}, {}), ValidationError);
}

TEST(SimilarityMatrix, SubmatrixReindexes) {
  const SimilarityMatrix m = build_similarity_matrix(line_pool({0, 1, 2, 3}), {});
  const std::vector<PointIndex> pick = {3, 1};
  const SimilarityMatrix s = m.submatrix(pick);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s(0, 1), m(3, 1));
  EXPECT_EQ(s(0, 0), 1.0);
}

TEST(SimilarityMatrix, SinglePrecisionAgrees) {
  const TeachingPool pool = random_pool(30, 3, 8);
  const SimilarityMatrix d = build_similarity_matrix(pool, {}, Precision::kDouble);
  const SimilarityMatrix f = build_similarity_matrix(pool, {}, Precision::kSingle);
  EXPECT_EQ(f.precision(), Precision::kSingle);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = 0; j < pool.size(); ++j) {
      EXPECT_NEAR(f(i, j), d(i, j), 1e-7);
      EXPECT_EQ(f(i, j), f(j, i));
    }
    EXPECT_EQ(f(i, i), 1.0);
  }
}

TEST(SimilarityCache, RoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "deferteach_sim.bin";
  for (Precision p : {Precision::kDouble, Precision::kSingle}) {
    const SimilarityMatrix m =
        build_similarity_matrix(random_pool(17, 4, 2), {"rbf", 2.5}, p);
    save_similarity_cache(path, m);
    const SimilarityMatrix back = load_similarity_cache(path);
    ASSERT_EQ(back.size(), m.size());
    EXPECT_EQ(back.kernel(), m.kernel());
    EXPECT_EQ(back.precision(), p);
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j) EXPECT_EQ(back(i, j), m(i, j));
  }
  std::filesystem::remove(path);
  EXPECT_THROW(load_similarity_cache(path), ValidationError);
}

// Symmetry, unit diagonal and range over random pools and both kernels.
TEST(SimilarityProperties, SymmetricUnitDiagonalInRange) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TeachingPool pool = random_pool(5 + seed, 1 + seed % 5, seed);
    for (const KernelDescriptor& k :
         {KernelDescriptor{"rbf", 0.5 + static_cast<double>(seed)},
          KernelDescriptor{"cosine", 1.0}}) {
      const SimilarityMatrix m = build_similarity_matrix(pool, k);
      for (std::size_t i = 0; i < m.size(); ++i) {
        EXPECT_EQ(m(i, i), 1.0);
        for (std::size_t j = 0; j < m.size(); ++j) {
          EXPECT_EQ(m(i, j), m(j, i));
          EXPECT_GE(m(i, j), 0.0);
          EXPECT_LE(m(i, j), 1.0);
        }
      }
    }
  }
}

// RBF similarity strictly decreases along pairs sorted by distance.
TEST(SimilarityProperties, RbfMonotoneInDistance) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<std::pair<double, double>> rows;
  for (int k = 0; k < 200; ++k) {
    const std::vector<double> a = {u(rng), u(rng)}, b = {u(rng), u(rng)};
    const double dist = std::hypot(a[0] - b[0], a[1] - b[1]);
    rows.emplace_back(dist, rbf_kernel(a, b, 1.5));
  }
  std::sort(rows.begin(), rows.end());
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k].first > rows[k - 1].first) {
      EXPECT_LT(rows[k].second, rows[k - 1].second);
    }
  }
}

}  // namespace
}  // namespace deferteach
