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

#include "deferteach/dataset.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace deferteach {
namespace {

TeachingPool parse(const std::string& text, LoadOptions options = {}) {
  std::istringstream in(text);
  return parse_pool(in, options);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

TeachingPool make_pool(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 10.0);
  TeachingPool pool;
  for (std::size_t i = 0; i < n; ++i) {
    PoolPoint p;
    p.id = static_cast<std::int64_t>(i * 7 + 3);
    p.embedding = {g(rng), g(rng), g(rng)};
    p.human_err = u(rng);
    p.ai_err = u(rng);
    if (i % 2 == 0) p.cluster = static_cast<std::int64_t>(i % 5);
    if (i % 3 == 0) p.label = static_cast<std::int64_t>(i % 4);
    if (i % 4 != 1) p.prior_reject = (i % 2 == 1);
    if (i % 5 == 0) p.message = std::vector<double>{u(rng), -u(rng)};
    pool.points.push_back(std::move(p));
  }
  return pool;
}

TEST(LoadPool, ThreeValidRecords) {
  const TeachingPool pool = parse(
      R"({"id": 1, "embedding": [0.0, 1.0], "human_err": 0.1, "ai_err": 0.2}
{"id": 2, "embedding": [1.0, 1.0], "human_err": 0.3, "ai_err": 0.4}

{"id": 3, "embedding": [2.0, 0.5], "human_err": 0.5, "ai_err": 0.6}
)");
  EXPECT_EQ(pool.size(), 3u);
  EXPECT_EQ(pool.dim(), 2u);
  EXPECT_FALSE(pool.split.has_value());
  EXPECT_DOUBLE_EQ(pool.points[2].ai_err, 0.6);
}

TEST(LoadPool, MissingEmbeddingNamesLine) {
  const std::string text =
      "{\"id\": 1, \"embedding\": [0.0], \"human_err\": 0.1, \"ai_err\": 0.2}\n"
      "{\"id\": 2, \"human_err\": 0.1, \"ai_err\": 0.2}\n";
  try {
    parse(text);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("embedding"), std::string::npos);
  }
}

TEST(LoadPool, HumanErrOutOfRange) {
  EXPECT_NE(error_of(R"({"id": 1, "embedding": [0.0], "human_err": 1.2, "ai_err": 0.2})")
                .find("human_err out of range"),
            std::string::npos);
}

TEST(LoadPool, RejectsMalformedAndInconsistentRecords) {
  EXPECT_NE(error_of("{\"id\": 1, \"embedding\": [0.0], \"human_err\": 0.1,\n").find("line 1"),
            std::string::npos);
  EXPECT_NE(error_of("{\"id\": 1, \"embedding\": [0.0], \"human_err\": 0.1, \"ai_err\": 0.2}\n"
                     "{\"id\": 2, \"embedding\": [0.0, 1.0], \"human_err\": 0.1, \"ai_err\": 0.2}")
                .find("dimension mismatch"),
            std::string::npos);
  EXPECT_NE(error_of("{\"id\": 1, \"embedding\": [0.0], \"human_err\": 0.1, \"ai_err\": 0.2}\n"
                     "{\"id\": 1, \"embedding\": [1.0], \"human_err\": 0.1, \"ai_err\": 0.2}")
                .find("duplicate id"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"id": 1, "embedding": [0.0], "human_err": 0.1, "ai_err": -0.01})")
                .find("ai_err out of range"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"id": 1, "embedding": [], "human_err": 0.1, "ai_err": 0.1})"),
            "");
}

TEST(LoadPool, UnknownKeysStrictOrLenient) {
  const std::string text =
      R"({"id": 1, "embedding": [0.0], "human_err": 0.1, "ai_err": 0.2, "colour": "red"})";
  EXPECT_NE(error_of(text).find("unknown key"), std::string::npos);
  const TeachingPool pool = parse(text, LoadOptions{false});
  EXPECT_EQ(pool.size(), 1u);
}

TEST(LoadPool, PriorRejectAcceptsBoolOrBinaryInteger) {
  const TeachingPool pool = parse(
      R"({"id": 1, "embedding": [0.0], "human_err": 0.1, "ai_err": 0.2, "prior_reject": true}
{"id": 2, "embedding": [1.0], "human_err": 0.1, "ai_err": 0.2, "prior_reject": 0})");
  EXPECT_EQ(pool.points[0].prior_reject, std::optional<bool>(true));
  EXPECT_EQ(pool.points[1].prior_reject, std::optional<bool>(false));
  EXPECT_TRUE(pool.has_prior_decisions());
  EXPECT_NE(error_of(R"({"id": 1, "embedding": [0.0], "human_err": 0.1, "ai_err": 0.2, "prior_reject": 2})"),
            "");
}

TEST(SavePool, RoundTripIsExact) {
  TeachingPool pool = make_pool(40, 11);
  pool.points[3].embedding[0] = 0.1 + 0.2;
  pool.points[4].human_err = std::nextafter(1.0, 0.0);
  pool.points[5].ai_err = std::numeric_limits<double>::denorm_min();
  pool.points[6].embedding[1] = -1e-300;
  std::stringstream buffer;
  write_pool(buffer, pool);
  const TeachingPool back = parse_pool(buffer);
  EXPECT_EQ(back, pool);
}

TEST(SavePool, FileRoundTrip) {
  const TeachingPool pool = make_pool(12, 5);
  const auto path = std::filesystem::temp_directory_path() / "deferteach_pool_rt.jsonl";
  save_pool(path, pool);
  EXPECT_EQ(load_pool(path), pool);
  std::filesystem::remove(path);
  EXPECT_THROW(load_pool(path), ValidationError);
}

TEST(SplitPool, SizesAndDisjointness) {
  const TeachingPool pool = make_pool(10, 1);
  const TeachingPool split = split_pool(pool, 0.8, 1);
  ASSERT_TRUE(split.split.has_value());
  EXPECT_EQ(split.split->teach.size(), 8u);
  EXPECT_EQ(split.split->validation.size(), 2u);
  std::set<PointIndex> all(split.split->teach.begin(), split.split->teach.end());
  all.insert(split.split->validation.begin(), split.split->validation.end());
  EXPECT_EQ(all.size(), 10u);
  EXPECT_EQ(split.teach_indices(), split.split->teach);
  EXPECT_EQ(split.eval_indices(), split.split->validation);
  EXPECT_NO_THROW(validate_pool(split));
}

TEST(SplitPool, DeterministicPerSeed) {
  const TeachingPool pool = make_pool(10, 1);
  EXPECT_EQ(split_pool(pool, 0.8, 1), split_pool(pool, 0.8, 1));
  EXPECT_NE(split_pool(pool, 0.8, 1).split, split_pool(pool, 0.8, 2).split);
}

TEST(SplitPool, TeachSideGetsCeiling) {
  const TeachingPool pool = make_pool(10, 2);
  EXPECT_EQ(split_pool(pool, 0.7, 3).split->teach.size(), 7u);
  EXPECT_EQ(split_pool(pool, 0.75, 3).split->teach.size(), 8u);
  EXPECT_EQ(split_pool(pool, 0.01, 3).split->teach.size(), 1u);
  EXPECT_EQ(split_pool(pool, 0.99, 3).split->teach.size(), 10u);
}

TEST(SplitPool, RejectsBadFractionAndEmptyPool) {
  const TeachingPool pool = make_pool(4, 2);
  EXPECT_THROW(split_pool(pool, 0.0, 1), ValidationError);
  EXPECT_THROW(split_pool(pool, 1.0, 1), ValidationError);
  EXPECT_THROW(split_pool(TeachingPool{}, 0.5, 1), ValidationError);
}

TEST(ValidatePool, SplitMustPartition) {
  TeachingPool pool = make_pool(4, 3);
  pool.split = PoolSplit{{0, 1}, {1, 2, 3}};
  EXPECT_THROW(validate_pool(pool), ValidationError);
  pool.split = PoolSplit{{0, 1}, {2}};
  EXPECT_THROW(validate_pool(pool), ValidationError);
  pool.split = PoolSplit{{0, 3}, {2, 1}};
  EXPECT_NO_THROW(validate_pool(pool));
}

TEST(TeachingPool, SubsetKeepsOrderAndDropsSplit) {
  TeachingPool pool = split_pool(make_pool(6, 4), 0.5, 9);
  const std::vector<PointIndex> pick = {4, 0, 2};
  const TeachingPool sub = pool.subset(pick);
  ASSERT_EQ(sub.size(), 3u);
  EXPECT_EQ(sub.points[0], pool.points[4]);
  EXPECT_EQ(sub.points[2], pool.points[2]);
  EXPECT_FALSE(sub.split.has_value());
}

// Round trip and split invariants over many random pools.
TEST(DatasetProperties, RandomPools) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const TeachingPool pool = make_pool(1 + seed * 3, seed);
    std::stringstream buffer;
    write_pool(buffer, pool);
    EXPECT_EQ(parse_pool(buffer), pool);
    const double fraction = 0.05 + 0.9 * static_cast<double>(seed) / 25.0;
    const TeachingPool split = split_pool(pool, fraction, seed + 100);
    EXPECT_NO_THROW(validate_pool(split));
    EXPECT_EQ(split.split->teach.size(),
              std::min(pool.size(), static_cast<std::size_t>(std::ceil(
                                        fraction * static_cast<double>(pool.size()) - 1e-9))));
  }
}

}  // namespace
}  // namespace deferteach
