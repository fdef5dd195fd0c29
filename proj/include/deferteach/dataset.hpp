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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace deferteach {

using PointIndex = std::size_t;

// Raised for malformed or invariant-violating input. `line()` is the 1-based
// input line when the error comes from a pool file, 0 otherwise.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// One example of the teaching pool. The embedding serves as both the AI's
// input and the human's view of it; the two error rates are the expected
// losses of the human and the AI at this point.
struct PoolPoint {
  std::int64_t id = 0;
  std::vector<double> embedding;
  std::optional<std::int64_t> label;
  double human_err = 0.0;
  double ai_err = 0.0;
  std::optional<std::int64_t> cluster;
  std::optional<bool> prior_reject;
  std::optional<std::vector<double>> message;

  bool operator==(const PoolPoint&) const = default;
};

struct PoolSplit {
  std::vector<PointIndex> teach;
  std::vector<PointIndex> validation;

  bool operator==(const PoolSplit&) const = default;
};

struct TeachingPool {
  std::vector<PoolPoint> points;
  std::optional<PoolSplit> split;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  std::size_t dim() const {
    return points.empty() ? 0 : points.front().embedding.size();
  }
  // True when every point carries an explicit prior decision.
  bool has_prior_decisions() const;

  // Points used for teaching / evaluation: the split parts when present,
  // the whole pool otherwise.
  std::vector<PointIndex> teach_indices() const;
  std::vector<PointIndex> eval_indices() const;

  // Sub-pool restricted to `indices`, in that order; the split is dropped.
  TeachingPool subset(std::span<const PointIndex> indices) const;

  bool operator==(const TeachingPool&) const = default;
};

// Throws ValidationError on the first violated invariant.
void validate_point(const PoolPoint& point);
void validate_pool(const TeachingPool& pool);

struct LoadOptions {
  // Unknown keys are an error when strict, a logged warning otherwise.
  bool strict = true;
};

TeachingPool parse_pool(std::istream& in, const LoadOptions& options = {});
TeachingPool load_pool(const std::filesystem::path& path,
                       const LoadOptions& options = {});

void write_pool(std::ostream& out, const TeachingPool& pool);
void save_pool(const std::filesystem::path& path, const TeachingPool& pool);

// Seeded shuffle, then the first ceil(fraction * n) points go to the teaching
// part and the rest to validation.
TeachingPool split_pool(const TeachingPool& pool, double fraction,
                        std::uint64_t seed);

}  // namespace deferteach
