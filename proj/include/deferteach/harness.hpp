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
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deferteach/dataset.hpp"
#include "deferteach/selection.hpp"
#include "deferteach/similarity.hpp"
#include "deferteach/simgen.hpp"

namespace deferteach {

// Teacher knowledge and learner fidelity for one experiment.
struct ExperimentCondition {
  enum class Kind {
    kFullInfo,
    kMissingG0,
    kNoisyRadius,
    kMissingH,
    kNoInfoNoise,  // missing g0 and h, plus radius noise
    kPriorOnly,    // nothing is taught
    kHDelta,       // human error known up to +-delta per cluster
  };
  Kind kind = Kind::kFullInfo;
  double delta = 0.0;

  std::string name() const;
  bool noisy_radius() const {
    return kind == Kind::kNoisyRadius || kind == Kind::kNoInfoNoise;
  }
};

// Accepts full_info, missing_g0, noisy_radius, missing_h, no_info_noise,
// prior_only and h_delta(<value>).
ExperimentCondition parse_condition(const std::string& name);

struct ExperimentResult {
  std::string method;
  std::string condition;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  double loss = 0.0;        // mean expected loss over the evaluation points
  double oracle_gap = 0.0;  // oracle accuracy minus learner accuracy, in points
  double runtime_ms = 0.0;

  bool operator==(const ExperimentResult&) const = default;
};

struct CurveSpec {
  std::vector<Method> methods;
  std::vector<std::size_t> budgets;  // ascending
  std::vector<std::uint64_t> seeds;
  ExperimentCondition condition;
  double alpha = 1.0;                 // for kAlphaGreedy
  std::size_t knn = 1;                // for kAiBehavior
  std::size_t radius_candidates = 0;  // for the radius-searching greedy
  KernelDescriptor kernel;
  double split_fraction = 0.0;  // 0 keeps the pool unsplit
  double prior_epsilon = 0.5;   // when the pool has no explicit prior
  std::size_t threads = 1;
};

// Produces the world for one seed.
using WorldSource = std::function<TeachingPool(std::uint64_t seed)>;

struct CurveReport {
  std::vector<ExperimentResult> results;
  // Steps where an alpha = 1 greedy run increased its own objective.
  std::size_t monotone_violations = 0;
  // Records whose loss fell below the oracle's.
  std::size_t dominance_violations = 0;
  std::vector<std::string> witnesses;
};

CurveReport run_curve(const CurveSpec& spec, const WorldSource& world);
CurveReport run_curve(const CurveSpec& spec, const TeachingPool& pool);

struct PropertyReport {
  std::size_t trials = 0;
  std::size_t positivity_violations = 0;
  std::size_t monotonicity_violations = 0;
  std::size_t diminishing_returns_violations = 0;
  std::size_t bound_violations = 0;
  std::vector<std::string> witnesses;

  std::size_t violations() const {
    return positivity_violations + monotonicity_violations +
           diminishing_returns_violations + bound_violations;
  }
  PropertyReport& operator+=(const PropertyReport& other);
};

// Samples (A subset of B, l outside B) over consistent-radius candidates and
// checks F(X) = L(empty) - L(X) for positivity, monotonicity and
// diminishing returns.
PropertyReport verify_submodularity(const TeachingPool& pool,
                                    std::size_t trials, std::uint64_t seed,
                                    const KernelDescriptor& kernel = {},
                                    double prior_epsilon = 0.5);

// Small random cluster worlds with at most `max_points` points.
TeachingPool random_small_world(std::uint64_t seed, std::size_t max_points = 12);

// `triples` checks spread over fresh random 12-point pools.
PropertyReport run_submodularity_suite(std::size_t triples, std::uint64_t seed);

struct BoundInstance {
  TeachingPool pool;
  std::size_t budget = 1;
};

inline constexpr std::size_t kBoundMaxPoints = 12;
inline constexpr std::size_t kBoundMaxBudget = 3;

std::vector<BoundInstance> random_bound_instances(std::size_t count,
                                                  std::uint64_t seed);

// Greedy loss against (1 - 1/e) L(D*) + (1/e) L(empty) with D* from the
// brute-force optimum.
PropertyReport verify_greedy_bound(std::span<const BoundInstance> instances,
                                   const KernelDescriptor& kernel = {},
                                   double prior_epsilon = 0.5);

// CSV columns: method,condition,seed,budget,loss,oracle_gap,runtime_ms.
void write_results_csv(std::ostream& out, std::span<const ExperimentResult> results);
std::vector<ExperimentResult> read_results_csv(std::istream& in);

struct CurvePoint {
  std::string series;
  std::size_t budget = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single seed
  std::size_t count = 0;
};

// Mean and sample stddev of the oracle gap per (series, budget). The series
// is the method name, suffixed with the condition when several appear.
std::vector<CurvePoint> aggregate_curves(std::span<const ExperimentResult> results);

// Self-contained SVG: one polyline per series with +-stddev error bars.
std::string render_svg(std::span<const ExperimentResult> results);

// Writes the CSV and, when svg_path is given, the plot.
void emit_results(std::span<const ExperimentResult> results,
                  const std::filesystem::path& csv_path,
                  const std::optional<std::filesystem::path>& svg_path = {});

// key = value file; '#' starts a comment. Unknown keys are rejected.
class RunConfig {
 public:
  static RunConfig parse(std::istream& in);
  static RunConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_real(const std::string& key, double fallback) const;
  std::size_t get_count(const std::string& key, std::size_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  void set(const std::string& key, const std::string& value);

  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace deferteach
