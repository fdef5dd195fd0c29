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
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deferteach/deferral.hpp"
#include "deferteach/human_model.hpp"
#include "deferteach/similarity.hpp"

namespace deferteach {

// Marks a region with no exterior contrasting example (it covers the pool).
inline constexpr PointIndex kNoExterior = std::numeric_limits<PointIndex>::max();

// Two selection candidates whose gains or losses differ by less than this are
// treated as tied and resolved by index.
inline constexpr double kTieTolerance = 1e-9;

// One taught region: the example, its radius, the action to take inside it,
// and the two contrasting examples that delimit it.
struct TeachingEntry {
  PointIndex index = 0;
  double gamma = 0.0;
  bool action = false;
  PointIndex interior = 0;
  PointIndex exterior = kNoExterior;

  bool operator==(const TeachingEntry&) const = default;
};

struct TeachingSet {
  std::vector<TeachingEntry> entries;
  std::size_t budget = 0;

  std::size_t size() const { return entries.size(); }
  TeachingSet prefix(std::size_t t) const;
  std::vector<TeachingMemoryEntry> memory() const;

  bool operator==(const TeachingSet&) const = default;
};

enum class Method {
  kConsistentRadius,
  kDoubleGreedy,
  kAlphaGreedy,
  kRandom,
  kKMedoids,
  kAiBehavior,
  kBruteForce,
};

std::string method_name(Method method);
// Accepts the names produced by method_name; throws ValidationError otherwise.
Method parse_method(const std::string& name);
// Whether the selector's budget-t output is the prefix of its budget-m output.
bool is_prefix_consistent(Method method);

struct SelectionConfig {
  Method method = Method::kConsistentRadius;
  std::size_t budget = 1;
  double alpha = 0.0;  // only read by kAlphaGreedy
  std::uint64_t seed = 0;
  std::size_t radius_candidates = 0;  // 0 = every similarity to another point
  std::size_t knn = 1;                // neighbors for kAiBehavior
};

void validate_config(const SelectionConfig& config);

struct RadiusChoice {
  double gamma = 0.0;
  PointIndex interior = 0;
  PointIndex exterior = kNoExterior;
};

// Largest open ball around i containing only points with i's label.
// nullopt when a duplicate of i carries the opposite label.
std::optional<RadiusChoice> consistent_radius(PointIndex i,
                                              const DeferralLabeling& labeling,
                                              const SimilarityMatrix& sim);

struct RadiusCandidate {
  double gamma = 0.0;
  double consistency = 0.0;  // fraction of the ball sharing i's label
  PointIndex boundary = 0;   // the point k with K(i, k) = gamma
};

// Candidate radii K(i, k), k != i, whose open ball is at least alpha
// label-consistent. Radii of 1 (duplicates of i) are never candidates.
std::vector<RadiusCandidate> feasible_radii(PointIndex i,
                                            const DeferralLabeling& labeling,
                                            const SimilarityMatrix& sim,
                                            double alpha);

// Interior: least similar same-label point with K > gamma. Exterior: most
// similar opposite-label point with K <= gamma, or kNoExterior.
std::pair<PointIndex, PointIndex> region_contrast(PointIndex i, double gamma,
                                                  const DeferralLabeling& labeling,
                                                  const SimilarityMatrix& sim);

std::pair<PointIndex, PointIndex> contrasting_pair(const TeachingEntry& entry);

// Greedy selection with consistent radii using cost-weighted flip counts.
TeachingSet greedy_select_consistent(const DeferralLabeling& labeling,
                                     const SimilarityMatrix& sim,
                                     const PriorRejector& prior,
                                     std::size_t budget);

// Same objective, evaluated by simulating the learner for every candidate.
TeachingSet greedy_select_consistent_reference(const DeferralLabeling& labeling,
                                               const SimilarityMatrix& sim,
                                               const PriorRejector& prior,
                                               std::size_t budget);

// Joint search over (point, radius) with the alpha-consistency constraint;
// alpha = 0 is the unconstrained variant.
TeachingSet greedy_select_double(const DeferralLabeling& labeling,
                                 const SimilarityMatrix& sim,
                                 const PriorRejector& prior, std::size_t budget,
                                 double alpha = 0.0,
                                 std::size_t radius_candidates = 0);

inline constexpr std::size_t kBruteForceMaxPoints = 20;
inline constexpr std::size_t kBruteForceMaxBudget = 4;

struct BruteForceResult {
  bool feasible = false;
  TeachingSet set;
  double loss = 0.0;
};

// Exact optimum over subsets of size <= budget, consistent radii.
BruteForceResult brute_force_select(const DeferralLabeling& labeling,
                                    const SimilarityMatrix& sim,
                                    const PriorRejector& prior,
                                    std::size_t budget);

// Smallest subset whose loss is <= max_loss; infeasible when none exists.
BruteForceResult brute_force_min_size(const DeferralLabeling& labeling,
                                      const SimilarityMatrix& sim,
                                      const PriorRejector& prior,
                                      double max_loss);

TeachingSet select_random(const DeferralLabeling& labeling,
                          const SimilarityMatrix& sim, std::size_t budget,
                          std::uint64_t seed);

// PAM (BUILD, then best-improvement SWAP for at most kMaxSwapIterations)
// over the distance 1 - K.
inline constexpr int kMaxSwapIterations = 100;
TeachingSet select_kmedoids(const DeferralLabeling& labeling,
                            const SimilarityMatrix& sim, std::size_t budget,
                            std::uint64_t seed);

// Medoid indices only, in placement order.
std::vector<PointIndex> pam_medoids(const SimilarityMatrix& sim,
                                    std::size_t k);

// Greedily picks the points that best let a k-nearest-neighbor classifier
// predict where the AI errs (ai_err >= 0.5).
TeachingSet select_ai_behavior(const DeferralLabeling& labeling,
                               const SimilarityMatrix& sim, std::size_t budget,
                               std::size_t knn, std::uint64_t seed);

// Dispatches on config.method.
TeachingSet select(const SelectionConfig& config,
                   const DeferralLabeling& labeling,
                   const SimilarityMatrix& sim, const PriorRejector& prior);

// A learner holding the given teaching set.
HumanLearnerState make_learner(const PriorRejector& prior,
                               const SimilarityMatrix& sim,
                               const TeachingSet& set);
HumanLearnerState make_learner(const PriorRejector& prior,
                               const SimilarityMatrix& sim,
                               std::span<const TeachingMemoryEntry> memory);

// Radius noise on every entry; contrasting indices are kept.
TeachingSet inject_radius_noise(const TeachingSet& set, std::uint64_t seed);

// JSON array of {index, gamma, action, interior, exterior}; a missing
// exterior is null.
std::string teaching_set_to_json(const TeachingSet& set);
TeachingSet teaching_set_from_json(const std::string& text);
void save_teaching_set(const std::filesystem::path& path, const TeachingSet& set);
TeachingSet load_teaching_set(const std::filesystem::path& path);

}  // namespace deferteach
