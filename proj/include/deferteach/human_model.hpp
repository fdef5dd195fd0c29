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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deferteach/dataset.hpp"
#include "deferteach/deferral.hpp"
#include "deferteach/similarity.hpp"

namespace deferteach {

// The human's deferral behavior before any teaching. Either an explicit
// decision per point, or 1{human_err >= epsilon}.
class PriorRejector {
 public:
  enum class Mode { kExplicit, kThreshold };

  static PriorRejector explicit_decisions(std::vector<bool> decisions);
  static PriorRejector threshold(double epsilon, std::vector<double> human_err);
  // Explicit when every point carries prior_reject, threshold otherwise.
  static PriorRejector from_pool(const TeachingPool& pool, double epsilon);

  Mode mode() const { return mode_; }
  double epsilon() const { return epsilon_; }
  std::size_t size() const;

  bool operator()(PointIndex i) const;

  // Decision vector over all points.
  std::vector<bool> decisions() const;

 private:
  Mode mode_ = Mode::kExplicit;
  double epsilon_ = 0.0;
  std::vector<bool> decisions_;
  std::vector<double> human_err_;
};

// A taught lesson: inside the open ball K(., z_index) > radius, take `action`.
struct TeachingMemoryEntry {
  PointIndex index = 0;
  double radius = 0.0;
  bool action = false;

  bool operator==(const TeachingMemoryEntry&) const = default;
};

// Prior plus radius-nearest-neighbor rejector. Holds a reference to the
// similarity matrix, which must outlive the state.
class HumanLearnerState {
 public:
  HumanLearnerState(PriorRejector prior, const SimilarityMatrix& similarity);

  const PriorRejector& prior() const { return prior_; }
  const SimilarityMatrix& similarity() const { return *sim_; }
  const std::vector<TeachingMemoryEntry>& memory() const { return memory_; }

  // Throws ValidationError on a bad index, a radius outside [0, 1), or a
  // point that is already memorized.
  void memorize(const TeachingMemoryEntry& entry);
  void clear();

  bool prior_reject(PointIndex i) const;
  // Entries j with K(i, j) > radius_j, in memory order.
  std::vector<TeachingMemoryEntry> ball_membership(PointIndex i) const;
  // Similarity-weighted majority; an exact tie falls back to the prior.
  bool vote(std::span<const TeachingMemoryEntry> entries, PointIndex i) const;
  bool learner_reject(PointIndex i) const;

 private:
  void check_index(PointIndex i) const;

  PriorRejector prior_;
  const SimilarityMatrix* sim_;
  std::vector<TeachingMemoryEntry> memory_;
  std::vector<char> memorized_;
};

double learner_loss(const HumanLearnerState& state,
                    std::span<const CostVector> costs,
                    std::span<const PointIndex> eval_set);
double learner_loss(const HumanLearnerState& state, const TeachingPool& pool,
                    std::span<const PointIndex> eval_set);

struct LossDecomposition {
  double learned = 0.0;  // points with a nonempty ball
  double prior = 0.0;    // points falling back on the prior
  double total() const { return learned + prior; }
};

LossDecomposition loss_decomposition(const HumanLearnerState& state,
                                     std::span<const CostVector> costs,
                                     std::span<const PointIndex> eval_set);

// gamma <- gamma + U(-(1 - gamma) / 2, (1 - gamma) / 2), clamped to [0, 1).
std::vector<TeachingMemoryEntry> inject_radius_noise(
    std::span<const TeachingMemoryEntry> entries, std::uint64_t seed);

// What the teacher is told about the human. The learner itself always
// follows the true pool.
struct KnowledgeCondition {
  enum class Kind { kNone, kMissingG0, kMissingH, kHDelta };
  Kind kind = Kind::kNone;
  double delta = 0.0;

  static KnowledgeCondition none() { return {}; }
  static KnowledgeCondition missing_g0() { return {Kind::kMissingG0, 0.0}; }
  static KnowledgeCondition missing_h() { return {Kind::kMissingH, 0.0}; }
  static KnowledgeCondition h_delta(double d) { return {Kind::kHDelta, d}; }
};

// missing_g0: prior decisions become Bernoulli(1/2).
// missing_h: human_err becomes a Bernoulli(1/2) 0/1 vector.
// h_delta: each cluster's human_err moves by a seeded +-delta, clamped to
// [0, 1]; points without a cluster draw their own sign.
TeachingPool corrupt_knowledge(const TeachingPool& pool,
                               const KnowledgeCondition& condition,
                               std::uint64_t seed);

}  // namespace deferteach
