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

#include "deferteach/human_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "deferteach/random.hpp"

namespace deferteach {

PriorRejector PriorRejector::explicit_decisions(std::vector<bool> decisions) {
  PriorRejector p;
  p.mode_ = Mode::kExplicit;
  p.decisions_ = std::move(decisions);
  return p;
}

PriorRejector PriorRejector::threshold(double epsilon,
                                       std::vector<double> human_err) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ValidationError("prior threshold must lie in [0, 1]");
  }
  PriorRejector p;
  p.mode_ = Mode::kThreshold;
  p.epsilon_ = epsilon;
  p.human_err_ = std::move(human_err);
  return p;
}

PriorRejector PriorRejector::from_pool(const TeachingPool& pool,
                                       double epsilon) {
  if (pool.has_prior_decisions()) {
    std::vector<bool> d;
    d.reserve(pool.size());
    for (const PoolPoint& p : pool.points) d.push_back(*p.prior_reject);
    return explicit_decisions(std::move(d));
  }
  std::vector<double> h;
  h.reserve(pool.size());
  for (const PoolPoint& p : pool.points) h.push_back(p.human_err);
  return threshold(epsilon, std::move(h));
}

std::size_t PriorRejector::size() const {
  return mode_ == Mode::kExplicit ? decisions_.size() : human_err_.size();
}

bool PriorRejector::operator()(PointIndex i) const {
  if (mode_ == Mode::kExplicit) {
    if (i >= decisions_.size()) {
      throw ValidationError("no prior decision for point " + std::to_string(i));
    }
    return decisions_[i];
  }
  if (i >= human_err_.size()) {
    throw ValidationError("threshold prior has no human_err for point " +
                          std::to_string(i));
  }
  return human_err_[i] >= epsilon_;
}

std::vector<bool> PriorRejector::decisions() const {
  std::vector<bool> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)(i);
  return out;
}

HumanLearnerState::HumanLearnerState(PriorRejector prior,
                                     const SimilarityMatrix& similarity)
    : prior_(std::move(prior)),
      sim_(&similarity),
      memorized_(similarity.size(), 0) {}

void HumanLearnerState::check_index(PointIndex i) const {
  if (i >= sim_->size()) {
    throw ValidationError("point index " + std::to_string(i) + " out of range");
  }
}

void HumanLearnerState::memorize(const TeachingMemoryEntry& entry) {
  check_index(entry.index);
  if (!(entry.radius >= 0.0 && entry.radius < 1.0)) {
    throw ValidationError("teaching radius must lie in [0, 1)");
  }
  if (memorized_[entry.index]) {
    throw ValidationError("point " + std::to_string(entry.index) +
                          " is already memorized");
  }
  memorized_[entry.index] = 1;
  memory_.push_back(entry);
}

void HumanLearnerState::clear() {
  memory_.clear();
  std::fill(memorized_.begin(), memorized_.end(), 0);
}

bool HumanLearnerState::prior_reject(PointIndex i) const {
  check_index(i);
  return prior_(i);
}

std::vector<TeachingMemoryEntry> HumanLearnerState::ball_membership(
    PointIndex i) const {
  check_index(i);
  std::vector<TeachingMemoryEntry> ball;
  for (const TeachingMemoryEntry& e : memory_) {
    if ((*sim_)(i, e.index) > e.radius) ball.push_back(e);
  }
  return ball;
}

bool HumanLearnerState::vote(std::span<const TeachingMemoryEntry> entries,
                             PointIndex i) const {
  double weight[2] = {0.0, 0.0};
  for (const TeachingMemoryEntry& e : entries) {
    weight[e.action ? 1 : 0] += (*sim_)(i, e.index);
  }
  // The shared normalizer does not change the argmax.
  if (weight[1] > weight[0]) return true;
  if (weight[0] > weight[1]) return false;
  return prior_reject(i);
}

bool HumanLearnerState::learner_reject(PointIndex i) const {
  const auto ball = ball_membership(i);
  return ball.empty() ? prior_reject(i) : vote(ball, i);
}

double learner_loss(const HumanLearnerState& state,
                    std::span<const CostVector> costs,
                    std::span<const PointIndex> eval_set) {
  return loss_decomposition(state, costs, eval_set).total();
}

double learner_loss(const HumanLearnerState& state, const TeachingPool& pool,
                    std::span<const PointIndex> eval_set) {
  const auto costs = pool_costs(pool);
  return learner_loss(state, costs, eval_set);
}

LossDecomposition loss_decomposition(const HumanLearnerState& state,
                                     std::span<const CostVector> costs,
                                     std::span<const PointIndex> eval_set) {
  LossDecomposition out;
  for (PointIndex i : eval_set) {
    if (i >= costs.size()) throw ValidationError("no costs for point " + std::to_string(i));
    const auto ball = state.ball_membership(i);
    if (ball.empty()) {
      out.prior += costs[i].of(state.prior_reject(i));
    } else {
      out.learned += costs[i].of(state.vote(ball, i));
    }
  }
  return out;
}

std::vector<TeachingMemoryEntry> inject_radius_noise(
    std::span<const TeachingMemoryEntry> entries, std::uint64_t seed) {
  Rng rng = make_rng(seed, {stream_tag("radius-noise")});
  const double below_one = std::nextafter(1.0, 0.0);
  std::vector<TeachingMemoryEntry> out(entries.begin(), entries.end());
  for (TeachingMemoryEntry& e : out) {
    if (!(e.radius >= 0.0 && e.radius < 1.0)) {
      throw ValidationError("teaching radius must lie in [0, 1)");
    }
    const double half_width = (1.0 - e.radius) / 2.0;
    const double u = std::generate_canonical<double, 53>(rng);
    e.radius = std::clamp(e.radius + (2.0 * u - 1.0) * half_width, 0.0, below_one);
  }
  return out;
}

TeachingPool corrupt_knowledge(const TeachingPool& pool,
                               const KnowledgeCondition& condition,
                               std::uint64_t seed) {
  TeachingPool out = pool;
  switch (condition.kind) {
    case KnowledgeCondition::Kind::kNone:
      break;
    case KnowledgeCondition::Kind::kMissingG0: {
      Rng rng = make_rng(seed, {stream_tag("missing-g0")});
      std::bernoulli_distribution coin(0.5);
      for (PoolPoint& p : out.points) p.prior_reject = coin(rng);
      break;
    }
    case KnowledgeCondition::Kind::kMissingH: {
      Rng rng = make_rng(seed, {stream_tag("missing-h")});
      std::bernoulli_distribution coin(0.5);
      // Explicit prior decisions are kept; a threshold prior will be
      // recomputed from the corrupted errors.
      for (PoolPoint& p : out.points) p.human_err = coin(rng) ? 1.0 : 0.0;
      break;
    }
    case KnowledgeCondition::Kind::kHDelta: {
      const double d = condition.delta;
      if (!(d >= 0.0 && d <= 0.5)) {
        throw ValidationError("h_delta must lie in [0, 0.5]");
      }
      for (PoolPoint& p : out.points) {
        // Sign keyed by cluster (or point id), independent of pool order.
        const std::uint64_t key =
            p.cluster ? static_cast<std::uint64_t>(*p.cluster)
                      : static_cast<std::uint64_t>(p.id) ^ 0x8000000000000000ULL;
        const bool up = (derive_seed(seed, {stream_tag("h-delta"), key}) & 1U) != 0;
        p.human_err = std::clamp(p.human_err + (up ? d : -d), 0.0, 1.0);
      }
      break;
    }
  }
  return out;
}

}  // namespace deferteach
