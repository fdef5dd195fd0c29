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

#include <span>
#include <vector>

#include "deferteach/dataset.hpp"

namespace deferteach {

// Expected loss of each rejector decision at one point: c0 when the human
// keeps the decision, c1 when they defer to the AI.
struct CostVector {
  double c0 = 0.0;
  double c1 = 0.0;

  double of(bool defer) const { return defer ? c1 : c0; }
  double gap() const { return c0 > c1 ? c0 - c1 : c1 - c0; }
  bool operator==(const CostVector&) const = default;
};

// 1 iff c0 >= c1; equal costs defer.
bool optimal_deferral_label(const CostVector& c);

struct DeferralLabeling {
  std::vector<bool> labels;
  std::vector<CostVector> costs;

  std::size_t size() const { return labels.size(); }
};

std::vector<CostVector> pool_costs(const TeachingPool& pool);
DeferralLabeling label_pool(const TeachingPool& pool);
DeferralLabeling make_labeling(std::vector<CostVector> costs);

// Sum over eval_set of min(c0, c1).
double oracle_loss(const DeferralLabeling& labeling,
                   std::span<const PointIndex> eval_set);

}  // namespace deferteach
