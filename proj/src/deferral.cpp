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

#include "deferteach/deferral.hpp"

#include <algorithm>
#include <cmath>

namespace deferteach {

bool optimal_deferral_label(const CostVector& c) { return c.c0 >= c.c1; }

std::vector<CostVector> pool_costs(const TeachingPool& pool) {
  std::vector<CostVector> costs;
  costs.reserve(pool.size());
  for (const PoolPoint& p : pool.points) costs.push_back({p.human_err, p.ai_err});
  return costs;
}

DeferralLabeling make_labeling(std::vector<CostVector> costs) {
  DeferralLabeling out;
  out.labels.reserve(costs.size());
  for (const CostVector& c : costs) {
    if (!std::isfinite(c.c0) || !std::isfinite(c.c1) || c.c0 < 0.0 ||
        c.c0 > 1.0 || c.c1 < 0.0 || c.c1 > 1.0) {
      throw ValidationError("cost outside [0, 1]");
    }
    out.labels.push_back(optimal_deferral_label(c));
  }
  out.costs = std::move(costs);
  return out;
}

DeferralLabeling label_pool(const TeachingPool& pool) {
  return make_labeling(pool_costs(pool));
}

double oracle_loss(const DeferralLabeling& labeling,
                   std::span<const PointIndex> eval_set) {
  double total = 0.0;
  for (PointIndex i : eval_set) {
    const CostVector& c = labeling.costs.at(i);
    total += std::min(c.c0, c.c1);
  }
  return total;
}

}  // namespace deferteach
