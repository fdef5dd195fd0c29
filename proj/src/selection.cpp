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

#include "deferteach/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "deferteach/random.hpp"
#include "json.hpp"

namespace deferteach {

TeachingSet TeachingSet::prefix(std::size_t t) const {
  TeachingSet out;
  out.budget = t;
  out.entries.assign(entries.begin(),
                     entries.begin() + static_cast<std::ptrdiff_t>(
                                           std::min(t, entries.size())));
  return out;
}

std::vector<TeachingMemoryEntry> TeachingSet::memory() const {
  std::vector<TeachingMemoryEntry> out;
  out.reserve(entries.size());
  for (const TeachingEntry& e : entries) out.push_back({e.index, e.gamma, e.action});
  return out;
}

namespace {

struct MethodName {
  Method method;
  const char* name;
};

constexpr MethodName kMethodNames[] = {
    {Method::kConsistentRadius, "consistent_radius"},
    {Method::kDoubleGreedy, "double_greedy"},
    {Method::kAlphaGreedy, "alpha_greedy"},
    {Method::kRandom, "random"},
    {Method::kKMedoids, "kmedoids"},
    {Method::kAiBehavior, "ai_behavior"},
    {Method::kBruteForce, "brute_force"},
};

}  // namespace

std::string method_name(Method method) {
  for (const auto& m : kMethodNames) {
    if (m.method == method) return m.name;
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (const auto& m : kMethodNames) {
    if (name == m.name) return m.method;
  }
  throw ValidationError("unknown selection method \"" + name + "\"");
}

bool is_prefix_consistent(Method method) {
  switch (method) {
    case Method::kConsistentRadius:
    case Method::kDoubleGreedy:
    case Method::kAlphaGreedy:
    case Method::kRandom:
    case Method::kAiBehavior:
      return true;
    case Method::kKMedoids:
    case Method::kBruteForce:
      return false;
  }
  return false;
}

void validate_config(const SelectionConfig& config) {
  if (config.budget < 1) throw ValidationError("selection budget must be >= 1");
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
    throw ValidationError("alpha must lie in [0, 1]");
  }
  if (config.method == Method::kAiBehavior && config.knn < 1) {
    throw ValidationError("ai_behavior needs knn >= 1");
  }
}

namespace {

void check_sizes(const DeferralLabeling& labeling, const SimilarityMatrix& sim) {
  if (labeling.size() != sim.size() || labeling.costs.size() != sim.size()) {
    throw ValidationError("labeling and similarity sizes differ");
  }
}

void check_sizes(const DeferralLabeling& labeling, const SimilarityMatrix& sim,
                 const PriorRejector& prior) {
  check_sizes(labeling, sim);
  if (prior.size() != sim.size()) {
    throw ValidationError("prior and similarity sizes differ");
  }
}

double min_pairwise_similarity(const SimilarityMatrix& sim) {
  double lo = 1.0;
  for (std::size_t a = 0; a < sim.size(); ++a) {
    for (std::size_t b = a + 1; b < sim.size(); ++b) lo = std::min(lo, sim(a, b));
  }
  return lo;
}

// Radius for a region covering the whole pool.
double whole_domain_radius(double min_pair, std::size_t n) {
  if (n < 2) return 0.0;
  return min_pair * (1.0 - std::ldexp(1.0, -20));
}

std::optional<RadiusChoice> consistent_radius_given(
    PointIndex i, const DeferralLabeling& labeling, const SimilarityMatrix& sim,
    double min_pair) {
  const bool r = labeling.labels[i];
  double max_opposite = -1.0;
  PointIndex exterior = kNoExterior;
  for (PointIndex k = 0; k < sim.size(); ++k) {
    if (k == i || labeling.labels[k] == r) continue;
    const double s = sim(i, k);
    if (s > max_opposite) {
      max_opposite = s;
      exterior = k;
    }
  }
  RadiusChoice choice;
  if (exterior == kNoExterior) {
    choice.gamma = whole_domain_radius(min_pair, sim.size());
  } else {
    if (max_opposite >= 1.0) return std::nullopt;
    choice.gamma = max_opposite;
  }
  choice.interior = region_contrast(i, choice.gamma, labeling, sim).first;
  choice.exterior = exterior;
  return choice;
}

std::vector<std::optional<RadiusChoice>> all_consistent_radii(
    const DeferralLabeling& labeling, const SimilarityMatrix& sim) {
  const double min_pair = min_pairwise_similarity(sim);
  std::vector<std::optional<RadiusChoice>> out(sim.size());
  std::size_t conflicts = 0;
  for (PointIndex i = 0; i < sim.size(); ++i) {
    out[i] = consistent_radius_given(i, labeling, sim, min_pair);
    if (!out[i]) ++conflicts;
  }
  if (conflicts > 0) {
    spdlog::warn(
        "{} point(s) duplicate an opposite-label point and are excluded as "
        "teaching candidates",
        conflicts);
  }
  return out;
}

// Points that duplicate (K = 1) a point carrying the opposite label.
std::vector<char> conflicting_duplicates(const DeferralLabeling& labeling,
                                         const SimilarityMatrix& sim) {
  std::vector<char> out(sim.size(), 0);
  std::size_t count = 0;
  for (PointIndex i = 0; i < sim.size(); ++i) {
    for (PointIndex k = 0; k < sim.size(); ++k) {
      if (k != i && sim(i, k) >= 1.0 && labeling.labels[k] != labeling.labels[i]) {
        out[i] = 1;
        ++count;
        break;
      }
    }
  }
  if (count > 0) {
    spdlog::warn(
        "{} point(s) duplicate an opposite-label point and are excluded as "
        "teaching candidates",
        count);
  }
  return out;
}

TeachingEntry make_entry(PointIndex i, const RadiusChoice& choice,
                         const DeferralLabeling& labeling) {
  return {i, choice.gamma, static_cast<bool>(labeling.labels[i]), choice.interior,
          choice.exterior};
}

}  // namespace

std::pair<PointIndex, PointIndex> region_contrast(PointIndex i, double gamma,
                                                  const DeferralLabeling& labeling,
                                                  const SimilarityMatrix& sim) {
  const bool r = labeling.labels.at(i);
  PointIndex interior = i;
  double interior_sim = sim(i, i);
  PointIndex exterior = kNoExterior;
  double exterior_sim = -1.0;
  for (PointIndex j = 0; j < sim.size(); ++j) {
    const double s = sim(i, j);
    if (labeling.labels[j] == r) {
      if (s > gamma && (s < interior_sim || (s == interior_sim && j < interior))) {
        interior = j;
        interior_sim = s;
      }
    } else if (s <= gamma && s > exterior_sim) {
      exterior = j;
      exterior_sim = s;
    }
  }
  return {interior, exterior};
}

std::pair<PointIndex, PointIndex> contrasting_pair(const TeachingEntry& entry) {
  return {entry.interior, entry.exterior};
}

std::optional<RadiusChoice> consistent_radius(PointIndex i,
                                              const DeferralLabeling& labeling,
                                              const SimilarityMatrix& sim) {
  check_sizes(labeling, sim);
  if (i >= sim.size()) throw ValidationError("point index out of range");
  return consistent_radius_given(i, labeling, sim, min_pairwise_similarity(sim));
}

std::vector<RadiusCandidate> feasible_radii(PointIndex i,
                                            const DeferralLabeling& labeling,
                                            const SimilarityMatrix& sim,
                                            double alpha) {
  check_sizes(labeling, sim);
  if (i >= sim.size()) throw ValidationError("point index out of range");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha must lie in [0, 1]");
  }
  const std::size_t n = sim.size();
  std::vector<PointIndex> order(n);
  std::iota(order.begin(), order.end(), PointIndex{0});
  std::sort(order.begin(), order.end(), [&](PointIndex a, PointIndex b) {
    const double sa = sim(i, a), sb = sim(i, b);
    return sa != sb ? sa > sb : a < b;
  });

  const bool r = labeling.labels[i];
  std::vector<RadiusCandidate> out;
  std::size_t inside = 0, same = 0, p = 0;
  while (p < n) {
    const double v = sim(i, order[p]);
    std::size_t q = p;
    while (q < n && sim(i, order[q]) == v) ++q;
    // Ball for gamma = v is everything strictly more similar: order[0, p).
    if (v < 1.0 && inside > 0) {
      const double consistency =
          static_cast<double>(same) / static_cast<double>(inside);
      if (consistency >= alpha) {
        for (std::size_t g = p; g < q; ++g) {
          if (order[g] != i) out.push_back({v, consistency, order[g]});
        }
      }
    }
    for (std::size_t g = p; g < q; ++g) {
      ++inside;
      if (labeling.labels[order[g]] == r) ++same;
    }
    p = q;
  }
  std::sort(out.begin(), out.end(),
            [](const RadiusCandidate& a, const RadiusCandidate& b) {
              return a.boundary < b.boundary;
            });
  return out;
}

TeachingSet greedy_select_consistent(const DeferralLabeling& labeling,
                                     const SimilarityMatrix& sim,
                                     const PriorRejector& prior,
                                     std::size_t budget) {
  check_sizes(labeling, sim, prior);
  const std::size_t n = sim.size();
  const auto radii = all_consistent_radii(labeling, sim);

  // current[j] is the learner's decision at j. Under consistent radii every
  // covered point sits only in balls sharing its label, so covering j sets
  // it to labels[j] regardless of the vote weights.
  std::vector<char> current(n);
  for (PointIndex j = 0; j < n; ++j) current[j] = prior(j);
  std::vector<double> flip_gain(n);
  for (PointIndex j = 0; j < n; ++j) flip_gain[j] = labeling.costs[j].gap();
  std::vector<char> chosen(n, 0);

  TeachingSet out;
  out.budget = budget;
  for (std::size_t t = 0; t < budget; ++t) {
    PointIndex best = kNoExterior;
    double best_gain = 0.0;
    for (PointIndex i = 0; i < n; ++i) {
      if (chosen[i] || !radii[i]) continue;
      const double gamma = radii[i]->gamma;
      double gain = 0.0;
      for (PointIndex j = 0; j < n; ++j) {
        if (current[j] != static_cast<char>(labeling.labels[j]) && sim(i, j) > gamma) {
          gain += flip_gain[j];
        }
      }
      if (best == kNoExterior ? gain > 0.0 : gain > best_gain + kTieTolerance) {
        best = i;
        best_gain = gain;
      }
    }
    if (best == kNoExterior) break;

    chosen[best] = 1;
    const double gamma = radii[best]->gamma;
    for (PointIndex j = 0; j < n; ++j) {
      if (sim(best, j) > gamma) current[j] = labeling.labels[j];
    }
    out.entries.push_back(make_entry(best, *radii[best], labeling));
  }
  return out;
}

TeachingSet greedy_select_consistent_reference(const DeferralLabeling& labeling,
                                               const SimilarityMatrix& sim,
                                               const PriorRejector& prior,
                                               std::size_t budget) {
  check_sizes(labeling, sim, prior);
  const std::size_t n = sim.size();
  const auto radii = all_consistent_radii(labeling, sim);
  std::vector<PointIndex> everyone(n);
  std::iota(everyone.begin(), everyone.end(), PointIndex{0});

  HumanLearnerState state(prior, sim);
  double current = learner_loss(state, labeling.costs, everyone);
  TeachingSet out;
  out.budget = budget;
  for (std::size_t t = 0; t < budget; ++t) {
    PointIndex best = kNoExterior;
    double best_loss = 0.0;
    for (PointIndex i = 0; i < n; ++i) {
      if (!radii[i]) continue;
      const bool taken = std::any_of(
          state.memory().begin(), state.memory().end(),
          [i](const TeachingMemoryEntry& e) { return e.index == i; });
      if (taken) continue;
      HumanLearnerState trial = state;
      trial.memorize({i, radii[i]->gamma, static_cast<bool>(labeling.labels[i])});
      const double loss = learner_loss(trial, labeling.costs, everyone);
      if (best == kNoExterior ? loss < current - kTieTolerance
                              : loss < best_loss - kTieTolerance) {
        best = i;
        best_loss = loss;
      }
    }
    if (best == kNoExterior) break;
    state.memorize({best, radii[best]->gamma, static_cast<bool>(labeling.labels[best])});
    current = best_loss;
    out.entries.push_back(make_entry(best, *radii[best], labeling));
  }
  return out;
}

TeachingSet greedy_select_double(const DeferralLabeling& labeling,
                                 const SimilarityMatrix& sim,
                                 const PriorRejector& prior, std::size_t budget,
                                 double alpha, std::size_t radius_candidates) {
  check_sizes(labeling, sim, prior);
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha must lie in [0, 1]");
  }
  const std::size_t n = sim.size();
  const auto excluded = conflicting_duplicates(labeling, sim);

  // Each row sorted by decreasing similarity (ties by index): the ball for a
  // radius is then a prefix of the row.
  std::vector<std::uint32_t> order(n * n);
  for (PointIndex i = 0; i < n; ++i) {
    auto row = order.begin() + static_cast<std::ptrdiff_t>(i * n);
    std::iota(row, row + static_cast<std::ptrdiff_t>(n), std::uint32_t{0});
    std::sort(row, row + static_cast<std::ptrdiff_t>(n),
              [&](std::uint32_t a, std::uint32_t b) {
                const double sa = sim(i, a), sb = sim(i, b);
                return sa != sb ? sa > sb : a < b;
              });
  }

  // Incremental learner: per-point vote weights for each action, in the
  // order entries were taught, so sums match a fresh simulation bit for bit.
  std::vector<double> weight_keep(n, 0.0), weight_defer(n, 0.0);
  std::vector<char> prior_dec(n), decision(n);
  std::vector<double> cost_now(n);
  for (PointIndex j = 0; j < n; ++j) {
    prior_dec[j] = prior(j);
    decision[j] = prior_dec[j];
    cost_now[j] = labeling.costs[j].of(decision[j]);
  }
  auto decide = [&](PointIndex j, double keep, double defer) -> char {
    if (defer > keep) return 1;
    if (keep > defer) return 0;
    return prior_dec[j];
  };

  const std::size_t stride =
      radius_candidates == 0 ? 1 : std::max<std::size_t>(1, (n - 1) / radius_candidates);

  std::vector<char> chosen(n, 0);
  TeachingSet out;
  out.budget = budget;
  for (std::size_t t = 0; t < budget; ++t) {
    PointIndex best = kNoExterior;
    double best_delta = 0.0;
    double best_gamma = 0.0;
    for (PointIndex i = 0; i < n; ++i) {
      if (chosen[i] || excluded[i]) continue;
      const bool r = labeling.labels[i];
      const std::uint32_t* row = order.data() + i * n;
      double delta = 0.0;
      std::size_t inside = 0, same = 0, p = 0, next_eval = 0;
      while (p < n) {
        const double v = sim(i, row[p]);
        if (v < 1.0 && inside > 0 && p >= next_eval) {
          next_eval = p + stride;
          const double consistency =
              static_cast<double>(same) / static_cast<double>(inside);
          if (consistency >= alpha &&
              (best == kNoExterior ? delta < 0.0
                                   : delta < best_delta - kTieTolerance)) {
            best = i;
            best_delta = delta;
            best_gamma = v;
          }
        }
        for (; p < n && sim(i, row[p]) == v; ++p) {
          const PointIndex j = row[p];
          const char d = r ? decide(j, weight_keep[j], weight_defer[j] + v)
                           : decide(j, weight_keep[j] + v, weight_defer[j]);
          delta += labeling.costs[j].of(d) - cost_now[j];
          ++inside;
          if (labeling.labels[j] == r) ++same;
        }
      }
    }
    if (best == kNoExterior) break;

    chosen[best] = 1;
    const bool r = labeling.labels[best];
    for (PointIndex j = 0; j < n; ++j) {
      const double s = sim(best, j);
      if (!(s > best_gamma)) continue;
      (r ? weight_defer[j] : weight_keep[j]) += s;
      decision[j] = decide(j, weight_keep[j], weight_defer[j]);
      cost_now[j] = labeling.costs[j].of(decision[j]);
    }
    const auto [interior, exterior] = region_contrast(best, best_gamma, labeling, sim);
    out.entries.push_back({best, best_gamma, r, interior, exterior});
  }
  return out;
}

namespace {

void check_brute_force_size(std::size_t n) {
  if (n > kBruteForceMaxPoints) {
    throw ValidationError("brute force is limited to " +
                          std::to_string(kBruteForceMaxPoints) + " points, got " +
                          std::to_string(n));
  }
}

// Calls visit(combination) for every size-k subset of `items` in
// lexicographic order; stops early when visit returns true.
template <typename Visit>
bool for_each_combination(const std::vector<PointIndex>& items, std::size_t k,
                          Visit&& visit) {
  if (k > items.size()) return false;
  std::vector<std::size_t> pos(k);
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  std::vector<PointIndex> combo(k);
  while (true) {
    for (std::size_t a = 0; a < k; ++a) combo[a] = items[pos[a]];
    if (visit(combo)) return true;
    std::size_t a = k;
    while (a > 0 && pos[a - 1] == items.size() - k + (a - 1)) --a;
    if (a == 0) return false;
    ++pos[a - 1];
    for (std::size_t b = a; b < k; ++b) pos[b] = pos[b - 1] + 1;
  }
}

struct BruteForceContext {
  const DeferralLabeling& labeling;
  const SimilarityMatrix& sim;
  const PriorRejector& prior;
  std::vector<std::optional<RadiusChoice>> radii;
  std::vector<PointIndex> candidates;
  std::vector<PointIndex> everyone;

  BruteForceContext(const DeferralLabeling& l, const SimilarityMatrix& s,
                    const PriorRejector& p)
      : labeling(l), sim(s), prior(p), radii(all_consistent_radii(l, s)),
        everyone(s.size()) {
    std::iota(everyone.begin(), everyone.end(), PointIndex{0});
    for (PointIndex i = 0; i < s.size(); ++i) {
      if (radii[i]) candidates.push_back(i);
    }
  }

  double loss(const std::vector<PointIndex>& combo) const {
    HumanLearnerState state(prior, sim);
    for (PointIndex i : combo) {
      state.memorize({i, radii[i]->gamma, static_cast<bool>(labeling.labels[i])});
    }
    return learner_loss(state, labeling.costs, everyone);
  }

  TeachingSet to_set(const std::vector<PointIndex>& combo,
                     std::size_t budget) const {
    TeachingSet set;
    set.budget = budget;
    for (PointIndex i : combo) set.entries.push_back(make_entry(i, *radii[i], labeling));
    return set;
  }
};

}  // namespace

BruteForceResult brute_force_select(const DeferralLabeling& labeling,
                                    const SimilarityMatrix& sim,
                                    const PriorRejector& prior,
                                    std::size_t budget) {
  check_sizes(labeling, sim, prior);
  check_brute_force_size(sim.size());
  if (budget > kBruteForceMaxBudget) {
    throw ValidationError("brute force is limited to a budget of " +
                          std::to_string(kBruteForceMaxBudget));
  }
  const BruteForceContext ctx(labeling, sim, prior);
  BruteForceResult best;
  best.feasible = true;
  best.set.budget = budget;
  best.loss = ctx.loss({});
  std::vector<PointIndex> best_combo;
  const std::size_t max_size = std::min(budget, ctx.candidates.size());
  for (std::size_t k = 1; k <= max_size; ++k) {
    for_each_combination(ctx.candidates, k, [&](const std::vector<PointIndex>& c) {
      const double loss = ctx.loss(c);
      if (loss < best.loss - kTieTolerance) {
        best.loss = loss;
        best_combo = c;
      }
      return false;
    });
  }
  best.set = ctx.to_set(best_combo, budget);
  return best;
}

BruteForceResult brute_force_min_size(const DeferralLabeling& labeling,
                                      const SimilarityMatrix& sim,
                                      const PriorRejector& prior,
                                      double max_loss) {
  check_sizes(labeling, sim, prior);
  check_brute_force_size(sim.size());
  const BruteForceContext ctx(labeling, sim, prior);
  BruteForceResult result;
  for (std::size_t k = 0; k <= ctx.candidates.size(); ++k) {
    const bool found =
        for_each_combination(ctx.candidates, k, [&](const std::vector<PointIndex>& c) {
          const double loss = ctx.loss(c);
          if (loss <= max_loss + kTieTolerance) {
            result.feasible = true;
            result.loss = loss;
            result.set = ctx.to_set(c, k);
            return true;
          }
          return false;
        });
    if (found) return result;
  }
  return result;
}

TeachingSet select_random(const DeferralLabeling& labeling,
                          const SimilarityMatrix& sim, std::size_t budget,
                          std::uint64_t seed) {
  check_sizes(labeling, sim);
  const auto radii = all_consistent_radii(labeling, sim);
  std::vector<PointIndex> order(sim.size());
  std::iota(order.begin(), order.end(), PointIndex{0});
  Rng rng = make_rng(seed, {stream_tag("select-random")});
  std::shuffle(order.begin(), order.end(), rng);

  TeachingSet out;
  out.budget = budget;
  for (PointIndex i : order) {
    if (out.size() == budget) break;
    if (radii[i]) out.entries.push_back(make_entry(i, *radii[i], labeling));
  }
  return out;
}

std::vector<PointIndex> pam_medoids(const SimilarityMatrix& sim, std::size_t k) {
  const std::size_t n = sim.size();
  if (k > n) {
    throw ValidationError("k-medoids budget " + std::to_string(k) +
                          " exceeds pool size " + std::to_string(n));
  }
  if (k == 0) return {};
  auto dist = [&](PointIndex a, PointIndex b) { return 1.0 - sim(a, b); };

  // BUILD
  std::vector<PointIndex> medoids;
  std::vector<char> is_medoid(n, 0);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  {
    PointIndex first = 0;
    double best = std::numeric_limits<double>::infinity();
    for (PointIndex i = 0; i < n; ++i) {
      double total = 0.0;
      for (PointIndex j = 0; j < n; ++j) total += dist(i, j);
      if (total < best) {
        best = total;
        first = i;
      }
    }
    medoids.push_back(first);
    is_medoid[first] = 1;
    for (PointIndex j = 0; j < n; ++j) nearest[j] = dist(first, j);
  }
  while (medoids.size() < k) {
    PointIndex pick = kNoExterior;
    double best_gain = -1.0;
    for (PointIndex i = 0; i < n; ++i) {
      if (is_medoid[i]) continue;
      double gain = 0.0;
      for (PointIndex j = 0; j < n; ++j) gain += std::max(0.0, nearest[j] - dist(i, j));
      if (gain > best_gain) {
        best_gain = gain;
        pick = i;
      }
    }
    medoids.push_back(pick);
    is_medoid[pick] = 1;
    for (PointIndex j = 0; j < n; ++j) nearest[j] = std::min(nearest[j], dist(pick, j));
  }

  // SWAP, best improvement per iteration. Each candidate h is scored
  // against every medoid in one pass using nearest/second-nearest caches.
  std::vector<std::size_t> slot1(n);
  std::vector<double> d1(n), d2(n);
  auto refresh = [&] {
    for (PointIndex j = 0; j < n; ++j) {
      d1[j] = d2[j] = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < medoids.size(); ++s) {
        const double d = dist(medoids[s], j);
        if (d < d1[j]) {
          d2[j] = d1[j];
          d1[j] = d;
          slot1[j] = s;
        } else if (d < d2[j]) {
          d2[j] = d;
        }
      }
    }
  };
  refresh();
  std::vector<double> delta(k);
  for (int iter = 0; iter < kMaxSwapIterations; ++iter) {
    double best = -1e-12;
    std::size_t best_slot = 0;
    PointIndex best_h = kNoExterior;
    for (PointIndex h = 0; h < n; ++h) {
      if (is_medoid[h]) continue;
      std::fill(delta.begin(), delta.end(), 0.0);
      double shared = 0.0;
      for (PointIndex j = 0; j < n; ++j) {
        const double dh = dist(h, j);
        if (dh < d1[j]) {
          shared += dh - d1[j];
        } else {
          delta[slot1[j]] += std::min(dh, d2[j]) - d1[j];
        }
      }
      for (std::size_t s = 0; s < k; ++s) {
        if (shared + delta[s] < best) {
          best = shared + delta[s];
          best_slot = s;
          best_h = h;
        }
      }
    }
    if (best_h == kNoExterior) break;
    is_medoid[medoids[best_slot]] = 0;
    medoids[best_slot] = best_h;
    is_medoid[best_h] = 1;
    refresh();
  }
  return medoids;
}

TeachingSet select_kmedoids(const DeferralLabeling& labeling,
                            const SimilarityMatrix& sim, std::size_t budget,
                            std::uint64_t /*seed: PAM is deterministic*/) {
  check_sizes(labeling, sim);
  const auto medoids = pam_medoids(sim, budget);
  const double min_pair = min_pairwise_similarity(sim);
  TeachingSet out;
  out.budget = budget;
  for (PointIndex i : medoids) {
    const auto choice = consistent_radius_given(i, labeling, sim, min_pair);
    if (choice) {
      out.entries.push_back(make_entry(i, *choice, labeling));
    } else {
      spdlog::warn("medoid {} duplicates an opposite-label point; skipped", i);
    }
  }
  return out;
}

TeachingSet select_ai_behavior(const DeferralLabeling& labeling,
                               const SimilarityMatrix& sim, std::size_t budget,
                               std::size_t knn, std::uint64_t /*seed*/) {
  check_sizes(labeling, sim);
  if (knn < 1) throw ValidationError("ai_behavior needs knn >= 1");
  const std::size_t n = sim.size();
  const auto radii = all_consistent_radii(labeling, sim);
  std::vector<char> ai_wrong(n);
  for (PointIndex j = 0; j < n; ++j) ai_wrong[j] = labeling.costs[j].c1 >= 0.5;

  // neighbors[j]: selected points ordered by decreasing similarity to j
  // (ties by index), truncated to knn.
  std::vector<std::vector<PointIndex>> neighbors(n);
  auto closer = [&](PointIndex j, PointIndex a, PointIndex b) {
    const double sa = sim(j, a), sb = sim(j, b);
    return sa != sb ? sa > sb : a < b;
  };
  auto predict = [&](const std::vector<PointIndex>& nbrs) {
    std::size_t wrong = 0;
    for (PointIndex e : nbrs) wrong += ai_wrong[e] ? 1 : 0;
    const std::size_t right = nbrs.size() - wrong;
    if (wrong != right) return wrong > right;
    return static_cast<bool>(ai_wrong[nbrs.front()]);
  };
  auto with_candidate = [&](PointIndex j, PointIndex c) {
    std::vector<PointIndex> nbrs = neighbors[j];
    auto it = std::find_if(nbrs.begin(), nbrs.end(),
                           [&](PointIndex e) { return closer(j, c, e); });
    nbrs.insert(it, c);
    if (nbrs.size() > knn) nbrs.pop_back();
    return nbrs;
  };

  std::vector<char> chosen(n, 0);
  TeachingSet out;
  out.budget = budget;
  for (std::size_t t = 0; t < budget; ++t) {
    PointIndex best = kNoExterior;
    std::size_t best_errors = 0;
    for (PointIndex c = 0; c < n; ++c) {
      if (chosen[c] || !radii[c]) continue;
      std::size_t errors = 0;
      for (PointIndex j = 0; j < n; ++j) {
        if (predict(with_candidate(j, c)) != static_cast<bool>(ai_wrong[j])) ++errors;
      }
      if (best == kNoExterior || errors < best_errors) {
        best = c;
        best_errors = errors;
      }
    }
    if (best == kNoExterior) break;
    chosen[best] = 1;
    for (PointIndex j = 0; j < n; ++j) neighbors[j] = with_candidate(j, best);
    out.entries.push_back(make_entry(best, *radii[best], labeling));
  }
  return out;
}

TeachingSet select(const SelectionConfig& config,
                   const DeferralLabeling& labeling,
                   const SimilarityMatrix& sim, const PriorRejector& prior) {
  validate_config(config);
  switch (config.method) {
    case Method::kConsistentRadius:
      return greedy_select_consistent(labeling, sim, prior, config.budget);
    case Method::kDoubleGreedy:
      return greedy_select_double(labeling, sim, prior, config.budget, 0.0,
                                  config.radius_candidates);
    case Method::kAlphaGreedy:
      return greedy_select_double(labeling, sim, prior, config.budget,
                                  config.alpha, config.radius_candidates);
    case Method::kRandom:
      return select_random(labeling, sim, config.budget, config.seed);
    case Method::kKMedoids:
      return select_kmedoids(labeling, sim, config.budget, config.seed);
    case Method::kAiBehavior:
      return select_ai_behavior(labeling, sim, config.budget, config.knn,
                                config.seed);
    case Method::kBruteForce:
      return brute_force_select(labeling, sim, prior, config.budget).set;
  }
  throw ValidationError("unhandled selection method");
}

HumanLearnerState make_learner(const PriorRejector& prior,
                               const SimilarityMatrix& sim,
                               std::span<const TeachingMemoryEntry> memory) {
  HumanLearnerState state(prior, sim);
  for (const TeachingMemoryEntry& e : memory) state.memorize(e);
  return state;
}

HumanLearnerState make_learner(const PriorRejector& prior,
                               const SimilarityMatrix& sim,
                               const TeachingSet& set) {
  const auto memory = set.memory();
  return make_learner(prior, sim, memory);
}

TeachingSet inject_radius_noise(const TeachingSet& set, std::uint64_t seed) {
  const auto noisy = inject_radius_noise(set.memory(), seed);
  TeachingSet out = set;
  for (std::size_t k = 0; k < out.entries.size(); ++k) {
    out.entries[k].gamma = noisy[k].radius;
  }
  return out;
}

std::string teaching_set_to_json(const TeachingSet& set) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const TeachingEntry& e : set.entries) {
    nlohmann::ordered_json rec;
    rec["index"] = e.index;
    rec["gamma"] = e.gamma;
    rec["action"] = e.action ? 1 : 0;
    rec["interior"] = e.interior;
    if (e.exterior == kNoExterior) {
      rec["exterior"] = nullptr;
    } else {
      rec["exterior"] = e.exterior;
    }
    arr.push_back(std::move(rec));
  }
  return arr.dump(2);
}

TeachingSet teaching_set_from_json(const std::string& text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("malformed teaching set: ") + e.what());
  }
  if (!arr.is_array()) throw ValidationError("teaching set must be a JSON array");
  TeachingSet set;
  for (const auto& rec : arr) {
    try {
      TeachingEntry e;
      e.index = rec.at("index").get<PointIndex>();
      e.gamma = rec.at("gamma").get<double>();
      const auto& action = rec.at("action");
      e.action = action.is_boolean() ? action.get<bool>() : action.get<int>() != 0;
      e.interior = rec.at("interior").get<PointIndex>();
      const auto& ext = rec.at("exterior");
      e.exterior = ext.is_null() ? kNoExterior : ext.get<PointIndex>();
      if (!(e.gamma >= 0.0 && e.gamma < 1.0)) {
        throw ValidationError("teaching radius must lie in [0, 1)");
      }
      set.entries.push_back(e);
    } catch (const nlohmann::json::exception& ex) {
      throw ValidationError(std::string("bad teaching set entry: ") + ex.what());
    }
  }
  set.budget = set.entries.size();
  return set;
}

void save_teaching_set(const std::filesystem::path& path, const TeachingSet& set) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << teaching_set_to_json(set) << '\n';
}

TeachingSet load_teaching_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open teaching set " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return teaching_set_from_json(buf.str());
}

}  // namespace deferteach
