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

#include "deferteach/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace deferteach {

double sample_beta(Rng& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  if (x + y == 0.0) return 0.5;
  return x / (x + y);
}

namespace {

constexpr int kPlacementAttempts = 10000;
constexpr int kPointAttempts = 1000;

double sq_dist(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += (u[k] - v[k]) * (u[k] - v[k]);
  return s;
}

// Centers drawn uniformly in a cube sized for roughly `separation` spacing,
// rejecting any closer than `separation` to an earlier center.
std::vector<std::vector<double>> place_centers(Rng& rng, std::size_t count,
                                               std::size_t dim,
                                               double separation) {
  const double side =
      separation * std::max(1.0, std::pow(static_cast<double>(count),
                                          1.0 / static_cast<double>(dim))) *
      1.5;
  std::uniform_real_distribution<double> coord(-side / 2.0, side / 2.0);
  std::vector<std::vector<double>> centers;
  const double min_sq = separation * separation;
  while (centers.size() < count) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      std::vector<double> c(dim);
      for (double& x : c) x = coord(rng);
      placed = std::all_of(centers.begin(), centers.end(),
                           [&](const std::vector<double>& o) {
                             return sq_dist(c, o) >= min_sq;
                           });
      if (placed) centers.push_back(std::move(c));
    }
    if (!placed) {
      throw ValidationError("cannot place " + std::to_string(count) +
                            " centers at separation " +
                            std::to_string(separation) + " in dimension " +
                            std::to_string(dim));
    }
  }
  return centers;
}

std::size_t nearest_center(std::span<const double> x,
                           const std::vector<std::vector<double>>& centers) {
  std::size_t best = 0;
  double best_sq = sq_dist(x, centers[0]);
  for (std::size_t c = 1; c < centers.size(); ++c) {
    const double d = sq_dist(x, centers[c]);
    if (d < best_sq) {
      best_sq = d;
      best = c;
    }
  }
  return best;
}

// Gaussian around centers[c], redrawn until it lies in c's Voronoi cell.
std::vector<double> sample_in_cell(Rng& rng,
                                   const std::vector<std::vector<double>>& centers,
                                   std::size_t c, double spread) {
  std::normal_distribution<double> noise(0.0, spread);
  for (int attempt = 0; attempt < kPointAttempts; ++attempt) {
    std::vector<double> x = centers[c];
    for (double& v : x) v += noise(rng);
    if (nearest_center(x, centers) == c) return x;
  }
  throw ValidationError("cluster spread too large for the separation");
}

void check_beta(double a, double b, const char* what) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ValidationError(std::string(what) + " Beta parameters must be positive");
  }
}

}  // namespace

void validate_config(const ClusterWorldConfig& config) {
  if (config.clusters < 1) throw ValidationError("need at least one cluster");
  if (config.points_per_cluster < 1) {
    throw ValidationError("need at least one point per cluster");
  }
  if (config.dim < 1) throw ValidationError("dimension must be positive");
  if (!(config.spread > 0.0) || !(config.separation > 0.0)) {
    throw ValidationError("spread and separation must be positive");
  }
  check_beta(config.ai_alpha, config.ai_beta, "AI");
  check_beta(config.human_alpha, config.human_beta, "human");
  if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0)) {
    throw ValidationError("prior threshold must lie in [0, 1]");
  }
}

std::vector<std::vector<double>> cluster_centers(const ClusterWorldConfig& config) {
  validate_config(config);
  Rng geometry = make_rng(config.seed, {stream_tag("cluster-geometry")});
  return place_centers(geometry, config.clusters, config.dim, config.separation);
}

TeachingPool gen_cluster_world(const ClusterWorldConfig& config) {
  validate_config(config);
  Rng geometry = make_rng(config.seed, {stream_tag("cluster-geometry")});
  Rng errors = make_rng(config.seed, {stream_tag("cluster-errors")});
  const auto centers =
      place_centers(geometry, config.clusters, config.dim, config.separation);

  std::vector<double> ai_err(config.clusters), human_err(config.clusters);
  for (std::size_t c = 0; c < config.clusters; ++c) {
    ai_err[c] = sample_beta(errors, config.ai_alpha, config.ai_beta);
    human_err[c] = sample_beta(errors, config.human_alpha, config.human_beta);
  }

  TeachingPool pool;
  pool.points.reserve(config.clusters * config.points_per_cluster);
  std::int64_t next_id = 0;
  for (std::size_t c = 0; c < config.clusters; ++c) {
    for (std::size_t k = 0; k < config.points_per_cluster; ++k) {
      PoolPoint p;
      p.id = next_id++;
      p.embedding = sample_in_cell(geometry, centers, c, config.spread);
      p.human_err = human_err[c];
      p.ai_err = ai_err[c];
      p.cluster = static_cast<std::int64_t>(c);
      p.prior_reject = human_err[c] >= config.epsilon;
      pool.points.push_back(std::move(p));
    }
  }
  return pool;
}

ClusterWorldConfig preset_setting(const std::string& name, std::uint64_t seed) {
  ClusterWorldConfig config;
  config.clusters = 15;
  config.seed = seed;
  if (name == "A") {
    config.ai_alpha = 2.0;
    config.ai_beta = 1.0;
    config.human_alpha = 1.0;
    config.human_beta = 1.0;
    config.epsilon = 0.1;
  } else if (name == "B") {
    config.ai_alpha = 1.0;
    config.ai_beta = 1.0;
    config.human_alpha = 2.0;
    config.human_beta = 1.0;
    config.epsilon = 0.9;
  } else {
    throw ValidationError("unknown preset \"" + name + "\" (expected A or B)");
  }
  return config;
}

void validate_config(const GaussianWorldConfig& config) {
  if (!(config.group_one_fraction > 0.0 && config.group_one_fraction < 1.0)) {
    throw ValidationError("group proportion must lie in (0, 1)");
  }
  for (int a = 0; a < 2; ++a) {
    if (config.means[0][a] == config.means[1][a]) {
      throw ValidationError("coincident label means in group " + std::to_string(a));
    }
  }
  if (config.samples < 1) throw ValidationError("need at least one sample");
  if (!(config.prior_threshold >= 0.0)) {
    throw ValidationError("prior threshold must be non-negative");
  }
}

GaussianWorldConfig random_gaussian_config(std::uint64_t seed,
                                           std::size_t samples) {
  Rng rng = make_rng(seed, {stream_tag("gaussian-means")});
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  GaussianWorldConfig config;
  for (auto& by_group : config.means) {
    for (auto& mu : by_group) mu = {coord(rng), coord(rng)};
  }
  config.samples = samples;
  config.seed = seed;
  return config;
}

GaussianWorldModel::Hyperplane GaussianWorldModel::bayes_plane(
    const std::array<double, 2>& mu0, const std::array<double, 2>& mu1) {
  // Equal priors and identity covariance: predict 1 iff x is nearer mu1.
  Hyperplane h;
  h.w = {mu1[0] - mu0[0], mu1[1] - mu0[1]};
  h.b = 0.5 * ((mu0[0] * mu0[0] + mu0[1] * mu0[1]) -
               (mu1[0] * mu1[0] + mu1[1] * mu1[1]));
  return h;
}

GaussianWorldModel::GaussianWorldModel(const GaussianWorldConfig& config)
    : config_(config) {
  validate_config(config);
  human_ = bayes_plane(config.means[0][0], config.means[1][0]);
  ai_ = bayes_plane(config.means[0][1], config.means[1][1]);
}

double GaussianWorldModel::posterior_one(std::span<const double> x) const {
  // log of P(a) * P(y) * N(x; mean[y][a], I), up to a shared constant.
  double logp[2][2];
  const double pa[2] = {1.0 - config_.group_one_fraction, config_.group_one_fraction};
  double top = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < 2; ++y) {
    for (int a = 0; a < 2; ++a) {
      const auto& mu = config_.means[y][a];
      const double d0 = x[0] - mu[0], d1 = x[1] - mu[1];
      logp[y][a] = std::log(pa[a]) - 0.5 * (d0 * d0 + d1 * d1);
      top = std::max(top, logp[y][a]);
    }
  }
  double mass[2] = {0.0, 0.0};
  for (int y = 0; y < 2; ++y) {
    for (int a = 0; a < 2; ++a) mass[y] += std::exp(logp[y][a] - top);
  }
  return mass[1] / (mass[0] + mass[1]);
}

bool GaussianWorldModel::human_predict(std::span<const double> x) const {
  return human_.score(x) > 0.0;
}

bool GaussianWorldModel::ai_predict(std::span<const double> x) const {
  return ai_.score(x) > 0.0;
}

double GaussianWorldModel::human_margin(std::span<const double> x) const {
  return human_.score(x) / std::hypot(human_.w[0], human_.w[1]);
}

double GaussianWorldModel::human_err(std::span<const double> x) const {
  const double p1 = posterior_one(x);
  return human_predict(x) ? 1.0 - p1 : p1;
}

double GaussianWorldModel::ai_err(std::span<const double> x) const {
  const double p1 = posterior_one(x);
  return ai_predict(x) ? 1.0 - p1 : p1;
}

TeachingPool gen_gaussian_world(const GaussianWorldConfig& config) {
  const GaussianWorldModel model(config);
  Rng rng = make_rng(config.seed, {stream_tag("gaussian-samples")});
  std::bernoulli_distribution group(config.group_one_fraction);
  std::bernoulli_distribution label(0.5);
  std::normal_distribution<double> noise(0.0, 1.0);

  TeachingPool pool;
  pool.points.reserve(config.samples);
  for (std::size_t k = 0; k < config.samples; ++k) {
    const int a = group(rng) ? 1 : 0;
    const int y = label(rng) ? 1 : 0;
    const auto& mu = config.means[y][a];
    PoolPoint p;
    p.id = static_cast<std::int64_t>(k);
    p.embedding = {mu[0] + noise(rng), mu[1] + noise(rng)};
    p.label = y;
    p.cluster = a;
    p.human_err = std::clamp(model.human_err(p.embedding), 0.0, 1.0);
    p.ai_err = std::clamp(model.ai_err(p.embedding), 0.0, 1.0);
    p.prior_reject = std::abs(model.human_margin(p.embedding)) <= config.prior_threshold;
    pool.points.push_back(std::move(p));
  }
  return pool;
}

TeachingPool gen_expert_world(const ExpertWorldConfig& config) {
  if (config.classes < 1 || config.expert_classes > config.classes) {
    throw ValidationError("expert classes must not exceed the class count");
  }
  if (config.points_per_class < 1 || config.dim < 1) {
    throw ValidationError("need points and a positive dimension");
  }
  if (!(config.spread > 0.0) || !(config.separation > 0.0)) {
    throw ValidationError("spread and separation must be positive");
  }
  check_beta(config.conf_alpha, config.conf_beta, "confidence");
  if (!(config.human_err_outside >= 0.0 && config.human_err_outside <= 1.0)) {
    throw ValidationError("human error must lie in [0, 1]");
  }

  Rng geometry = make_rng(config.seed, {stream_tag("expert-geometry")});
  Rng confidence = make_rng(config.seed, {stream_tag("expert-confidence")});
  const auto centers =
      place_centers(geometry, config.classes, config.dim, config.separation);

  TeachingPool pool;
  std::int64_t next_id = 0;
  for (std::size_t c = 0; c < config.classes; ++c) {
    for (std::size_t k = 0; k < config.points_per_class; ++k) {
      const double conf = sample_beta(confidence, config.conf_alpha, config.conf_beta);
      PoolPoint p;
      p.id = next_id++;
      p.embedding = sample_in_cell(geometry, centers, c, config.spread);
      p.label = static_cast<std::int64_t>(c);
      p.cluster = static_cast<std::int64_t>(c);
      p.ai_err = std::clamp(1.0 - conf, 0.0, 1.0);
      p.human_err = c < config.expert_classes ? 0.0 : config.human_err_outside;
      p.prior_reject = conf >= config.confidence_threshold;
      pool.points.push_back(std::move(p));
    }
  }
  return pool;
}

}  // namespace deferteach
