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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "deferteach/dataset.hpp"
#include "deferteach/random.hpp"

namespace deferteach {

// Draw from Beta(a, b) as a ratio of Gamma variates.
double sample_beta(Rng& rng, double a, double b);

// Clusters of points with a constant AI and human error per cluster, both
// drawn i.i.d. from Beta laws; the prior thresholds the human error.
struct ClusterWorldConfig {
  std::size_t clusters = 15;
  std::size_t points_per_cluster = 20;
  std::size_t dim = 16;
  double spread = 1.0;
  // Minimum distance between cluster centers.
  double separation = 6.0;
  double ai_alpha = 1.0;
  double ai_beta = 1.0;
  double human_alpha = 1.0;
  double human_beta = 1.0;
  double epsilon = 0.5;
  std::uint64_t seed = 0;

  bool operator==(const ClusterWorldConfig&) const = default;
};

void validate_config(const ClusterWorldConfig& config);

// Points are resampled until they are nearer their own center than any
// other, so clusters are exactly the Voronoi cells of the centers.
TeachingPool gen_cluster_world(const ClusterWorldConfig& config);

// The centers gen_cluster_world places for this config.
std::vector<std::vector<double>> cluster_centers(const ClusterWorldConfig& config);

// The two published presets, both with 15 clusters:
//   A: AI Beta(2, 1), human Beta(1, 1), epsilon 0.1
//   B: AI Beta(1, 1), human Beta(2, 1), epsilon 0.9
ClusterWorldConfig preset_setting(const std::string& name, std::uint64_t seed);

// Two-dimensional mixture: X | (Y = y, A = a) ~ N(mean[y][a], I), with
// P(Y = 1) = 1/2. The AI is the Bayes classifier of group A = 1, the human
// the Bayes classifier of group A = 0.
struct GaussianWorldConfig {
  using Vec2 = std::array<double, 2>;
  // means[y][a]
  std::array<std::array<Vec2, 2>, 2> means{};
  double group_one_fraction = 0.5;
  std::size_t samples = 400;
  // The prior defers when the distance to the human's boundary is at most
  // this value.
  double prior_threshold = 0.5;
  std::uint64_t seed = 0;
};

void validate_config(const GaussianWorldConfig& config);

// Means drawn uniformly from [-3, 3]^2.
GaussianWorldConfig random_gaussian_config(std::uint64_t seed,
                                           std::size_t samples = 400);

// Closed-form pieces of the Gaussian world.
class GaussianWorldModel {
 public:
  explicit GaussianWorldModel(const GaussianWorldConfig& config);

  double posterior_one(std::span<const double> x) const;
  bool human_predict(std::span<const double> x) const;
  bool ai_predict(std::span<const double> x) const;
  // Signed distance to the human's decision boundary.
  double human_margin(std::span<const double> x) const;
  double human_err(std::span<const double> x) const;
  double ai_err(std::span<const double> x) const;

 private:
  struct Hyperplane {
    std::array<double, 2> w{};
    double b = 0.0;
    double score(std::span<const double> x) const { return w[0] * x[0] + w[1] * x[1] + b; }
  };
  static Hyperplane bayes_plane(const std::array<double, 2>& mu0,
                                const std::array<double, 2>& mu1);

  GaussianWorldConfig config_;
  Hyperplane human_;
  Hyperplane ai_;
};

TeachingPool gen_gaussian_world(const GaussianWorldConfig& config);

// Expert world: the human is perfect on the first `expert_classes` classes
// and guesses elsewhere; the AI reports a calibrated confidence and the
// prior relies on the AI when that confidence is at least the threshold.
struct ExpertWorldConfig {
  std::size_t classes = 10;
  std::size_t expert_classes = 6;
  std::size_t points_per_class = 100;
  std::size_t dim = 16;
  double spread = 1.0;
  double separation = 6.0;
  // AI confidence ~ Beta(conf_alpha, conf_beta); ai_err = 1 - confidence.
  double conf_alpha = 9.0;
  double conf_beta = 1.0;
  double human_err_outside = 0.9;
  double confidence_threshold = 0.5;
  std::uint64_t seed = 0;
};

TeachingPool gen_expert_world(const ExpertWorldConfig& config);

}  // namespace deferteach
