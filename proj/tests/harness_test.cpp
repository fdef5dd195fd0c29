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

#include "deferteach/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <regex>
#include <sstream>

#include "deferteach/deferral.hpp"
#include "deferteach/human_model.hpp"

namespace deferteach {
namespace {

std::vector<PointIndex> all_of(std::size_t n) {
  std::vector<PointIndex> v(n);
  std::iota(v.begin(), v.end(), PointIndex{0});
  return v;
}

TeachingPool small_world(std::uint64_t seed) {
  ClusterWorldConfig config = preset_setting("B", seed);
  config.clusters = 6;
  config.points_per_cluster = 10;
  config.dim = 4;
  config.separation = 1.0;
  return gen_cluster_world(config);
}

TeachingPool line_pool(bool prior_wrong) {
  TeachingPool pool;
  const double human[] = {0, 0, 1, 1};
  for (int i = 0; i < 4; ++i) {
    PoolPoint p;
    p.id = i;
    p.embedding = {static_cast<double>(i)};
    p.human_err = human[i];
    p.ai_err = 1.0 - human[i];
    const bool label = human[i] == 1.0;
    p.prior_reject = prior_wrong ? !label : label;
    pool.points.push_back(p);
  }
  return pool;
}

double empty_gap(const TeachingPool& pool) {
  const SimilarityMatrix sim = build_similarity_matrix(pool, {});
  const DeferralLabeling l = label_pool(pool);
  const HumanLearnerState state(PriorRejector::from_pool(pool, 0.5), sim);
  const auto eval = all_of(pool.size());
  return 100.0 * (learner_loss(state, l.costs, eval) - oracle_loss(l, eval)) /
         static_cast<double>(pool.size());
}

const std::vector<Method> kAllMethods = {
    Method::kConsistentRadius, Method::kDoubleGreedy, Method::kAlphaGreedy,
    Method::kRandom,           Method::kKMedoids,     Method::kAiBehavior};

TEST(Condition, ParseAndName) {
  for (const char* name : {"full_info", "missing_g0", "noisy_radius", "missing_h",
                           "no_info_noise", "prior_only"}) {
    EXPECT_EQ(parse_condition(name).name(), name);
  }
  const ExperimentCondition h = parse_condition("h_delta(0.25)");
  EXPECT_EQ(h.kind, ExperimentCondition::Kind::kHDelta);
  EXPECT_EQ(h.delta, 0.25);
  EXPECT_EQ(h.name(), "h_delta(0.25)");
  EXPECT_TRUE(parse_condition("no_info_noise").noisy_radius());
  EXPECT_FALSE(parse_condition("missing_h").noisy_radius());
  EXPECT_THROW(parse_condition("h_delta(0.9)"), ValidationError);
  EXPECT_THROW(parse_condition("everything"), ValidationError);
}

TEST(RunCurve, BudgetZeroIsPriorForEveryMethod) {
  const TeachingPool pool = small_world(3);
  CurveSpec spec;
  spec.methods = kAllMethods;
  spec.budgets = {0};
  spec.seeds = {1, 2};
  const CurveReport report = run_curve(spec, pool);
  ASSERT_EQ(report.results.size(), kAllMethods.size() * 2);
  for (const ExperimentResult& r : report.results) {
    EXPECT_NEAR(r.oracle_gap, empty_gap(pool), 1e-9) << r.method;
    EXPECT_EQ(r.budget, 0u);
  }
}

TEST(RunCurve, PriorOnlyConditionIgnoresMethod) {
  const TeachingPool pool = small_world(4);
  CurveSpec spec;
  spec.methods = kAllMethods;
  spec.budgets = {1, 5, 10};
  spec.seeds = {7};
  spec.condition = parse_condition("prior_only");
  for (const ExperimentResult& r : run_curve(spec, pool).results) {
    EXPECT_NEAR(r.oracle_gap, empty_gap(pool), 1e-9);
    EXPECT_EQ(r.condition, "prior_only");
  }
}

TEST(RunCurve, RecordsFollowDefinitions) {
  const TeachingPool pool = small_world(5);
  CurveSpec spec;
  spec.methods = {Method::kConsistentRadius};
  spec.budgets = {2};
  spec.seeds = {1};
  const CurveReport report = run_curve(spec, pool);
  ASSERT_EQ(report.results.size(), 1u);
  const ExperimentResult& r = report.results[0];
  // Recompute the record from scratch.
  const SimilarityMatrix sim = build_similarity_matrix(pool, {});
  const DeferralLabeling l = label_pool(pool);
  const PriorRejector prior = PriorRejector::from_pool(pool, 0.5);
  const TeachingSet set = greedy_select_consistent(l, sim, prior, 2);
  const double loss =
      learner_loss(make_learner(prior, sim, set), l.costs, all_of(pool.size()));
  const double n = static_cast<double>(pool.size());
  EXPECT_DOUBLE_EQ(r.loss, loss / n);
  EXPECT_DOUBLE_EQ(r.oracle_gap, 100.0 * (loss - oracle_loss(l, all_of(pool.size()))) / n);
  EXPECT_EQ(r.method, "consistent_radius");
  EXPECT_EQ(r.condition, "full_info");
  EXPECT_GE(r.runtime_ms, 0.0);
}

TEST(RunCurve, PrefixRecordsMatchIndependentRuns) {
  const TeachingPool pool = small_world(6);
  for (const char* cond : {"full_info", "noisy_radius", "missing_h"}) {
    CurveSpec spec;
    spec.methods = {Method::kConsistentRadius, Method::kDoubleGreedy, Method::kRandom,
                    Method::kAiBehavior};
    spec.budgets = {1, 3, 6};
    spec.seeds = {11};
    spec.condition = parse_condition(cond);
    const CurveReport full = run_curve(spec, pool);
    for (std::size_t t : spec.budgets) {
      CurveSpec single = spec;
      single.budgets = {t};
      const CurveReport part = run_curve(single, pool);
      for (const ExperimentResult& p : part.results) {
        const auto it = std::find_if(full.results.begin(), full.results.end(),
                                     [&](const ExperimentResult& f) {
                                       return f.method == p.method && f.budget == t;
                                     });
        ASSERT_NE(it, full.results.end());
        EXPECT_EQ(it->loss, p.loss) << p.method << " " << cond << " t=" << t;
      }
    }
  }
}

TEST(RunCurve, GapsNonNegativeAndGreedyMonotone) {
  CurveSpec spec;
  spec.methods = kAllMethods;
  spec.budgets = {0, 1, 2, 4, 8};
  spec.seeds = {1, 2, 3};
  for (const char* cond : {"full_info", "missing_g0", "noisy_radius", "missing_h",
                           "no_info_noise", "h_delta(0.5)"}) {
    spec.condition = parse_condition(cond);
    const CurveReport report = run_curve(spec, small_world);
    EXPECT_EQ(report.dominance_violations, 0u) << cond;
    EXPECT_EQ(report.monotone_violations, 0u) << cond;
    for (const ExperimentResult& r : report.results) EXPECT_GE(r.oracle_gap, -1e-9);
  }
}

TEST(RunCurve, SplitEvaluatesOnValidation) {
  CurveSpec spec;
  spec.methods = {Method::kDoubleGreedy};
  spec.budgets = {0, 3};
  spec.seeds = {1};
  spec.split_fraction = 0.5;
  const CurveReport report = run_curve(spec, small_world);
  ASSERT_EQ(report.results.size(), 2u);
  EXPECT_EQ(report.dominance_violations, 0u);
}

TEST(RunCurve, ThreadsDoNotChangeResults) {
  CurveSpec spec;
  spec.methods = {Method::kConsistentRadius, Method::kRandom};
  spec.budgets = {1, 4};
  spec.seeds = {1, 2, 3, 4, 5};
  const CurveReport one = run_curve(spec, small_world);
  spec.threads = 3;
  const CurveReport three = run_curve(spec, small_world);
  ASSERT_EQ(one.results.size(), three.results.size());
  for (std::size_t k = 0; k < one.results.size(); ++k) {
    EXPECT_EQ(one.results[k].method, three.results[k].method);
    EXPECT_EQ(one.results[k].seed, three.results[k].seed);
    EXPECT_EQ(one.results[k].loss, three.results[k].loss);
  }
}

TEST(RunCurve, Errors) {
  CurveSpec spec;
  spec.methods = {Method::kBruteForce};
  spec.budgets = {2};
  spec.seeds = {1};
  EXPECT_THROW(run_curve(spec, small_world(1)), ValidationError);
  spec.methods = {Method::kRandom};
  spec.budgets = {3, 1};
  EXPECT_THROW(run_curve(spec, small_world(1)), ValidationError);
}

TEST(Submodularity, WholeDomainPointReachesMaximum) {
  TeachingPool pool = line_pool(true);
  for (auto& p : pool.points) {
    p.human_err = 0.8;
    p.ai_err = 0.1;
    p.prior_reject = false;
  }
  const SimilarityMatrix sim = build_similarity_matrix(pool, {});
  const DeferralLabeling l = label_pool(pool);
  const auto r = consistent_radius(2, l, sim);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->exterior, kNoExterior);
  HumanLearnerState state(PriorRejector::from_pool(pool, 0.5), sim);
  const auto eval = all_of(4);
  const double empty = learner_loss(state, l.costs, eval);
  state.memorize({2, r->gamma, true});
  EXPECT_DOUBLE_EQ(empty - learner_loss(state, l.costs, eval),
                   empty - oracle_loss(l, eval));
}

TEST(Submodularity, RandomPoolsHaveNoViolations) {
  const PropertyReport report = run_submodularity_suite(200, 17);
  EXPECT_EQ(report.trials, 200u);
  EXPECT_EQ(report.violations(), 0u);
  for (const auto& w : report.witnesses) ADD_FAILURE() << w;
}

TEST(Submodularity, DeterministicPerSeed) {
  const TeachingPool pool = random_small_world(5);
  const PropertyReport a = verify_submodularity(pool, 20, 3);
  const PropertyReport b = verify_submodularity(pool, 20, 3);
  EXPECT_EQ(a.trials, b.trials);
  EXPECT_EQ(a.witnesses, b.witnesses);
  EXPECT_LE(random_small_world(9).size(), 12u);
}

TEST(GreedyBound, UselessTeachingAndLinePool) {
  // Prior already optimal: L(D*) = L(empty) and the bound is L(empty).
  std::vector<BoundInstance> useless = {{line_pool(false), 2}};
  EXPECT_EQ(verify_greedy_bound(useless).violations(), 0u);

  // Greedy is optimal on the line, strictly inside the bound.
  const TeachingPool pool = line_pool(true);
  std::vector<BoundInstance> line = {{pool, 2}};
  const PropertyReport report = verify_greedy_bound(line);
  EXPECT_EQ(report.trials, 1u);
  EXPECT_EQ(report.violations(), 0u);
  const SimilarityMatrix sim = build_similarity_matrix(pool, {});
  const DeferralLabeling l = label_pool(pool);
  const PriorRejector prior = PriorRejector::from_pool(pool, 0.5);
  const BruteForceResult best = brute_force_select(l, sim, prior, 2);
  const double empty = learner_loss(HumanLearnerState(prior, sim), l.costs, all_of(4));
  const double bound = (1.0 - std::exp(-1.0)) * best.loss + std::exp(-1.0) * empty;
  EXPECT_EQ(best.loss, 0.0);
  EXPECT_LT(0.0, bound);
}

TEST(GreedyBound, RandomInstances) {
  const auto instances = random_bound_instances(40, 8);
  ASSERT_EQ(instances.size(), 40u);
  for (const BoundInstance& inst : instances) {
    EXPECT_LE(inst.pool.size(), kBoundMaxPoints);
    EXPECT_GE(inst.budget, 1u);
    EXPECT_LE(inst.budget, kBoundMaxBudget);
  }
  EXPECT_EQ(verify_greedy_bound(instances).violations(), 0u);
}

TEST(GreedyBound, CapExceeded) {
  std::vector<BoundInstance> big = {{small_world(1), 2}};
  EXPECT_THROW(verify_greedy_bound(big), ValidationError);
}

TEST(Csv, EmptyIsHeaderOnly) {
  std::ostringstream out;
  write_results_csv(out, {});
  EXPECT_EQ(out.str(), "method,condition,seed,budget,loss,oracle_gap,runtime_ms\n");
  std::istringstream in(out.str());
  EXPECT_TRUE(read_results_csv(in).empty());
}

TEST(Csv, OneRecordRoundTrips) {
  ExperimentResult r;
  r.method = "double_greedy";
  r.condition = "h_delta(0.25)";
  r.seed = 18446744073709551615ULL;
  r.budget = 30;
  r.loss = 0.1 + 0.2;
  r.oracle_gap = 6.380000000000001;
  r.runtime_ms = 1e-7;
  const std::vector<ExperimentResult> rows = {r};
  std::stringstream buffer;
  write_results_csv(buffer, rows);
  std::string line;
  std::size_t lines = 0;
  for (std::istringstream count(buffer.str()); std::getline(count, line);) ++lines;
  EXPECT_EQ(lines, 2u);
  const auto back = read_results_csv(buffer);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], r);
}

TEST(Csv, RejectsBadInput) {
  std::istringstream bad_header("a,b\n");
  EXPECT_THROW(read_results_csv(bad_header), ValidationError);
  std::istringstream bad_row(
      "method,condition,seed,budget,loss,oracle_gap,runtime_ms\nx,y,1,2,zz,1,1\n");
  EXPECT_THROW(read_results_csv(bad_row), ValidationError);
}

// The plot's error bars are recomputed from the CSV by hand.
TEST(Svg, PolylinePerMethodAndStddevBars) {
  CurveSpec spec;
  spec.methods = {Method::kConsistentRadius, Method::kRandom, Method::kKMedoids};
  spec.budgets = {0, 2, 5};
  for (std::uint64_t s = 1; s <= 10; ++s) spec.seeds.push_back(s);
  const CurveReport report = run_curve(spec, small_world);

  const auto dir = std::filesystem::temp_directory_path() / "deferteach_emit";
  std::filesystem::create_directories(dir);
  emit_results(report.results, dir / "r.csv", dir / "r.svg");
  std::ifstream csv(dir / "r.csv");
  const auto rows = read_results_csv(csv);
  ASSERT_EQ(rows.size(), 3u * 3u * 10u);

  std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
  for (const auto& r : rows) groups[{r.method, r.budget}].push_back(r.oracle_gap);

  std::ifstream svg_in(dir / "r.svg");
  const std::string svg((std::istreambuf_iterator<char>(svg_in)), {});
  std::size_t polylines = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1)) {
    ++polylines;
  }
  EXPECT_EQ(polylines, 3u);
  const std::regex bar(
      "data-series=\"([a-z_]+)\" data-budget=\"([0-9]+)\" data-mean=\"([^\"]+)\" "
      "data-stddev=\"([^\"]+)\"");
  std::size_t bars = 0;
  for (std::sregex_iterator it(svg.begin(), svg.end(), bar), end; it != end; ++it) {
    const auto key = std::make_pair((*it)[1].str(), std::stoul((*it)[2].str()));
    const auto& v = groups.at(key);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (v.size() - 1));
    EXPECT_NEAR(std::stod((*it)[3].str()), mean, 1e-9);
    EXPECT_NEAR(std::stod((*it)[4].str()), sd, 1e-9);
    ++bars;
  }
  EXPECT_EQ(bars, groups.size());
  std::filesystem::remove_all(dir);
}

TEST(Emit, UnwritablePath) {
  EXPECT_THROW(emit_results({}, "/nonexistent-dir/x/results.csv"), std::runtime_error);
}

TEST(Aggregate, SeriesNamesIncludeConditionWhenMixed) {
  std::vector<ExperimentResult> rows(2);
  rows[0].method = rows[1].method = "random";
  rows[0].condition = "full_info";
  rows[1].condition = "missing_h";
  const auto points = aggregate_curves(rows);
  ASSERT_EQ(points.size(), 2u);
  EXPECT_EQ(points[0].series, "random/full_info");
  EXPECT_EQ(points[0].stddev, 0.0);
}

TEST(RunConfig, ParseAndAccessors) {
  std::istringstream in(
      "# experiment\n"
      "kernel.bandwidth = 2.5\n"
      "selection.method = double_greedy  # trailing comment\n"
      "selection.budget=30\n"
      "noise.radius = true\n"
      "\n");
  RunConfig config = RunConfig::parse(in);
  EXPECT_EQ(config.get_real("kernel.bandwidth", 1.0), 2.5);
  EXPECT_EQ(config.get_string("selection.method", ""), "double_greedy");
  EXPECT_EQ(config.get_count("selection.budget", 1), 30u);
  EXPECT_TRUE(config.get_bool("noise.radius", false));
  EXPECT_FALSE(config.get_bool("noise.drop_g0", false));
  EXPECT_EQ(config.get_count("seeds.count", 10), 10u);
  config.set("seeds.count", "3");
  EXPECT_EQ(config.get_count("seeds.count", 10), 3u);
  EXPECT_THROW(config.set("bogus", "1"), ValidationError);
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  std::istringstream unknown("kernel.width = 2\n");
  try {
    RunConfig::parse(unknown);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  std::istringstream no_eq("kernel.bandwidth 2\n");
  EXPECT_THROW(RunConfig::parse(no_eq), ValidationError);
  std::istringstream bad("selection.budget = -3\nnoise.radius = maybe\n");
  const RunConfig config = RunConfig::parse(bad);
  EXPECT_THROW(config.get_count("selection.budget", 1), ValidationError);
  EXPECT_THROW(config.get_bool("noise.radius", false), ValidationError);
}

}  // namespace
}  // namespace deferteach
