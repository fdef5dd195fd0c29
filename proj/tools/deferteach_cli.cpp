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

// deferteach: generate worlds, select teaching sets, evaluate and sweep.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "deferteach/dataset.hpp"
#include "deferteach/deferral.hpp"
#include "deferteach/harness.hpp"
#include "deferteach/human_model.hpp"
#include "deferteach/selection.hpp"
#include "deferteach/simgen.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace deferteach {
namespace {

constexpr int kExitValidation = 1;
constexpr int kExitViolation = 2;

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string config_path;
  std::string out_dir = ".";
  RunConfig config;
};

struct WorldOptions {
  std::string world;  // preset name or gaussian / expert
  std::optional<std::size_t> k_p;
  std::optional<std::size_t> points_per_cluster;
  std::optional<std::size_t> dim;
  std::optional<double> separation;
  std::optional<double> spread;
};

struct PoolOptions {
  std::string pool_path;
  bool lenient = false;
};

struct SelectOptions {
  PoolOptions pool;
  std::string method;
  std::optional<std::size_t> budget;
  std::optional<double> alpha;
  std::optional<double> bandwidth;
  std::size_t knn = 1;
  std::size_t radius_candidates = 0;
  std::string output = "teaching_set.json";
};

struct EvalOptions {
  PoolOptions pool;
  std::string set_path;
  std::optional<double> bandwidth;
  std::string output = "eval.json";
};

struct CurveOptions {
  PoolOptions pool;
  WorldOptions world;
  std::vector<std::string> methods = {"consistent_radius", "double_greedy", "random"};
  std::vector<std::size_t> budgets = {0, 5, 10, 20, 30};
  std::optional<std::size_t> seeds;
  std::string condition;
  std::optional<double> bandwidth;
  double split = 0.0;
  std::size_t threads = 1;
  bool svg = true;
};

struct VerifyOptions {
  std::size_t triples = 500;
  std::size_t instances = 200;
};

struct PlotOptions {
  std::string csv_path;
  std::string output = "results.svg";
};

fs::path out_path(const GlobalOptions& g, const std::string& name) {
  const fs::path p(name);
  return p.is_absolute() ? p : fs::path(g.out_dir) / p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
  if (!out) throw ValidationError("write failed for " + path.string());
}

KernelDescriptor kernel_for(const GlobalOptions& g, std::optional<double> bandwidth) {
  KernelDescriptor kernel;
  kernel.bandwidth = bandwidth.value_or(g.config.get_real("kernel.bandwidth", 1.0));
  return kernel;
}

TeachingPool load_input_pool(const PoolOptions& options) {
  if (options.pool_path.empty()) throw ValidationError("--pool is required");
  LoadOptions load;
  load.strict = !options.lenient;
  return load_pool(options.pool_path, load);
}

// Knowledge condition from the config's noise keys; at most one may be set.
ExperimentCondition condition_from_config(const RunConfig& config) {
  std::vector<ExperimentCondition> picked;
  if (config.get_bool("noise.drop_g0", false)) {
    picked.push_back({ExperimentCondition::Kind::kMissingG0, 0.0});
  }
  if (config.get_bool("noise.radius", false)) {
    picked.push_back({ExperimentCondition::Kind::kNoisyRadius, 0.0});
  }
  if (const double d = config.get_real("noise.h_delta", 0.0); d > 0.0) {
    picked.push_back(parse_condition("h_delta(" + config.get_string("noise.h_delta", "0") + ")"));
  }
  if (picked.size() > 1) {
    throw ValidationError("noise.* keys select more than one condition");
  }
  return picked.empty() ? ExperimentCondition{} : picked.front();
}

ClusterWorldConfig cluster_config(const GlobalOptions& g, const WorldOptions& w,
                                  std::uint64_t seed) {
  ClusterWorldConfig config = preset_setting(w.world, seed);
  config.clusters = w.k_p.value_or(g.config.get_count("world.k_p", config.clusters));
  if (w.points_per_cluster) config.points_per_cluster = *w.points_per_cluster;
  if (w.dim) config.dim = *w.dim;
  if (w.separation) config.separation = *w.separation;
  if (w.spread) config.spread = *w.spread;
  return config;
}

std::string resolved_world(const GlobalOptions& g, const WorldOptions& w) {
  return w.world.empty() ? g.config.get_string("world.preset", "B") : w.world;
}

TeachingPool make_world(const GlobalOptions& g, WorldOptions w, std::uint64_t seed,
                        json* echo) {
  w.world = resolved_world(g, w);
  if (w.world == "gaussian") {
    GaussianWorldConfig config = random_gaussian_config(seed);
    if (echo) *echo = {{"world", "gaussian"}, {"seed", seed}, {"samples", config.samples},
                       {"prior_threshold", config.prior_threshold},
                       {"group_one_fraction", config.group_one_fraction}};
    return gen_gaussian_world(config);
  }
  if (w.world == "expert") {
    ExpertWorldConfig config;
    config.seed = seed;
    if (w.points_per_cluster) config.points_per_class = *w.points_per_cluster;
    if (w.dim) config.dim = *w.dim;
    if (w.separation) config.separation = *w.separation;
    if (w.spread) config.spread = *w.spread;
    if (echo) *echo = {{"world", "expert"}, {"seed", seed}, {"classes", config.classes},
                       {"expert_classes", config.expert_classes},
                       {"points_per_class", config.points_per_class}, {"dim", config.dim},
                       {"spread", config.spread}, {"separation", config.separation}};
    return gen_expert_world(config);
  }
  const ClusterWorldConfig config = cluster_config(g, w, seed);
  if (echo) {
    *echo = {{"world", w.world},
             {"seed", seed},
             {"k_p", config.clusters},
             {"points_per_cluster", config.points_per_cluster},
             {"dim", config.dim},
             {"spread", config.spread},
             {"separation", config.separation},
             {"ai_beta_params", {config.ai_alpha, config.ai_beta}},
             {"human_beta_params", {config.human_alpha, config.human_beta}},
             {"epsilon", config.epsilon}};
  }
  return gen_cluster_world(config);
}

int run_gen(const GlobalOptions& g, const WorldOptions& w) {
  json echo;
  const TeachingPool pool = make_world(g, w, g.seed, &echo);
  fs::create_directories(g.out_dir);
  save_pool(out_path(g, "pool.jsonl"), pool);
  write_text(out_path(g, "gen_config.json"), echo.dump(2) + "\n");
  spdlog::info("wrote {} points to {}", pool.size(), out_path(g, "pool.jsonl").string());
  return 0;
}

int run_select(const GlobalOptions& g, const SelectOptions& s) {
  const TeachingPool pool = load_input_pool(s.pool);
  validate_pool(pool);
  const ExperimentCondition condition = condition_from_config(g.config);

  // The teacher sees a possibly corrupted view of the human.
  TeachingPool view = pool;
  if (condition.kind == ExperimentCondition::Kind::kMissingG0) {
    view = corrupt_knowledge(pool, KnowledgeCondition::missing_g0(), g.seed);
  } else if (condition.kind == ExperimentCondition::Kind::kHDelta) {
    view = corrupt_knowledge(pool, KnowledgeCondition::h_delta(condition.delta), g.seed);
  }
  const std::vector<PointIndex> teach = view.teach_indices();
  const TeachingPool teach_view = view.subset(teach);

  SelectionConfig config;
  config.method = parse_method(
      s.method.empty() ? g.config.get_string("selection.method", "consistent_radius") : s.method);
  config.budget = s.budget.value_or(g.config.get_count("selection.budget", 10));
  config.alpha = s.alpha.value_or(g.config.get_real("selection.alpha", 0.0));
  config.seed = g.seed;
  config.knn = s.knn;
  config.radius_candidates = s.radius_candidates;
  validate_config(config);

  const SimilarityMatrix sim = build_similarity_matrix(teach_view, kernel_for(g, s.bandwidth));
  const DeferralLabeling labeling = label_pool(teach_view);
  const PriorRejector prior = PriorRejector::from_pool(teach_view, 0.5);
  TeachingSet set = select(config, labeling, sim, prior);
  if (condition.noisy_radius()) {
    set = inject_radius_noise(set, derive_seed(g.seed, {stream_tag("curve-noise")}));
  }
  // Report pool indices rather than teaching-part indices.
  for (TeachingEntry& e : set.entries) {
    e.index = teach[e.index];
    e.interior = teach[e.interior];
    if (e.exterior != kNoExterior) e.exterior = teach[e.exterior];
  }
  fs::create_directories(g.out_dir);
  save_teaching_set(out_path(g, s.output), set);
  std::cout << teaching_set_to_json(set) << "\n";
  return 0;
}

int run_eval(const GlobalOptions& g, const EvalOptions& e) {
  const TeachingPool pool = load_input_pool(e.pool);
  validate_pool(pool);
  if (e.set_path.empty()) throw ValidationError("--set is required");
  const TeachingSet set = load_teaching_set(e.set_path);
  const SimilarityMatrix sim = build_similarity_matrix(pool, kernel_for(g, e.bandwidth));
  const DeferralLabeling labeling = label_pool(pool);
  const PriorRejector prior = PriorRejector::from_pool(pool, 0.5);
  for (const TeachingEntry& entry : set.entries) {
    if (entry.index >= pool.size()) {
      throw ValidationError("teaching set index " + std::to_string(entry.index) +
                            " is outside the pool");
    }
  }
  const HumanLearnerState learner = make_learner(prior, sim, set);
  const std::vector<PointIndex> eval = pool.eval_indices();
  const double n = static_cast<double>(eval.size());
  const double loss = learner_loss(learner, labeling.costs, eval);
  const double oracle = oracle_loss(labeling, eval);
  const double empty = learner_loss(HumanLearnerState(prior, sim), labeling.costs, eval);
  const LossDecomposition parts = loss_decomposition(learner, labeling.costs, eval);
  const json report = {{"teaching_set_size", set.size()},
                       {"eval_points", eval.size()},
                       {"loss", loss / n},
                       {"oracle_loss", oracle / n},
                       {"prior_loss", empty / n},
                       {"oracle_gap", 100.0 * (loss - oracle) / n},
                       {"learned_loss", parts.learned / n},
                       {"prior_fallback_loss", parts.prior / n}};
  fs::create_directories(g.out_dir);
  write_text(out_path(g, e.output), report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";
  return 0;
}

int run_curve_cmd(const GlobalOptions& g, const CurveOptions& c) {
  CurveSpec spec;
  for (const std::string& m : c.methods) spec.methods.push_back(parse_method(m));
  spec.budgets = c.budgets;
  const std::size_t count = c.seeds.value_or(g.config.get_count("seeds.count", 10));
  for (std::size_t k = 0; k < count; ++k) spec.seeds.push_back(g.seed + k);
  spec.condition =
      c.condition.empty() ? condition_from_config(g.config) : parse_condition(c.condition);
  spec.alpha = g.config.get_real("selection.alpha", 1.0);
  spec.kernel = kernel_for(g, c.bandwidth);
  spec.split_fraction = c.split;
  spec.threads = c.threads;

  CurveReport report;
  if (!c.pool.pool_path.empty()) {
    report = run_curve(spec, load_input_pool(c.pool));
  } else {
    report = run_curve(spec, [&](std::uint64_t seed) {
      return make_world(g, c.world, seed, nullptr);
    });
  }
  fs::create_directories(g.out_dir);
  emit_results(report.results, out_path(g, "results.csv"),
               c.svg ? std::optional<fs::path>(out_path(g, "results.svg")) : std::nullopt);
  for (const CurvePoint& p : aggregate_curves(report.results)) {
    std::cout << p.series << " budget=" << p.budget << " gap=" << p.mean << " +- "
              << p.stddev << "\n";
  }
  if (report.monotone_violations + report.dominance_violations > 0) {
    spdlog::warn("{} monotonicity and {} dominance violations", report.monotone_violations,
                 report.dominance_violations);
  }
  return 0;
}

json report_json(const PropertyReport& r) {
  return {{"trials", r.trials},
          {"positivity_violations", r.positivity_violations},
          {"monotonicity_violations", r.monotonicity_violations},
          {"diminishing_returns_violations", r.diminishing_returns_violations},
          {"bound_violations", r.bound_violations},
          {"witnesses", r.witnesses}};
}

int run_verify(const GlobalOptions& g, const VerifyOptions& v) {
  const PropertyReport sub = run_submodularity_suite(v.triples, g.seed);
  const PropertyReport bound =
      verify_greedy_bound(random_bound_instances(v.instances, g.seed));
  const json report = {{"submodularity", report_json(sub)}, {"greedy_bound", report_json(bound)}};
  fs::create_directories(g.out_dir);
  write_text(out_path(g, "verify.json"), report.dump(2) + "\n");
  std::cout << "submodularity: " << sub.trials << " triples, " << sub.violations()
            << " violations\n"
            << "greedy bound: " << bound.trials << " instances, " << bound.violations()
            << " violations\n";
  return sub.violations() + bound.violations() == 0 ? 0 : kExitViolation;
}

int run_plot(const GlobalOptions& g, const PlotOptions& p) {
  std::ifstream in(p.csv_path);
  if (!in) throw ValidationError("cannot open " + p.csv_path);
  const std::vector<ExperimentResult> rows = read_results_csv(in);
  fs::create_directories(g.out_dir);
  write_text(out_path(g, p.output), render_svg(rows));
  return 0;
}

void add_pool_options(CLI::App* sub, PoolOptions& pool) {
  sub->add_option("--pool", pool.pool_path, "Pool in JSON Lines format")->check(CLI::ExistingFile);
  sub->add_flag("--lenient", pool.lenient, "Warn on unknown pool keys instead of failing");
}

void add_world_options(CLI::App* sub, WorldOptions& w) {
  sub->add_option("--world", w.world, "A, B, gaussian or expert (default: world.preset or B)");
  sub->add_option("--clusters", w.k_p, "Cluster count (default: world.k_p or 15)");
  sub->add_option("--points-per-cluster", w.points_per_cluster, "Points per cluster or class");
  sub->add_option("--dim", w.dim, "Embedding dimension");
  sub->add_option("--separation", w.separation, "Minimum distance between centers");
  sub->add_option("--spread", w.spread, "Per-coordinate standard deviation around a center");
}

int main_impl(int argc, char** argv) {
  CLI::App app{"Teaching a human when to defer to an AI"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--config", g.config_path, "key = value configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress");

  WorldOptions gen_world;
  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic world as pool.jsonl");
  add_world_options(gen, gen_world);

  SelectOptions sel;
  CLI::App* select_cmd = app.add_subcommand("select", "Select one teaching set");
  add_pool_options(select_cmd, sel.pool);
  select_cmd->add_option("--method", sel.method, "Selector name");
  select_cmd->add_option("--budget", sel.budget, "Teaching set size");
  select_cmd->add_option("--alpha", sel.alpha, "Consistency level for alpha_greedy");
  select_cmd->add_option("--bandwidth", sel.bandwidth, "RBF bandwidth");
  select_cmd->add_option("--knn", sel.knn, "Neighbors for ai_behavior");
  select_cmd->add_option("--radius-candidates", sel.radius_candidates,
                         "Radii tried per point by double_greedy (0 = all)");
  select_cmd->add_option("--output", sel.output, "Teaching set file name");

  EvalOptions ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a teaching set on a pool");
  add_pool_options(eval_cmd, ev.pool);
  eval_cmd->add_option("--set", ev.set_path, "Teaching set JSON")->check(CLI::ExistingFile);
  eval_cmd->add_option("--bandwidth", ev.bandwidth, "RBF bandwidth");
  eval_cmd->add_option("--output", ev.output, "Report file name");

  CurveOptions cv;
  CLI::App* curve = app.add_subcommand("curve", "Sweep budgets and seeds to CSV and SVG");
  add_pool_options(curve, cv.pool);
  add_world_options(curve, cv.world);
  curve->add_option("--methods", cv.methods, "Selectors to compare")->delimiter(',');
  curve->add_option("--budgets", cv.budgets, "Ascending budgets")->delimiter(',');
  curve->add_option("--seeds", cv.seeds, "Seed count (default: seeds.count or 10)");
  curve->add_option("--condition", cv.condition, "Knowledge condition");
  curve->add_option("--bandwidth", cv.bandwidth, "RBF bandwidth");
  curve->add_option("--split", cv.split, "Teaching fraction (0 = no split)");
  curve->add_option("--threads", cv.threads, "Worker threads over seeds");
  curve->add_flag("!--no-svg", cv.svg, "Skip the plot");

  VerifyOptions vf;
  CLI::App* verify = app.add_subcommand("verify", "Check submodularity and the greedy bound");
  verify->add_option("--triples", vf.triples, "Submodularity triples")->capture_default_str();
  verify->add_option("--instances", vf.instances, "Bound instances")->capture_default_str();

  PlotOptions pl;
  CLI::App* plot = app.add_subcommand("plot", "Render a results CSV as SVG");
  plot->add_option("--csv", pl.csv_path, "Results CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--output", pl.output, "SVG file name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }
  spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    if (!g.config_path.empty()) g.config = RunConfig::load(g.config_path);
    if (gen->parsed()) return run_gen(g, gen_world);
    if (select_cmd->parsed()) return run_select(g, sel);
    if (eval_cmd->parsed()) return run_eval(g, ev);
    if (curve->parsed()) return run_curve_cmd(g, cv);
    if (verify->parsed()) return run_verify(g, vf);
    if (plot->parsed()) return run_plot(g, pl);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what();
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    std::cerr << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace
}  // namespace deferteach

int main(int argc, char** argv) { return deferteach::main_impl(argc, argv); }
