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

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

#include "deferteach/deferral.hpp"
#include "deferteach/human_model.hpp"
#include "deferteach/random.hpp"

namespace deferteach {

namespace {

constexpr double kLossTolerance = 1e-9;

std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) {
    throw ValidationError("bad number for " + what + ": \"" + text + "\"");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ValidationError("bad count for " + what + ": \"" + text + "\"");
  }
  return v;
}

}  // namespace

std::string ExperimentCondition::name() const {
  switch (kind) {
    case Kind::kFullInfo:
      return "full_info";
    case Kind::kMissingG0:
      return "missing_g0";
    case Kind::kNoisyRadius:
      return "noisy_radius";
    case Kind::kMissingH:
      return "missing_h";
    case Kind::kNoInfoNoise:
      return "no_info_noise";
    case Kind::kPriorOnly:
      return "prior_only";
    case Kind::kHDelta:
      return "h_delta(" + format_real(delta) + ")";
  }
  return "unknown";
}

ExperimentCondition parse_condition(const std::string& name) {
  using Kind = ExperimentCondition::Kind;
  static const std::pair<const char*, Kind> simple[] = {
      {"full_info", Kind::kFullInfo},       {"missing_g0", Kind::kMissingG0},
      {"noisy_radius", Kind::kNoisyRadius}, {"missing_h", Kind::kMissingH},
      {"no_info_noise", Kind::kNoInfoNoise}, {"prior_only", Kind::kPriorOnly},
  };
  for (const auto& [text, kind] : simple) {
    if (name == text) return {kind, 0.0};
  }
  const std::string prefix = "h_delta(";
  if (name.rfind(prefix, 0) == 0 && name.back() == ')') {
    const double d =
        parse_real(name.substr(prefix.size(), name.size() - prefix.size() - 1),
                   "h_delta");
    if (!(d >= 0.0 && d <= 0.5)) throw ValidationError("h_delta must lie in [0, 0.5]");
    return {Kind::kHDelta, d};
  }
  throw ValidationError("unknown condition \"" + name + "\"");
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

TeachingPool teacher_view(const TeachingPool& pool,
                          const ExperimentCondition& condition,
                          std::uint64_t seed) {
  using Kind = ExperimentCondition::Kind;
  switch (condition.kind) {
    case Kind::kMissingG0:
      return corrupt_knowledge(pool, KnowledgeCondition::missing_g0(), seed);
    case Kind::kMissingH:
      return corrupt_knowledge(pool, KnowledgeCondition::missing_h(), seed);
    case Kind::kNoInfoNoise: {
      const TeachingPool no_prior =
          corrupt_knowledge(pool, KnowledgeCondition::missing_g0(), seed);
      return corrupt_knowledge(no_prior, KnowledgeCondition::missing_h(), seed);
    }
    case Kind::kHDelta:
      return corrupt_knowledge(pool, KnowledgeCondition::h_delta(condition.delta),
                               seed);
    case Kind::kFullInfo:
    case Kind::kNoisyRadius:
    case Kind::kPriorOnly:
      break;
  }
  return pool;
}

// Maps entries selected on the teaching sub-pool back to pool indices.
TeachingSet to_pool_indices(const TeachingSet& local,
                            std::span<const PointIndex> teach) {
  TeachingSet out = local;
  for (TeachingEntry& e : out.entries) {
    e.index = teach[e.index];
    e.interior = teach[e.interior];
    if (e.exterior != kNoExterior) e.exterior = teach[e.exterior];
  }
  return out;
}

bool is_alpha_one_greedy(Method method, double alpha) {
  return method == Method::kConsistentRadius ||
         (method == Method::kAlphaGreedy && alpha == 1.0);
}

struct SeedOutcome {
  std::vector<ExperimentResult> results;
  std::size_t monotone_violations = 0;
  std::size_t dominance_violations = 0;
  std::vector<std::string> witnesses;
};

SeedOutcome run_seed(const CurveSpec& spec, TeachingPool pool,
                     std::uint64_t seed) {
  validate_pool(pool);
  if (spec.split_fraction > 0.0) {
    pool = split_pool(pool, spec.split_fraction,
                      derive_seed(seed, {stream_tag("curve-split")}));
  }
  const SimilarityMatrix sim = build_similarity_matrix(pool, spec.kernel);
  const DeferralLabeling truth = label_pool(pool);
  const PriorRejector true_prior = PriorRejector::from_pool(pool, spec.prior_epsilon);
  const std::vector<PointIndex> teach = pool.teach_indices();
  const std::vector<PointIndex> eval = pool.eval_indices();
  if (eval.empty() || teach.empty()) {
    throw ValidationError("split leaves no teaching or evaluation points");
  }
  const double oracle = oracle_loss(truth, eval);
  const double n_eval = static_cast<double>(eval.size());
  const SimilarityMatrix sim_teach = sim.submatrix(teach);
  const std::size_t max_budget = spec.budgets.empty() ? 0 : spec.budgets.back();

  SeedOutcome outcome;
  for (Method method : spec.methods) {
    const std::string name = method_name(method);
    const std::uint64_t cell = derive_seed(seed, {stream_tag(name.c_str())});
    const TeachingPool view = teacher_view(pool, spec.condition, cell).subset(teach);
    const DeferralLabeling labeling = label_pool(view);
    const PriorRejector prior = PriorRejector::from_pool(view, spec.prior_epsilon);

    SelectionConfig config;
    config.method = method;
    config.alpha = spec.alpha;
    config.seed = cell;
    config.radius_candidates = spec.radius_candidates;
    config.knn = spec.knn;

    // (budget, local teaching set, runtime)
    std::vector<std::tuple<std::size_t, TeachingSet, double>> runs;
    const bool teach_nothing =
        spec.condition.kind == ExperimentCondition::Kind::kPriorOnly;
    if (teach_nothing) {
      for (std::size_t b : spec.budgets) runs.emplace_back(b, TeachingSet{{}, b}, 0.0);
    } else if (is_prefix_consistent(method)) {
      TeachingSet full{{}, 0};
      double ms = 0.0;
      if (max_budget > 0) {
        config.budget = max_budget;
        const auto start = Clock::now();
        full = select(config, labeling, sim_teach, prior);
        ms = elapsed_ms(start);
      }
      for (std::size_t b : spec.budgets) runs.emplace_back(b, full.prefix(b), ms);

      if (is_alpha_one_greedy(method, spec.alpha)) {
        double previous = std::numeric_limits<double>::infinity();
        std::vector<PointIndex> everyone(view.size());
        std::iota(everyone.begin(), everyone.end(), PointIndex{0});
        for (std::size_t t = 0; t <= full.size(); ++t) {
          const auto learner = make_learner(prior, sim_teach, full.prefix(t));
          const double loss = learner_loss(learner, labeling.costs, everyone);
          if (loss > previous + kLossTolerance) {
            ++outcome.monotone_violations;
            outcome.witnesses.push_back("monotone: " + name + " seed " +
                                        std::to_string(seed) + " step " +
                                        std::to_string(t));
          }
          previous = loss;
        }
      }
    } else {
      for (std::size_t b : spec.budgets) {
        if (b == 0) {
          runs.emplace_back(b, TeachingSet{{}, 0}, 0.0);
          continue;
        }
        config.budget = b;
        const auto start = Clock::now();
        TeachingSet set = select(config, labeling, sim_teach, prior);
        runs.emplace_back(b, std::move(set), elapsed_ms(start));
      }
    }

    for (auto& [budget, local, ms] : runs) {
      TeachingSet taught = to_pool_indices(local, teach);
      if (spec.condition.noisy_radius()) {
        taught = inject_radius_noise(taught,
                                     derive_seed(cell, {stream_tag("curve-noise")}));
      }
      const auto learner = make_learner(true_prior, sim, taught);
      const double loss = learner_loss(learner, truth.costs, eval);
      if (oracle > loss + kLossTolerance) {
        ++outcome.dominance_violations;
        outcome.witnesses.push_back("dominance: " + name + " seed " +
                                    std::to_string(seed) + " budget " +
                                    std::to_string(budget));
      }
      ExperimentResult r;
      r.method = name;
      r.condition = spec.condition.name();
      r.seed = seed;
      r.budget = budget;
      r.loss = loss / n_eval;
      r.oracle_gap = 100.0 * (loss - oracle) / n_eval;
      r.runtime_ms = ms;
      outcome.results.push_back(std::move(r));
    }
  }
  return outcome;
}

}  // namespace

CurveReport run_curve(const CurveSpec& spec, const WorldSource& world) {
  if (!std::is_sorted(spec.budgets.begin(), spec.budgets.end())) {
    throw ValidationError("budgets must be sorted ascending");
  }
  if (spec.methods.empty()) throw ValidationError("no methods requested");
  if (spec.seeds.empty()) throw ValidationError("no seeds requested");
  if (spec.split_fraction != 0.0 &&
      !(spec.split_fraction > 0.0 && spec.split_fraction < 1.0)) {
    throw ValidationError("split fraction must be 0 or lie in (0, 1)");
  }

  std::vector<SeedOutcome> outcomes(spec.seeds.size());
  std::vector<std::exception_ptr> errors(spec.seeds.size());
  auto work = [&](std::size_t k) {
    try {
      outcomes[k] = run_seed(spec, world(spec.seeds[k]), spec.seeds[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, spec.threads);
  if (threads == 1) {
    for (std::size_t k = 0; k < spec.seeds.size(); ++k) work(k);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < spec.seeds.size(); k += threads) work(k);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  CurveReport report;
  for (auto& o : outcomes) {
    report.results.insert(report.results.end(), o.results.begin(), o.results.end());
    report.monotone_violations += o.monotone_violations;
    report.dominance_violations += o.dominance_violations;
    report.witnesses.insert(report.witnesses.end(), o.witnesses.begin(),
                            o.witnesses.end());
  }
  std::sort(report.results.begin(), report.results.end(),
            [](const ExperimentResult& a, const ExperimentResult& b) {
              return std::tie(a.method, a.condition, a.seed, a.budget) <
                     std::tie(b.method, b.condition, b.seed, b.budget);
            });
  return report;
}

CurveReport run_curve(const CurveSpec& spec, const TeachingPool& pool) {
  return run_curve(spec, [&pool](std::uint64_t) { return pool; });
}

PropertyReport& PropertyReport::operator+=(const PropertyReport& other) {
  trials += other.trials;
  positivity_violations += other.positivity_violations;
  monotonicity_violations += other.monotonicity_violations;
  diminishing_returns_violations += other.diminishing_returns_violations;
  bound_violations += other.bound_violations;
  witnesses.insert(witnesses.end(), other.witnesses.begin(), other.witnesses.end());
  return *this;
}

namespace {

constexpr std::size_t kMaxWitnesses = 20;

std::string describe(const std::vector<PointIndex>& set) {
  std::string s = "{";
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (k > 0) s += ",";
    s += std::to_string(set[k]);
  }
  return s + "}";
}

// Learner loss of a set of consistent-radius lessons over the whole pool.
class CoverageObjective {
 public:
  CoverageObjective(const TeachingPool& pool, const KernelDescriptor& kernel,
                    double prior_epsilon)
      : sim_(build_similarity_matrix(pool, kernel)),
        labeling_(label_pool(pool)),
        prior_(PriorRejector::from_pool(pool, prior_epsilon)),
        everyone_(pool.size()) {
    std::iota(everyone_.begin(), everyone_.end(), PointIndex{0});
    radii_.reserve(pool.size());
    for (PointIndex i = 0; i < pool.size(); ++i) {
      radii_.push_back(consistent_radius(i, labeling_, sim_));
      if (radii_.back()) candidates_.push_back(i);
    }
  }

  const std::vector<PointIndex>& candidates() const { return candidates_; }
  const SimilarityMatrix& sim() const { return sim_; }
  const DeferralLabeling& labeling() const { return labeling_; }
  const PriorRejector& prior() const { return prior_; }

  double loss(const std::vector<PointIndex>& set) const {
    HumanLearnerState state(prior_, sim_);
    for (PointIndex i : set) {
      state.memorize({i, radii_[i]->gamma, static_cast<bool>(labeling_.labels[i])});
    }
    return learner_loss(state, labeling_.costs, everyone_);
  }

 private:
  SimilarityMatrix sim_;
  DeferralLabeling labeling_;
  PriorRejector prior_;
  std::vector<PointIndex> everyone_;
  std::vector<std::optional<RadiusChoice>> radii_;
  std::vector<PointIndex> candidates_;
};

}  // namespace

PropertyReport verify_submodularity(const TeachingPool& pool,
                                    std::size_t trials, std::uint64_t seed,
                                    const KernelDescriptor& kernel,
                                    double prior_epsilon) {
  const CoverageObjective objective(pool, kernel, prior_epsilon);
  PropertyReport report;
  const auto& candidates = objective.candidates();
  if (candidates.empty()) return report;
  const double empty_loss = objective.loss({});
  auto gain = [&](const std::vector<PointIndex>& set) {
    return empty_loss - objective.loss(set);
  };

  Rng rng = make_rng(seed, {stream_tag("submodularity")});
  std::bernoulli_distribution coin(0.5);
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<PointIndex> perm = candidates;
    std::shuffle(perm.begin(), perm.end(), rng);
    const PointIndex l = perm[0];
    std::uniform_int_distribution<std::size_t> b_size(0, perm.size() - 1);
    std::vector<PointIndex> big(perm.begin() + 1,
                                perm.begin() + 1 + static_cast<std::ptrdiff_t>(b_size(rng)));
    std::vector<PointIndex> small;
    for (PointIndex x : big) {
      if (coin(rng)) small.push_back(x);
    }
    auto with_l = [l](std::vector<PointIndex> s) {
      s.push_back(l);
      return s;
    };
    const double f_a = gain(small), f_b = gain(big);
    const double f_al = gain(with_l(small)), f_bl = gain(with_l(big));
    ++report.trials;

    const std::string where = "A=" + describe(small) + " B=" + describe(big) +
                              " l=" + std::to_string(l);
    auto witness = [&](const std::string& what) {
      if (report.witnesses.size() < kMaxWitnesses) {
        report.witnesses.push_back(what + ": " + where);
      }
    };
    if (std::min({f_a, f_b, f_al, f_bl}) < -kLossTolerance) {
      ++report.positivity_violations;
      witness("positivity");
    }
    if (f_b < f_a - kLossTolerance || f_al < f_a - kLossTolerance ||
        f_bl < f_b - kLossTolerance) {
      ++report.monotonicity_violations;
      witness("monotonicity");
    }
    if (f_al - f_a < f_bl - f_b - kLossTolerance) {
      ++report.diminishing_returns_violations;
      witness("diminishing returns");
    }
  }
  return report;
}

TeachingPool random_small_world(std::uint64_t seed, std::size_t max_points) {
  if (max_points < 2) throw ValidationError("small worlds need at least 2 points");
  Rng rng = make_rng(seed, {stream_tag("small-world")});
  const std::size_t max_clusters = std::min<std::size_t>(4, max_points);
  std::uniform_int_distribution<std::size_t> clusters(2, max_clusters);
  ClusterWorldConfig config;
  config.clusters = clusters(rng);
  std::uniform_int_distribution<std::size_t> per(1, max_points / config.clusters);
  config.points_per_cluster = per(rng);
  config.dim = 2;
  config.spread = 1.0;
  config.separation = 1.5;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  config.epsilon = unit(rng);
  config.seed = rng();
  return gen_cluster_world(config);
}

PropertyReport run_submodularity_suite(std::size_t triples, std::uint64_t seed) {
  constexpr std::size_t kPerPool = 10;
  PropertyReport report;
  for (std::size_t p = 0; report.trials < triples; ++p) {
    const TeachingPool pool = random_small_world(derive_seed(seed, {p, 0}), 12);
    const std::size_t want = std::min(kPerPool, triples - report.trials);
    const PropertyReport part =
        verify_submodularity(pool, want, derive_seed(seed, {p, 1}));
    if (part.trials == 0) continue;
    report += part;
  }
  return report;
}

std::vector<BoundInstance> random_bound_instances(std::size_t count,
                                                  std::uint64_t seed) {
  std::vector<BoundInstance> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng = make_rng(seed, {stream_tag("bound-instance"), k});
    std::uniform_int_distribution<std::size_t> budget(1, kBoundMaxBudget);
    BoundInstance inst;
    inst.budget = budget(rng);
    inst.pool = random_small_world(rng(), kBoundMaxPoints);
    out.push_back(std::move(inst));
  }
  return out;
}

PropertyReport verify_greedy_bound(std::span<const BoundInstance> instances,
                                   const KernelDescriptor& kernel,
                                   double prior_epsilon) {
  const double inv_e = std::exp(-1.0);
  PropertyReport report;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const BoundInstance& inst = instances[k];
    if (inst.pool.size() > kBoundMaxPoints || inst.budget > kBoundMaxBudget) {
      throw ValidationError("bound instance " + std::to_string(k) +
                            " exceeds the brute-force caps");
    }
    const CoverageObjective objective(inst.pool, kernel, prior_epsilon);
    const TeachingSet greedy = greedy_select_consistent(
        objective.labeling(), objective.sim(), objective.prior(), inst.budget);
    std::vector<PointIndex> chosen;
    for (const TeachingEntry& e : greedy.entries) chosen.push_back(e.index);
    const double greedy_loss = objective.loss(chosen);
    const double empty_loss = objective.loss({});
    const BruteForceResult best = brute_force_select(
        objective.labeling(), objective.sim(), objective.prior(), inst.budget);
    const double bound = (1.0 - inv_e) * best.loss + inv_e * empty_loss;
    ++report.trials;
    if (greedy_loss > bound + kLossTolerance) {
      ++report.bound_violations;
      if (report.witnesses.size() < kMaxWitnesses) {
        report.witnesses.push_back("bound: instance " + std::to_string(k) +
                                   " greedy " + format_real(greedy_loss) +
                                   " > " + format_real(bound));
      }
    }
  }
  return report;
}

void write_results_csv(std::ostream& out,
                       std::span<const ExperimentResult> results) {
  out << "method,condition,seed,budget,loss,oracle_gap,runtime_ms\n";
  for (const ExperimentResult& r : results) {
    out << r.method << ',' << r.condition << ',' << r.seed << ',' << r.budget
        << ',' << format_real(r.loss) << ',' << format_real(r.oracle_gap) << ','
        << format_real(r.runtime_ms) << '\n';
  }
}

std::vector<ExperimentResult> read_results_csv(std::istream& in) {
  std::vector<ExperimentResult> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (lineno == 1) {
      if (trim(line) != "method,condition,seed,budget,loss,oracle_gap,runtime_ms") {
        throw ValidationError("unexpected CSV header", lineno);
      }
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (fields.size() != 7) throw ValidationError("expected 7 CSV fields", lineno);
    ExperimentResult r;
    r.method = fields[0];
    r.condition = fields[1];
    r.seed = parse_unsigned(fields[2], "seed");
    r.budget = parse_unsigned(fields[3], "budget");
    r.loss = parse_real(fields[4], "loss");
    r.oracle_gap = parse_real(fields[5], "oracle_gap");
    r.runtime_ms = parse_real(fields[6], "runtime_ms");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CurvePoint> aggregate_curves(std::span<const ExperimentResult> results) {
  bool several_conditions = false;
  for (const ExperimentResult& r : results) {
    if (r.condition != results.front().condition) several_conditions = true;
  }
  std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
  for (const ExperimentResult& r : results) {
    std::string series = r.method;
    if (several_conditions) series += "/" + r.condition;
    groups[{series, r.budget}].push_back(r.oracle_gap);
  }
  std::vector<CurvePoint> out;
  for (const auto& [key, values] : groups) {
    CurvePoint p;
    p.series = key.first;
    p.budget = key.second;
    p.count = values.size();
    p.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - p.mean) * (v - p.mean);
      p.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string render_svg(std::span<const ExperimentResult> results) {
  constexpr double kWidth = 720, kHeight = 440;
  constexpr double kLeft = 70, kRight = 180, kTop = 30, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  const auto points = aggregate_curves(results);
  double x_lo = 0, x_hi = 1, y_hi = 1;
  if (!points.empty()) {
    x_lo = x_hi = static_cast<double>(points.front().budget);
    for (const CurvePoint& p : points) {
      x_lo = std::min(x_lo, static_cast<double>(p.budget));
      x_hi = std::max(x_hi, static_cast<double>(p.budget));
      y_hi = std::max(y_hi, p.mean + p.stddev);
    }
    if (x_hi == x_lo) x_hi = x_lo + 1;
  }
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return kTop + plot_h - std::max(0.0, y) / y_hi * plot_h; };
  auto num = [](double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\""
      << kLeft + plot_w << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = y_hi * k / 4.0;
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(py(y) + 4)
        << "\" text-anchor=\"end\">" << num(y) << "</text>\n";
    const double x = x_lo + (x_hi - x_lo) * k / 4.0;
    svg << "<text x=\"" << num(px(x)) << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\">" << num(x) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
      << "\" text-anchor=\"middle\">teaching set size</text>\n";
  svg << "<text x=\"18\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << kTop + plot_h / 2
      << ")\">oracle gap (accuracy points)</text>\n";

  std::vector<std::string> series;
  for (const CurvePoint& p : points) {
    if (std::find(series.begin(), series.end(), p.series) == series.end()) {
      series.push_back(p.series);
    }
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    svg << "<polyline data-series=\"" << series[s] << "\" fill=\"none\" stroke=\""
        << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const CurvePoint& p : points) {
      if (p.series != series[s]) continue;
      svg << (first ? "" : " ") << num(px(static_cast<double>(p.budget))) << ','
          << num(py(p.mean));
      first = false;
    }
    svg << "\"/>\n";
    for (const CurvePoint& p : points) {
      if (p.series != series[s]) continue;
      const double x = px(static_cast<double>(p.budget));
      svg << "<line class=\"errorbar\" data-series=\"" << p.series
          << "\" data-budget=\"" << p.budget << "\" data-mean=\""
          << format_real(p.mean) << "\" data-stddev=\"" << format_real(p.stddev)
          << "\" x1=\"" << num(x) << "\" y1=\"" << num(py(p.mean - p.stddev))
          << "\" x2=\"" << num(x) << "\" y2=\"" << num(py(p.mean + p.stddev))
          << "\" stroke=\"" << color << "\"/>\n";
    }
    const double ly = kTop + 10 + 18.0 * static_cast<double>(s);
    svg << "<line x1=\"" << kLeft + plot_w + 15 << "\" y1=\"" << ly << "\" x2=\""
        << kLeft + plot_w + 35 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kLeft + plot_w + 40 << "\" y=\"" << ly + 4 << "\">"
        << series[s] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_results(std::span<const ExperimentResult> results,
                  const std::filesystem::path& csv_path,
                  const std::optional<std::filesystem::path>& svg_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  write_results_csv(csv, results);
  if (!csv) throw std::runtime_error("write failed for " + csv_path.string());
  if (svg_path) {
    std::ofstream svg(*svg_path);
    if (!svg) throw std::runtime_error("cannot write " + svg_path->string());
    svg << render_svg(results);
  }
}

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "kernel.bandwidth", "selection.method", "selection.alpha",
      "selection.budget", "noise.radius",     "noise.h_delta",
      "noise.drop_g0",    "world.preset",     "world.k_p",
      "seeds.count"};
  return keys;
}

RunConfig RunConfig::parse(std::istream& in) {
  RunConfig config;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("expected key = value", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ValidationError("unknown config key \"" + key + "\"", lineno);
    }
    config.values_[key] = value;
  }
  return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  return parse(in);
}

std::string RunConfig::get_string(const std::string& key,
                                  const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_real(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_real(it->second, key);
}

std::size_t RunConfig::get_count(const std::string& key, std::size_t fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback
                             : static_cast<std::size_t>(parse_unsigned(it->second, key));
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("bad boolean for " + key + ": \"" + v + "\"");
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    throw ValidationError("unknown config key \"" + key + "\"");
  }
  values_[key] = value;
}

}  // namespace deferteach
