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

#include "deferteach/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "deferteach/random.hpp"
#include "json.hpp"

namespace deferteach {

using ordered_json = nlohmann::ordered_json;

ValidationError::ValidationError(const std::string& what, std::size_t line)
    : std::runtime_error(line == 0 ? what
                                   : "line " + std::to_string(line) + ": " +
                                         what),
      line_(line) {}

bool TeachingPool::has_prior_decisions() const {
  return std::all_of(points.begin(), points.end(),
                     [](const PoolPoint& p) { return p.prior_reject.has_value(); });
}

std::vector<PointIndex> TeachingPool::teach_indices() const {
  if (split) return split->teach;
  std::vector<PointIndex> all(points.size());
  std::iota(all.begin(), all.end(), PointIndex{0});
  return all;
}

std::vector<PointIndex> TeachingPool::eval_indices() const {
  if (split) return split->validation;
  std::vector<PointIndex> all(points.size());
  std::iota(all.begin(), all.end(), PointIndex{0});
  return all;
}

TeachingPool TeachingPool::subset(std::span<const PointIndex> indices) const {
  TeachingPool out;
  out.points.reserve(indices.size());
  for (PointIndex i : indices) {
    if (i >= points.size()) throw std::out_of_range("subset index out of range");
    out.points.push_back(points[i]);
  }
  return out;
}

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

void check_rate(double value, const char* name, std::size_t line) {
  if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
    throw ValidationError(std::string(name) + " out of range", line);
  }
}

void validate_point_at(const PoolPoint& p, std::size_t line) {
  if (p.embedding.empty()) throw ValidationError("embedding is empty", line);
  if (!all_finite(p.embedding)) {
    throw ValidationError("embedding has non-finite entries", line);
  }
  check_rate(p.human_err, "human_err", line);
  check_rate(p.ai_err, "ai_err", line);
  if (p.message && !all_finite(*p.message)) {
    throw ValidationError("message has non-finite entries", line);
  }
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "id",      "embedding",    "label",  "human_err", "ai_err",
      "cluster", "prior_reject", "message"};
  return keys;
}

std::vector<double> real_array(const ordered_json& j, const char* name,
                               std::size_t line) {
  if (!j.is_array()) {
    throw ValidationError(std::string("\"") + name + "\" must be an array", line);
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) {
      throw ValidationError(std::string("\"") + name + "\" must hold numbers",
                            line);
    }
    out.push_back(x.get<double>());
  }
  return out;
}

double real_field(const ordered_json& rec, const char* name, std::size_t line) {
  auto it = rec.find(name);
  if (it == rec.end()) {
    throw ValidationError(std::string("missing \"") + name + "\"", line);
  }
  if (!it->is_number()) {
    throw ValidationError(std::string("\"") + name + "\" must be a number", line);
  }
  return it->get<double>();
}

std::optional<std::int64_t> optional_int(const ordered_json& rec,
                                         const char* name, std::size_t line) {
  auto it = rec.find(name);
  if (it == rec.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) {
    throw ValidationError(std::string("\"") + name + "\" must be an integer",
                          line);
  }
  return it->get<std::int64_t>();
}

PoolPoint parse_record(const ordered_json& rec, std::size_t line,
                       const LoadOptions& options) {
  if (!rec.is_object()) throw ValidationError("record is not an object", line);
  for (const auto& [key, value] : rec.items()) {
    if (known_keys().count(key) == 0) {
      if (options.strict) {
        throw ValidationError("unknown key \"" + key + "\"", line);
      }
      spdlog::warn("pool line {}: ignoring unknown key \"{}\"", line, key);
    }
  }

  PoolPoint p;
  auto id = rec.find("id");
  if (id == rec.end()) throw ValidationError("missing \"id\"", line);
  if (!id->is_number_integer()) {
    throw ValidationError("\"id\" must be an integer", line);
  }
  p.id = id->get<std::int64_t>();

  auto emb = rec.find("embedding");
  if (emb == rec.end()) throw ValidationError("missing \"embedding\"", line);
  p.embedding = real_array(*emb, "embedding", line);

  p.label = optional_int(rec, "label", line);
  p.human_err = real_field(rec, "human_err", line);
  p.ai_err = real_field(rec, "ai_err", line);
  p.cluster = optional_int(rec, "cluster", line);

  if (auto it = rec.find("prior_reject"); it != rec.end() && !it->is_null()) {
    if (it->is_boolean()) {
      p.prior_reject = it->get<bool>();
    } else if (it->is_number_integer() &&
               (it->get<std::int64_t>() == 0 || it->get<std::int64_t>() == 1)) {
      p.prior_reject = it->get<std::int64_t>() == 1;
    } else {
      throw ValidationError("\"prior_reject\" must be binary", line);
    }
  }
  if (auto it = rec.find("message"); it != rec.end() && !it->is_null()) {
    p.message = real_array(*it, "message", line);
  }
  validate_point_at(p, line);
  return p;
}

}  // namespace

void validate_point(const PoolPoint& point) { validate_point_at(point, 0); }

void validate_pool(const TeachingPool& pool) {
  std::unordered_set<std::int64_t> ids;
  const std::size_t dim = pool.dim();
  for (const PoolPoint& p : pool.points) {
    validate_point(p);
    if (p.embedding.size() != dim) {
      throw ValidationError("dimension mismatch for id " + std::to_string(p.id));
    }
    if (!ids.insert(p.id).second) {
      throw ValidationError("duplicate id " + std::to_string(p.id));
    }
  }
  if (pool.split) {
    std::vector<char> seen(pool.size(), 0);
    auto mark = [&](const std::vector<PointIndex>& part) {
      for (PointIndex i : part) {
        if (i >= pool.size()) throw ValidationError("split index out of range");
        if (seen[i]) throw ValidationError("split parts overlap");
        seen[i] = 1;
      }
    };
    mark(pool.split->teach);
    mark(pool.split->validation);
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
      throw ValidationError("split does not cover the pool");
    }
  }
}

TeachingPool parse_pool(std::istream& in, const LoadOptions& options) {
  TeachingPool pool;
  std::unordered_set<std::int64_t> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    ordered_json rec;
    try {
      rec = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("malformed JSON: ") + e.what(), line);
    }
    PoolPoint p = parse_record(rec, line, options);
    if (!pool.points.empty() && p.embedding.size() != pool.dim()) {
      throw ValidationError("dimension mismatch: expected " +
                                std::to_string(pool.dim()) + ", got " +
                                std::to_string(p.embedding.size()),
                            line);
    }
    if (!ids.insert(p.id).second) {
      throw ValidationError("duplicate id " + std::to_string(p.id), line);
    }
    pool.points.push_back(std::move(p));
  }
  return pool;
}

TeachingPool load_pool(const std::filesystem::path& path,
                       const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open pool file " + path.string());
  return parse_pool(in, options);
}

void write_pool(std::ostream& out, const TeachingPool& pool) {
  for (const PoolPoint& p : pool.points) {
    ordered_json rec;
    rec["id"] = p.id;
    rec["embedding"] = p.embedding;
    if (p.label) rec["label"] = *p.label;
    rec["human_err"] = p.human_err;
    rec["ai_err"] = p.ai_err;
    if (p.cluster) rec["cluster"] = *p.cluster;
    if (p.prior_reject) rec["prior_reject"] = *p.prior_reject;
    if (p.message) rec["message"] = *p.message;
    // nlohmann emits the shortest round-trip decimal for doubles.
    out << rec.dump() << '\n';
  }
}

void save_pool(const std::filesystem::path& path, const TeachingPool& pool) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_pool(out, pool);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

TeachingPool split_pool(const TeachingPool& pool, double fraction,
                        std::uint64_t seed) {
  if (pool.empty()) throw ValidationError("cannot split an empty pool");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ValidationError("split fraction must lie in (0, 1)");
  }
  std::vector<PointIndex> order(pool.size());
  std::iota(order.begin(), order.end(), PointIndex{0});
  Rng rng = make_rng(seed, {stream_tag("split")});
  std::shuffle(order.begin(), order.end(), rng);

  // The slack keeps products like 0.7 * 10 = 7.000000000000001 at 7.
  const auto n_teach = std::min(
      pool.size(), static_cast<std::size_t>(std::ceil(
                       fraction * static_cast<double>(pool.size()) - 1e-9)));
  TeachingPool out = pool;
  PoolSplit split;
  split.teach.assign(order.begin(), order.begin() + n_teach);
  split.validation.assign(order.begin() + n_teach, order.end());
  out.split = std::move(split);
  return out;
}

}  // namespace deferteach
