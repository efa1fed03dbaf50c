#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "forestscope/forest.hpp"
#include "forestscope/stats.hpp"

namespace fst {

using namespace forestscope;

inline Dataset full(const std::string& name) {
  return apply_concept(builtin_concept(name), builtin_schema(name));
}

inline std::vector<std::string> canonical(const std::vector<DecisionTree>& trees,
                                          const FeatureSchema& schema) {
  std::vector<std::string> out;
  for (const auto& t : trees) out.push_back(to_string(t, schema));
  std::sort(out.begin(), out.end());
  return out;
}

inline std::map<std::size_t, std::uint64_t> counts_by_cardinality(const Dataset& d,
                                                                  std::size_t max_nodes) {
  std::map<std::size_t, std::uint64_t> out;
  enumerate_consistent(d, {max_nodes, 0}, [&](const TreeVisit& v) { ++out[v.node_cardinality()]; });
  return out;
}

/// Random schema with 2..max_features features of arity 2..max_arity and
/// 2..max_classes classes, capped at max_space instances.
inline FeatureSchema random_schema(Generator& gen, std::size_t max_features, std::size_t max_arity,
                                   std::size_t max_classes, std::uint64_t max_space) {
  for (;;) {
    const std::size_t k = 1 + uniform_below(gen, max_features);
    std::vector<Feature> fs;
    std::uint64_t space = 1;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t a = 2 + uniform_below(gen, max_arity - 1);
      Feature f{"f" + std::to_string(i), {}};
      for (std::size_t v = 0; v < a; ++v) f.values.push_back("v" + std::to_string(v));
      fs.push_back(std::move(f));
      space *= a;
    }
    if (space > max_space) continue;
    std::vector<std::string> classes;
    const std::size_t m = 2 + uniform_below(gen, max_classes - 1);
    for (std::size_t c = 0; c < m; ++c) classes.push_back("c" + std::to_string(c));
    return FeatureSchema(std::move(fs), std::move(classes));
  }
}

/// Consistency-feasible random dataset: a random subset of the instance space
/// (plus duplicates) with random labels.
inline Dataset random_dataset(Generator& gen, const FeatureSchema& schema, std::size_t max_rows) {
  auto space = instance_space(schema);
  std::shuffle(space.begin(), space.end(), gen);
  const std::size_t n = 1 + uniform_below(gen, std::min(max_rows, space.size()));
  std::vector<LabeledExample> ex;
  for (std::size_t i = 0; i < n; ++i)
    ex.push_back({space[i], static_cast<ClassIndex>(uniform_below(gen, schema.class_count()))});
  const std::size_t dups = uniform_below(gen, 3);
  for (std::size_t i = 0; i < dups; ++i) ex.push_back(ex[uniform_below(gen, ex.size())]);
  return Dataset(schema, std::move(ex));
}

/// Builds a trial from explicit per-cardinality test error lists.
inline TrialRecord make_trial(std::uint64_t denominator,
                              const std::map<std::size_t, std::vector<std::uint64_t>>& errors,
                              std::optional<std::size_t> min_size = std::nullopt,
                              std::size_t trial_id = 0) {
  TrialRecord t;
  t.trial_id = trial_id;
  t.summary.test_denominator = denominator;
  std::size_t top = 0;
  for (const auto& [c, e] : errors) top = std::max(top, c);
  t.summary.rows.resize(top + 1);
  for (auto& row : t.summary.rows) row.error_histogram.assign(denominator + 1, 0);
  for (const auto& [c, list] : errors)
    for (auto e : list) {
      auto& row = t.summary.rows[c];
      ++row.error_histogram[e];
      ++row.tree_count;
      if (e == 0) ++row.correct_tree_count;
    }
  if (min_size) t.min_size = min_size;
  else
    for (const auto& [c, list] : errors)
      if (!list.empty()) {
        t.min_size = c;
        break;
      }
  return t;
}

struct BrutePair {
  std::uint64_t smaller = 0, equal = 0, larger = 0;
};

/// Pairwise counts by explicit enumeration of every tree pair.
inline std::map<std::size_t, BrutePair> brute_pairwise(const TrialRecord& t, bool min_only) {
  std::vector<std::pair<std::size_t, std::uint64_t>> trees;
  for (std::size_t c = 0; c < t.summary.rows.size(); ++c) {
    const auto& h = t.summary.rows[c].error_histogram;
    for (std::size_t e = 0; e < h.size(); ++e)
      for (std::uint64_t k = 0; k < h[e]; ++k) trees.emplace_back(c, e);
  }
  std::map<std::size_t, BrutePair> out;
  for (const auto& [c1, e1] : trees)
    for (const auto& [c2, e2] : trees) {
      if (c1 >= c2) continue;
      if (min_only && c1 != *t.min_size) continue;
      auto& p = out[c2 - c1];
      if (e1 < e2) ++p.smaller;
      else if (e1 == e2) ++p.equal;
      else ++p.larger;
    }
  return out;
}

inline double sample_ci(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return 1.96 * std::sqrt(ss / static_cast<double>(xs.size() - 1)) /
         std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace fst
