#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "forestscope/error.hpp"
#include "forestscope/rng.hpp"

namespace forestscope {

using ValueIndex = std::uint16_t;
using ClassIndex = std::uint16_t;

struct Feature {
  std::string name;
  std::vector<std::string> values;

  std::size_t arity() const noexcept { return values.size(); }

  bool operator==(const Feature&) const = default;
};

/// Ordered discrete features plus ordered class tokens. Validated on
/// construction: arity >= 2, >= 2 classes, no duplicate names or tokens.
class FeatureSchema {
 public:
  FeatureSchema(std::vector<Feature> features, std::vector<std::string> classes);

  /// n binary features with values "0"/"1" and the given class tokens.
  static FeatureSchema binary(const std::vector<std::string>& names,
                              std::vector<std::string> classes = {"neg", "pos"});

  const std::vector<Feature>& features() const noexcept { return features_; }
  const Feature& feature(std::size_t i) const { return features_.at(i); }
  std::size_t feature_count() const noexcept { return features_.size(); }
  std::size_t arity(std::size_t i) const { return features_.at(i).arity(); }
  std::size_t max_arity() const noexcept;
  const std::vector<std::string>& classes() const noexcept { return classes_; }
  std::size_t class_count() const noexcept { return classes_.size(); }

  std::optional<std::size_t> find_feature(const std::string& name) const;
  std::optional<ValueIndex> find_value(std::size_t feature, const std::string& token) const;
  std::optional<ClassIndex> find_class(const std::string& token) const;

  /// Product of arities; throws SpaceOverflow past 2^64 - 1.
  std::uint64_t instance_space_size() const;

  bool operator==(const FeatureSchema&) const = default;

 private:
  std::vector<Feature> features_;
  std::vector<std::string> classes_;
};

/// One value index per schema feature.
using Instance = std::vector<ValueIndex>;

struct LabeledExample {
  Instance instance;
  ClassIndex label = 0;

  auto operator<=>(const LabeledExample&) const = default;
};

/// Schema plus a multiset of examples. Every example is validated against the
/// schema; contradictory duplicates are allowed but detectable.
class Dataset {
 public:
  Dataset(FeatureSchema schema, std::vector<LabeledExample> examples);

  const FeatureSchema& schema() const noexcept { return schema_; }
  const std::vector<LabeledExample>& examples() const noexcept { return examples_; }
  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }

  /// Index pair (i, j), i < j, of the first two examples sharing an instance
  /// with different labels.
  std::optional<std::pair<std::size_t, std::size_t>> find_contradiction() const;
  bool is_consistency_feasible() const { return !find_contradiction().has_value(); }

  std::size_t distinct_instance_count() const;
  std::vector<std::size_t> class_counts() const;

 private:
  FeatureSchema schema_;
  std::vector<LabeledExample> examples_;
};

/// All instances, lexicographic with feature 0 most significant.
std::vector<Instance> instance_space(const FeatureSchema& schema);

// ---------------------------------------------------------------------------
// Concepts

struct Concept {
  std::string name;
  /// Number of binary features the concept reads (schema must match exactly).
  std::size_t feature_count = 0;
  std::function<ClassIndex(const Instance&)> eval;
};

/// Built-in names: "a", "ab", "xyz-or-ab", "mux6", "parity-<n>".
Concept builtin_concept(const std::string& name);
/// Default schema the built-in concept is defined over.
FeatureSchema builtin_schema(const std::string& name);
std::vector<std::string> builtin_concept_names();

/// Full instance space labeled by the concept.
Dataset apply_concept(const Concept& target, const FeatureSchema& schema);

// ---------------------------------------------------------------------------
// Sampling

struct Split {
  Dataset train;
  Dataset test;
};

/// Uniform draw of n_train examples without replacement; test is the rest in
/// input order.
Split split_disjoint(const Dataset& data, std::size_t n_train, Generator& gen);

/// n i.i.d. uniform draws from the examples.
Dataset sample_with_replacement(const Dataset& data, std::size_t n, Generator& gen);

/// Inclusive count range.
struct CountRange {
  std::size_t lo = 0;
  std::size_t hi = 0;

  bool contains(std::size_t n) const noexcept { return lo <= n && n <= hi; }
};

struct RepresentativeBounds {
  /// Indexed by class; nullopt = unbounded.
  std::vector<std::optional<CountRange>> class_bounds;
  /// Indexed [feature][value]; nullopt = unbounded. May be shorter than the
  /// schema (missing entries are unbounded).
  std::vector<std::vector<std::optional<CountRange>>> value_bounds;
};

struct BoundViolation {
  enum class Kind { FeatureValue, Class };
  Kind kind;
  std::size_t feature = 0;  // FeatureValue only
  std::size_t index = 0;    // value index or class index
  std::size_t count = 0;
  CountRange range;
};

/// nullopt = accepted. Feature bounds are checked first (schema order), then
/// class bounds.
std::optional<BoundViolation> representative_filter(const Dataset& train,
                                                    const RepresentativeBounds& bounds);

class DecisionTree;

/// Forces up to per_leaf examples from each leaf of reference_tree into the
/// training set, then fills it to n_train uniformly from what is left.
Split leaf_coverage_sample(const Dataset& data, const DecisionTree& reference_tree,
                           std::size_t per_leaf, std::size_t n_train, Generator& gen);

// ---------------------------------------------------------------------------
// File format

Dataset load_dataset(std::istream& in);
Dataset load_dataset_file(const std::string& path);
void write_dataset(std::ostream& out, const Dataset& data);

}  // namespace forestscope
