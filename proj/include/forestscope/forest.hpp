#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "forestscope/dataset.hpp"
#include "forestscope/tree.hpp"

namespace forestscope {

inline constexpr std::uint64_t kDefaultTreeCap = 50'000'000;

struct EnumerationLimits {
  std::size_t max_nodes = 0;
  /// Visits allowed before enumeration throws Truncated; 0 = unlimited.
  std::uint64_t max_trees_per_trial = kDefaultTreeCap;
};

class Enumerator;

/// What a visitor sees for one enumerated tree. Valid only during the call.
class TreeVisit {
 public:
  std::size_t node_cardinality() const noexcept { return nodes_; }
  std::size_t leaf_cardinality() const noexcept { return leaves_; }
  /// Misclassified test examples (multiset count); 0 without a test set.
  std::uint64_t test_errors() const noexcept { return errors_; }
  /// Sum over the path population of tests traversed; 0 without one.
  std::uint64_t path_length_sum() const noexcept { return path_sum_; }
  /// Materializes the tree. Costs O(tree size).
  DecisionTree build() const;

 private:
  friend class Enumerator;
  const Enumerator* owner_ = nullptr;
  std::size_t nodes_ = 0;
  std::size_t leaves_ = 0;
  std::uint64_t errors_ = 0;
  std::uint64_t path_sum_ = 0;
};

using Visitor = std::function<void(const TreeVisit&)>;

/// Pruned depth-first enumeration of every tree that is consistent with the
/// training set and satisfies check_structure, up to a node budget.
///
/// A choice point is an impure node still waiting for a test. At each one the
/// features are tried in ascending index; a feature is admissible only if it
/// sends the node's examples into at least two children. Pure children become
/// leaves with their class; empty children (arity >= 3) become leaves with the
/// parent's majority class, ties to the smaller index. Impure children become
/// new choice points, expanded depth-first in value order. A branch is cut when
/// the budget cannot cover the open choice points: an impure node holding m
/// classes needs at least ceil((m - 1) / (a - 1)) tests, a = largest arity.
///
/// Test errors and path lengths are accumulated per leaf and per test node as
/// the tree grows, so a visit costs O(1) beyond the search itself.
class Enumerator {
 public:
  /// test and population may be null. The referenced datasets must outlive
  /// the enumerator.
  Enumerator(const Dataset& train, const Dataset* test = nullptr,
             const std::vector<Instance>* population = nullptr);
  ~Enumerator();
  Enumerator(const Enumerator&) = delete;
  Enumerator& operator=(const Enumerator&) = delete;

  /// Returns the number of visits.
  std::uint64_t run(const EnumerationLimits& limits, const Visitor& visitor);

  /// True if at least one tree exists within max_nodes.
  bool exists_within(std::size_t max_nodes);

  std::size_t distinct_train_count() const noexcept;

 private:
  friend class TreeVisit;
  struct State;
  std::unique_ptr<State> state_;
};

std::uint64_t enumerate_consistent(const Dataset& train, const EnumerationLimits& limits,
                                   const Visitor& visitor);

/// All consistent trees within limits, materialized, in enumeration order.
std::vector<DecisionTree> collect_consistent(const Dataset& train,
                                             const EnumerationLimits& limits);

inline constexpr std::size_t kNaiveMaxFeatures = 4;
inline constexpr std::uint64_t kNaiveMaxSpace = 64;

/// Reference enumerator: builds every syntactic tree (distinct features per
/// path, full fan-out) within max_nodes, labels it, and keeps those passing
/// check_structure and is_consistent. Sorted by canonical serialization.
/// Throws OracleBound beyond 4 features or 64 instances.
std::vector<DecisionTree> enumerate_naive(const Dataset& train, const EnumerationLimits& limits);

/// Smallest c <= cap admitting a consistent tree, by iterative deepening.
std::optional<std::size_t> min_consistent_size(const Dataset& train, std::size_t cap);

struct CardinalityRow {
  std::uint64_t tree_count = 0;
  std::uint64_t correct_tree_count = 0;
  /// Index = misclassified test count, value = number of trees.
  std::vector<std::uint64_t> error_histogram;
  std::map<std::size_t, std::uint64_t> leaf_histogram;
  std::uint64_t path_length_sum = 0;

  std::uint64_t error_sum() const noexcept;
};

struct BinCell {
  std::uint64_t tree_count = 0;
  std::uint64_t error_sum = 0;
};

struct ForestSummary {
  std::uint64_t test_denominator = 0;
  std::uint64_t population_size = 0;
  double bin_width = 0.25;
  /// Indexed by node cardinality, 0..max_nodes.
  std::vector<CardinalityRow> rows;
  /// Trees bucketed by floor(avg path length / bin_width).
  std::map<std::int64_t, BinCell> path_bins;
  /// Trees bucketed by leaf cardinality.
  std::map<std::size_t, BinCell> leaf_cells;

  std::uint64_t total_trees() const noexcept;
  std::optional<std::size_t> min_cardinality() const noexcept;
  std::optional<std::size_t> max_cardinality() const noexcept;
};

/// Streams the forest once, accumulating everything the statistics need.
ForestSummary forest_summary(const Dataset& train, const Dataset& test,
                             const std::vector<Instance>& path_population,
                             const EnumerationLimits& limits, double bin_width = 0.25);

}  // namespace forestscope
