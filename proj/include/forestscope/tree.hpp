#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "forestscope/dataset.hpp"

namespace forestscope {

/// A leaf carrying a class index, or a test on one feature with one child per
/// feature value in declared order. Immutable value type.
class DecisionTree {
 public:
  static DecisionTree leaf(ClassIndex label);
  static DecisionTree test(std::size_t feature, std::vector<DecisionTree> children);

  bool is_leaf() const noexcept { return children_.empty(); }
  ClassIndex label() const noexcept { return label_; }
  std::size_t feature() const noexcept { return feature_; }
  const std::vector<DecisionTree>& children() const noexcept { return children_; }

  std::size_t node_cardinality() const noexcept;
  std::size_t leaf_cardinality() const noexcept;

  bool operator==(const DecisionTree& other) const noexcept;

 private:
  DecisionTree() = default;

  ClassIndex label_ = 0;
  std::size_t feature_ = 0;
  std::vector<DecisionTree> children_;
};

/// Throws InvalidTree unless child counts match arities, features are distinct
/// along every path, and every index is in range.
void validate(const DecisionTree& tree, const FeatureSchema& schema);

ClassIndex classify(const DecisionTree& tree, const Instance& instance);

/// Number of test nodes traversed to classify the instance.
std::size_t path_length(const DecisionTree& tree, const Instance& instance);

struct TreeMetrics {
  std::size_t node_cardinality = 0;
  std::size_t leaf_cardinality = 0;
  double avg_path_length = 0.0;
  double error_rate = 0.0;
};

/// Throws EmptyInput on an empty population or test set.
TreeMetrics metrics(const DecisionTree& tree, const std::vector<Instance>& path_population,
                    const Dataset& test_set);

std::size_t error_count(const DecisionTree& tree, const Dataset& data);
bool is_consistent(const DecisionTree& tree, const Dataset& train);

struct StructureViolation {
  enum class Kind {
    C1,  // a test sends every incoming example down one branch
    C2,  // a test receives a pure or empty example multiset
  };
  Kind kind;
  /// (feature, value) edges from the root to the offending test node.
  std::vector<std::pair<std::size_t, ValueIndex>> path;
};

/// First violation in depth-first, value-ordered traversal; nullopt if the
/// tree satisfies both constraints at every test node.
std::optional<StructureViolation> check_structure(const DecisionTree& tree,
                                                  const Dataset& train);

/// `(feature v1:subtree v2:subtree ...)` / `[label]`, single-spaced.
std::string to_string(const DecisionTree& tree, const FeatureSchema& schema);
/// Whitespace-insensitive inverse of to_string; throws TreeParse.
DecisionTree parse_tree(std::string_view text, const FeatureSchema& schema);

}  // namespace forestscope
