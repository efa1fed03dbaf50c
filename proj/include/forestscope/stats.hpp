#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "forestscope/forest.hpp"

namespace forestscope {

struct TrialRecord {
  std::size_t trial_id = 0;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t distinct_train = 0;
  /// Smallest node cardinality with a consistent tree, within the cap.
  std::optional<std::size_t> min_size;
  ForestSummary summary;

  std::uint64_t test_denominator() const noexcept { return summary.test_denominator; }
};

struct AggregateRow {
  std::size_t node_cardinality = 0;
  std::size_t trials_present = 0;
  double mean_error = 0.0;
  /// 1.96 * s / sqrt(n) with sample standard deviation s; 0 when n < 2.
  double ci_half_width = 0.0;
  double mean_tree_count = 0.0;
  double mean_correct_count = 0.0;
};

/// Per trial, the mean test error rate of its trees at each cardinality;
/// averaged over the trials that have trees there.
std::vector<AggregateRow> aggregate_by_cardinality(std::span<const TrialRecord> trials);

/// Same reduction keyed by leaf cardinality (node_cardinality holds the leaf
/// count; mean_correct_count is not tracked and stays 0).
std::vector<AggregateRow> aggregate_by_leaf_cardinality(std::span<const TrialRecord> trials);

struct MinSizeGroup {
  std::size_t trial_count = 0;
  std::vector<AggregateRow> rows;
};

/// Trials without any consistent tree inside the cap are left out.
std::map<std::size_t, MinSizeGroup> group_by_min_size(std::span<const TrialRecord> trials);

enum class Baseline { AllPairs, MinVsLarger };
enum class Pooling { PairWeighted, TrialWeighted };

const char* to_string(Baseline b) noexcept;

struct PairwiseRow {
  std::size_t diff = 0;
  std::uint64_t smaller_better = 0;
  std::uint64_t equal = 0;
  std::uint64_t larger_better = 0;
  std::uint64_t pair_count = 0;
  std::size_t trials_present = 0;
  double p_smaller_better = 0.0;
  double p_equal = 0.0;
  double p_larger_better = 0.0;
};

/// Compares every pair of trees with different node cardinalities (or the
/// trial's minimum cardinality against each larger one) by test errors.
/// Built from the error histograms, never from individual trees. All trials
/// must share one test denominator.
std::vector<PairwiseRow> pairwise(std::span<const TrialRecord> trials, Baseline baseline,
                                  std::optional<std::size_t> min_size_condition = std::nullopt,
                                  Pooling pooling = Pooling::TrialWeighted);

struct PolicyRow {
  std::size_t min_size = 0;
  std::size_t preferred_cardinality = 0;
  std::size_t trial_count = 0;
};

/// Most accurate cardinality of one trial: lowest mean test error, ties to the
/// smaller cardinality. Compared exactly as rationals.
std::optional<std::size_t> most_accurate_cardinality(const TrialRecord& trial);

/// Per minimum size, the most frequent most-accurate cardinality (ties to the
/// smaller one).
std::vector<PolicyRow> derive_policy(std::span<const TrialRecord> trials);

struct PathLengthRow {
  double bin_center = 0.0;
  double mean_error = 0.0;
  std::uint64_t tree_count = 0;
};

/// Pools the per-trial path-length bins. bin_width must match the width the
/// summaries were built with.
std::vector<PathLengthRow> bin_by_path_length(std::span<const TrialRecord> trials,
                                              double bin_width);

}  // namespace forestscope
