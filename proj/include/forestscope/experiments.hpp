#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "forestscope/dataset.hpp"
#include "forestscope/stats.hpp"

namespace forestscope {

inline constexpr std::uint64_t kDefaultMasterSeed = 1;
inline constexpr std::size_t kDefaultRetryLimit = 10'000;

enum class SplitMode { Disjoint, WithReplacement, LeaveOneOut };
enum class FilterMode { None, Representative, LeafCoverage };
enum class PopulationChoice { InstanceSpace, TrainSet, TestSet };

/// One block of trials sharing a training size and node cap.
struct Leg {
  std::string label;  // empty for single-leg experiments
  std::size_t n_train = 0;
  std::size_t trials = 0;
  std::optional<std::size_t> max_nodes;  // nullopt = no cap
};

struct Analyses {
  bool cardinality = true;
  bool min_size_groups = false;
  bool pairwise_all = false;
  bool pairwise_min = false;
  /// Conditions for min-vs-larger; nullopt = unconditioned.
  std::vector<std::optional<std::size_t>> min_size_conditions{std::nullopt};
  bool policy = false;
  bool path_length = false;
  bool leaf_cardinality = false;
};

struct ExperimentConfig {
  std::string name;
  /// Built-in concept name, or empty when data_file is used.
  std::string concept_name;
  /// Dataset file; relative paths resolve against the data directory.
  std::string data_file;

  SplitMode split = SplitMode::Disjoint;
  std::size_t test_n = 0;  // WithReplacement only

  FilterMode filter = FilterMode::None;
  RepresentativeBounds bounds;
  /// Representative filter: drop rejected draws instead of redrawing.
  bool post_filter = false;
  std::size_t per_leaf = 2;
  std::size_t retry_limit = kDefaultRetryLimit;

  std::vector<Leg> legs;
  /// Legs run only when extended legs are requested.
  std::vector<Leg> extended_legs;

  PopulationChoice population = PopulationChoice::InstanceSpace;
  std::uint64_t master_seed = kDefaultMasterSeed;
  std::uint64_t max_trees_per_trial = kDefaultTreeCap;
  double bin_width = 0.25;
  Pooling pooling = Pooling::TrialWeighted;
  Analyses analyses;
};

/// Throws InvalidConfig on infeasible combinations.
void validate(const ExperimentConfig& config);

/// Throws UnknownPreset listing the available names.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Replaces every leg's trial count. Refused for leave-one-out.
void override_trials(ExperimentConfig& config, std::size_t trials);

struct ManifestRow {
  std::size_t trial_id = 0;
  std::uint64_t seed = 0;
  bool accepted = true;
  /// Representative draws rejected before this trial's accepted one.
  std::size_t redraws = 0;
  std::optional<std::size_t> min_size;
  std::uint64_t total_trees = 0;
  double wall_time_ms = 0.0;
};

struct LegResult {
  /// Series label used in every output row ("fig14/n8" style for multi-leg runs).
  std::string series;
  Leg leg;
  std::vector<TrialRecord> trials;  // accepted trials, ordered by trial_id
  std::vector<ManifestRow> manifest;
};

struct RunOptions {
  std::size_t threads = 1;
  bool extended = false;
  std::string data_dir = FORESTSCOPE_DATA_DIR;
  /// Called once per finished trial, from worker threads.
  std::function<void(const std::string& series, const ManifestRow&)> on_trial;
};

/// Source dataset of an experiment (concept over its schema, or the file).
Dataset load_source(const ExperimentConfig& config, const std::string& data_dir);

/// Series label of a leg within a config.
std::string series_name(const ExperimentConfig& config, const Leg& leg);

/// Runs every leg. Results depend only on the config, never on thread count.
std::vector<LegResult> run_trials(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace forestscope
