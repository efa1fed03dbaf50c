#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "forestscope/experiments.hpp"

namespace forestscope {

/// Fixed six-decimal rendering used in every CSV.
std::string format_real(double v);

// Each writer emits its header row and then one row per entry. series is the
// value of the preset column.
void write_cardinality_csv(std::ostream& out, const std::string& series, std::uint64_t seed,
                           const std::vector<AggregateRow>& rows, bool header = true);
void write_pairwise_csv(std::ostream& out, const std::string& series, std::uint64_t seed,
                        Baseline baseline, std::optional<std::size_t> condition,
                        const std::vector<PairwiseRow>& rows, bool header = true);
void write_policy_csv(std::ostream& out, const std::string& series, std::uint64_t seed,
                      const std::vector<PolicyRow>& rows, bool header = true);
void write_path_length_csv(std::ostream& out, const std::string& series, std::uint64_t seed,
                           const std::vector<PathLengthRow>& rows, bool header = true);

/// Writes every CSV the config's analyses call for (plus run_manifest.csv and
/// trial_histograms.csv) into out_dir, and SVG charts when requested.
/// Returns the file names written, in order.
std::vector<std::string> write_outputs(const ExperimentConfig& config,
                                       const std::vector<LegResult>& results,
                                       const std::string& out_dir, bool charts);

/// Inverse of trial_histograms.csv: accepted trials grouped by series, with
/// per-cardinality error histograms (leaf and path-length data not restored).
std::map<std::string, std::vector<TrialRecord>> read_trial_histograms(std::istream& in);

/// Policy rows for each series of a finished run directory.
std::map<std::string, std::vector<PolicyRow>> policy_from_run(const std::string& run_dir);

}  // namespace forestscope
