#include "forestscope/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace forestscope {

namespace {

using Wide = unsigned __int128;

struct Sample {
  std::vector<double> error;
  std::vector<double> tree_count;
  std::vector<double> correct;
};

// Sorting before summing makes the result independent of trial order.
double sorted_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

AggregateRow reduce(std::size_t key, const Sample& s) {
  AggregateRow row;
  row.node_cardinality = key;
  row.trials_present = s.error.size();
  row.mean_error = sorted_mean(s.error);
  row.mean_tree_count = sorted_mean(s.tree_count);
  row.mean_correct_count = sorted_mean(s.correct);
  if (row.trials_present >= 2) {
    std::vector<double> dev;
    dev.reserve(s.error.size());
    for (double x : s.error) dev.push_back((x - row.mean_error) * (x - row.mean_error));
    std::sort(dev.begin(), dev.end());
    const double ss = std::accumulate(dev.begin(), dev.end(), 0.0);
    const double sd = std::sqrt(ss / static_cast<double>(row.trials_present - 1));
    row.ci_half_width = 1.96 * sd / std::sqrt(static_cast<double>(row.trials_present));
  }
  return row;
}

std::uint64_t narrow(Wide w) {
  if (w > std::numeric_limits<std::uint64_t>::max())
    throw Error(ErrorKind::OutOfRange, "pair count exceeds 64 bits");
  return static_cast<std::uint64_t>(w);
}

}  // namespace

std::vector<AggregateRow> aggregate_by_cardinality(std::span<const TrialRecord> trials) {
  std::map<std::size_t, Sample> by_c;
  for (const auto& t : trials) {
    const double denom = static_cast<double>(t.test_denominator());
    for (std::size_t c = 0; c < t.summary.rows.size(); ++c) {
      const auto& r = t.summary.rows[c];
      if (r.tree_count == 0) continue;
      auto& s = by_c[c];
      s.error.push_back(static_cast<double>(r.error_sum()) /
                        (static_cast<double>(r.tree_count) * denom));
      s.tree_count.push_back(static_cast<double>(r.tree_count));
      s.correct.push_back(static_cast<double>(r.correct_tree_count));
    }
  }
  std::vector<AggregateRow> out;
  for (const auto& [c, s] : by_c) out.push_back(reduce(c, s));
  return out;
}

std::vector<AggregateRow> aggregate_by_leaf_cardinality(std::span<const TrialRecord> trials) {
  std::map<std::size_t, Sample> by_l;
  for (const auto& t : trials) {
    const double denom = static_cast<double>(t.test_denominator());
    for (const auto& [leaves, cell] : t.summary.leaf_cells) {
      if (cell.tree_count == 0) continue;
      auto& s = by_l[leaves];
      s.error.push_back(static_cast<double>(cell.error_sum) /
                        (static_cast<double>(cell.tree_count) * denom));
      s.tree_count.push_back(static_cast<double>(cell.tree_count));
      s.correct.push_back(0.0);
    }
  }
  std::vector<AggregateRow> out;
  for (const auto& [l, s] : by_l) out.push_back(reduce(l, s));
  return out;
}

std::map<std::size_t, MinSizeGroup> group_by_min_size(std::span<const TrialRecord> trials) {
  std::map<std::size_t, std::vector<TrialRecord>> parts;
  for (const auto& t : trials)
    if (t.min_size) parts[*t.min_size].push_back(t);
  std::map<std::size_t, MinSizeGroup> out;
  for (const auto& [m, group] : parts) out[m] = {group.size(), aggregate_by_cardinality(group)};
  return out;
}

const char* to_string(Baseline b) noexcept {
  return b == Baseline::AllPairs ? "all-pairs" : "min-vs-larger";
}

std::vector<PairwiseRow> pairwise(std::span<const TrialRecord> trials, Baseline baseline,
                                  std::optional<std::size_t> min_size_condition,
                                  Pooling pooling) {
  std::optional<std::uint64_t> denom;
  for (const auto& t : trials) {
    if (denom && *denom != t.test_denominator())
      throw Error(ErrorKind::MixedDenominators, "trials have different test set sizes");
    denom = t.test_denominator();
  }

  struct Acc {
    Wide smaller = 0, equal = 0, larger = 0;
    double p_smaller = 0, p_equal = 0, p_larger = 0;
    std::size_t trials = 0;
  };
  std::map<std::size_t, Acc> acc;

  for (const auto& t : trials) {
    if (min_size_condition && t.min_size != min_size_condition) continue;
    const auto& rows = t.summary.rows;
    // prefix[c][e] = trees at c with fewer than e errors.
    std::vector<std::vector<Wide>> prefix(rows.size());
    for (std::size_t c = 0; c < rows.size(); ++c) {
      if (rows[c].tree_count == 0) continue;
      const auto& h = rows[c].error_histogram;
      prefix[c].assign(h.size() + 1, 0);
      for (std::size_t e = 0; e < h.size(); ++e) prefix[c][e + 1] = prefix[c][e] + h[e];
    }
    std::map<std::size_t, std::array<Wide, 3>> local;
    for (std::size_t c1 = 0; c1 < rows.size(); ++c1) {
      if (rows[c1].tree_count == 0) continue;
      if (baseline == Baseline::MinVsLarger && t.min_size != c1) continue;
      for (std::size_t c2 = c1 + 1; c2 < rows.size(); ++c2) {
        if (rows[c2].tree_count == 0) continue;
        const auto& h1 = rows[c1].error_histogram;
        const auto& h2 = rows[c2].error_histogram;
        Wide smaller = 0, equal = 0;
        for (std::size_t e = 0; e < h2.size(); ++e) {
          if (h2[e] == 0) continue;
          smaller += Wide{h2[e]} * prefix[c1][std::min(e, h1.size())];
          if (e < h1.size()) equal += Wide{h2[e]} * h1[e];
        }
        const Wide total = Wide{rows[c1].tree_count} * rows[c2].tree_count;
        auto& cell = local[c2 - c1];
        cell[0] += smaller;
        cell[1] += equal;
        cell[2] += total - smaller - equal;
      }
    }
    for (const auto& [diff, cell] : local) {
      auto& a = acc[diff];
      a.smaller += cell[0];
      a.equal += cell[1];
      a.larger += cell[2];
      a.trials += 1;
      const double n = static_cast<double>(cell[0] + cell[1] + cell[2]);
      a.p_smaller += static_cast<double>(cell[0]) / n;
      a.p_equal += static_cast<double>(cell[1]) / n;
      a.p_larger += static_cast<double>(cell[2]) / n;
    }
  }

  std::vector<PairwiseRow> out;
  for (const auto& [diff, a] : acc) {
    PairwiseRow r;
    r.diff = diff;
    r.smaller_better = narrow(a.smaller);
    r.equal = narrow(a.equal);
    r.larger_better = narrow(a.larger);
    r.pair_count = narrow(a.smaller + a.equal + a.larger);
    r.trials_present = a.trials;
    if (pooling == Pooling::PairWeighted) {
      const double n = static_cast<double>(r.pair_count);
      r.p_smaller_better = static_cast<double>(r.smaller_better) / n;
      r.p_equal = static_cast<double>(r.equal) / n;
      r.p_larger_better = static_cast<double>(r.larger_better) / n;
    } else {
      const double n = static_cast<double>(a.trials);
      r.p_smaller_better = a.p_smaller / n;
      r.p_equal = a.p_equal / n;
      r.p_larger_better = a.p_larger / n;
    }
    out.push_back(r);
  }
  return out;
}

std::optional<std::size_t> most_accurate_cardinality(const TrialRecord& trial) {
  std::optional<std::size_t> best;
  Wide best_err = 0, best_count = 1;
  const auto& rows = trial.summary.rows;
  for (std::size_t c = 0; c < rows.size(); ++c) {
    if (rows[c].tree_count == 0) continue;
    const Wide err = rows[c].error_sum();
    const Wide count = rows[c].tree_count;
    // err / count < best_err / best_count
    if (!best || err * best_count < best_err * count) {
      best = c;
      best_err = err;
      best_count = count;
    }
  }
  return best;
}

std::vector<PolicyRow> derive_policy(std::span<const TrialRecord> trials) {
  std::map<std::size_t, std::map<std::size_t, std::size_t>> votes;
  std::map<std::size_t, std::size_t> group_size;
  for (const auto& t : trials) {
    if (!t.min_size) continue;
    ++group_size[*t.min_size];
    if (auto best = most_accurate_cardinality(t)) ++votes[*t.min_size][*best];
  }
  std::vector<PolicyRow> out;
  for (const auto& [m, n] : group_size) {
    PolicyRow row{m, m, n};
    std::size_t top = 0;
    for (const auto& [c, k] : votes[m])
      if (k > top) {
        top = k;
        row.preferred_cardinality = c;
      }
    out.push_back(row);
  }
  return out;
}

std::vector<PathLengthRow> bin_by_path_length(std::span<const TrialRecord> trials,
                                              double bin_width) {
  if (!(bin_width > 0.0)) throw Error(ErrorKind::OutOfRange, "bin width must be positive");
  struct Cell {
    std::vector<double> error_rates;
    std::uint64_t trees = 0;
  };
  std::map<std::int64_t, Cell> cells;
  for (const auto& t : trials) {
    if (t.summary.bin_width != bin_width)
      throw Error(ErrorKind::OutOfRange, "summary was binned with a different width");
    const double denom = static_cast<double>(t.test_denominator());
    for (const auto& [bin, c] : t.summary.path_bins) {
      auto& cell = cells[bin];
      cell.error_rates.push_back(static_cast<double>(c.error_sum) / denom);
      cell.trees += c.tree_count;
    }
  }
  std::vector<PathLengthRow> out;
  for (auto& [bin, cell] : cells) {
    std::sort(cell.error_rates.begin(), cell.error_rates.end());
    const double total = std::accumulate(cell.error_rates.begin(), cell.error_rates.end(), 0.0);
    out.push_back({(static_cast<double>(bin) + 0.5) * bin_width,
                   total / static_cast<double>(cell.trees), cell.trees});
  }
  return out;
}

}  // namespace forestscope
