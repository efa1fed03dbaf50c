#include "forestscope/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "forestscope/svg.hpp"

namespace forestscope {

namespace fs = std::filesystem;

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

namespace {

std::string opt(const std::optional<std::size_t>& v, const char* none = "") {
  return v ? std::to_string(*v) : std::string(none);
}

constexpr const char* kCardinalityHeader =
    "preset,seed,node_cardinality,trials_present,mean_error,ci_half_width,mean_tree_count,"
    "mean_correct_count\n";

void write_aggregate_rows(std::ostream& out, const std::string& prefix,
                          const std::vector<AggregateRow>& rows, bool correct) {
  for (const auto& r : rows) {
    out << prefix << r.node_cardinality << ',' << r.trials_present << ',' << format_real(r.mean_error)
        << ',' << format_real(r.ci_half_width) << ',' << format_real(r.mean_tree_count);
    if (correct) out << ',' << format_real(r.mean_correct_count);
    out << '\n';
  }
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write '" + p.string() + "'");
  return f;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_cardinality_csv(std::ostream& out, const std::string& series, std::uint64_t seed,
                           const std::vector<AggregateRow>& rows, bool header) {
  if (header) out << kCardinalityHeader;
  write_aggregate_rows(out, series + ',' + std::to_string(seed) + ',', rows, true);
}

void write_pairwise_csv(std::ostream& out, const std::string& series, std::uint64_t seed,
                        Baseline baseline, std::optional<std::size_t> condition,
                        const std::vector<PairwiseRow>& rows, bool header) {
  if (header)
    out << "preset,seed,baseline,min_size_condition,diff,p_smaller_better,p_equal,"
           "p_larger_better,pair_count\n";
  for (const auto& r : rows)
    out << series << ',' << seed << ',' << to_string(baseline) << ',' << opt(condition, "none")
        << ',' << r.diff << ',' << format_real(r.p_smaller_better) << ','
        << format_real(r.p_equal) << ',' << format_real(r.p_larger_better) << ',' << r.pair_count
        << '\n';
}

void write_policy_csv(std::ostream& out, const std::string& series, std::uint64_t seed,
                      const std::vector<PolicyRow>& rows, bool header) {
  if (header) out << "preset,seed,min_size,preferred_cardinality,trial_count\n";
  for (const auto& r : rows)
    out << series << ',' << seed << ',' << r.min_size << ',' << r.preferred_cardinality << ','
        << r.trial_count << '\n';
}

void write_path_length_csv(std::ostream& out, const std::string& series, std::uint64_t seed,
                           const std::vector<PathLengthRow>& rows, bool header) {
  if (header) out << "preset,seed,bin_center,mean_error,tree_count\n";
  for (const auto& r : rows)
    out << series << ',' << seed << ',' << format_real(r.bin_center) << ','
        << format_real(r.mean_error) << ',' << r.tree_count << '\n';
}

std::vector<std::string> write_outputs(const ExperimentConfig& config,
                                       const std::vector<LegResult>& results,
                                       const std::string& out_dir, bool charts) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const auto seed = config.master_seed;
  const auto& an = config.analyses;
  std::vector<std::string> written;
  std::vector<std::pair<std::string, Chart>> chart_files;

  {
    auto f = open_out(dir / "cardinality_stats.csv");
    f << kCardinalityHeader;
    Chart ch{config.name + ": error by node cardinality", "Node cardinality", "Error", {}};
    for (const auto& r : results) {
      const auto rows = aggregate_by_cardinality(r.trials);
      write_cardinality_csv(f, r.series, seed, rows, false);
      ChartSeries s{r.series, {}};
      for (const auto& row : rows) s.points.emplace_back(row.node_cardinality, row.mean_error);
      ch.series.push_back(std::move(s));
    }
    written.push_back("cardinality_stats.csv");
    chart_files.emplace_back("cardinality.svg", std::move(ch));
  }

  if (an.min_size_groups) {
    auto f = open_out(dir / "min_size_groups.csv");
    f << "preset,seed,min_size,group_trials,node_cardinality,trials_present,mean_error,"
         "ci_half_width,mean_tree_count,mean_correct_count\n";
    Chart ch{config.name + ": error by node cardinality, grouped by minimum size",
             "Node cardinality", "Error", {}};
    for (const auto& r : results)
      for (const auto& [m, g] : group_by_min_size(r.trials)) {
        write_aggregate_rows(f, r.series + ',' + std::to_string(seed) + ',' + std::to_string(m) +
                                    ',' + std::to_string(g.trial_count) + ',',
                             g.rows, true);
        ChartSeries s{"min size " + std::to_string(m), {}};
        for (const auto& row : g.rows) s.points.emplace_back(row.node_cardinality, row.mean_error);
        ch.series.push_back(std::move(s));
      }
    written.push_back("min_size_groups.csv");
    chart_files.emplace_back("min_size_groups.svg", std::move(ch));
  }

  if (an.pairwise_all || an.pairwise_min) {
    auto f = open_out(dir / "pairwise.csv");
    bool header = true;
    auto emit = [&](const LegResult& r, Baseline b, std::optional<std::size_t> cond) {
      const auto rows = pairwise(r.trials, b, cond, config.pooling);
      write_pairwise_csv(f, r.series, seed, b, cond, rows, header);
      header = false;
      Chart ch{r.series + ": " + to_string(b) + (cond ? ", min size " + std::to_string(*cond) : ""),
               "Difference in node cardinality", "Probability", {}};
      ChartSeries smaller{"smaller better", {}}, equal{"equal", {}}, larger{"larger better", {}};
      for (const auto& row : rows) {
        smaller.points.emplace_back(row.diff, row.p_smaller_better);
        equal.points.emplace_back(row.diff, row.p_equal);
        larger.points.emplace_back(row.diff, row.p_larger_better);
      }
      ch.series = {smaller, equal, larger};
      std::string file = std::string("pairwise_") + to_string(b) + "_" + opt(cond, "none");
      if (results.size() > 1) file += "_" + r.leg.label;
      chart_files.emplace_back(file + ".svg", std::move(ch));
    };
    for (const auto& r : results) {
      if (an.pairwise_all) emit(r, Baseline::AllPairs, std::nullopt);
      if (an.pairwise_min)
        for (const auto& cond : an.min_size_conditions) emit(r, Baseline::MinVsLarger, cond);
    }
    written.push_back("pairwise.csv");
  }

  if (an.policy) {
    auto f = open_out(dir / "policy.csv");
    bool header = true;
    for (const auto& r : results) {
      write_policy_csv(f, r.series, seed, derive_policy(r.trials), header);
      header = false;
    }
    written.push_back("policy.csv");
  }

  if (an.path_length) {
    auto f = open_out(dir / "path_length.csv");
    bool header = true;
    Chart ch{config.name + ": error by average path length", "Average path length", "Error", {}};
    for (const auto& r : results) {
      const auto rows = bin_by_path_length(r.trials, config.bin_width);
      write_path_length_csv(f, r.series, seed, rows, header);
      header = false;
      ChartSeries s{r.series, {}};
      for (const auto& row : rows) s.points.emplace_back(row.bin_center, row.mean_error);
      ch.series.push_back(std::move(s));
    }
    written.push_back("path_length.csv");
    chart_files.emplace_back("path_length.svg", std::move(ch));
  }

  if (an.leaf_cardinality) {
    auto f = open_out(dir / "leaf_cardinality_stats.csv");
    f << "preset,seed,leaf_cardinality,trials_present,mean_error,ci_half_width,mean_tree_count\n";
    Chart ch{config.name + ": error by leaf cardinality", "Leaf cardinality", "Error", {}};
    for (const auto& r : results) {
      const auto rows = aggregate_by_leaf_cardinality(r.trials);
      write_aggregate_rows(f, r.series + ',' + std::to_string(seed) + ',', rows, false);
      ChartSeries s{r.series, {}};
      for (const auto& row : rows) s.points.emplace_back(row.node_cardinality, row.mean_error);
      ch.series.push_back(std::move(s));
    }
    written.push_back("leaf_cardinality_stats.csv");
    chart_files.emplace_back("leaf_cardinality.svg", std::move(ch));
  }

  {
    auto f = open_out(dir / "trial_histograms.csv");
    f << "preset,seed,trial_id,min_size,test_denominator,node_cardinality,test_errors,tree_count\n";
    for (const auto& r : results)
      for (const auto& t : r.trials)
        for (std::size_t c = 0; c < t.summary.rows.size(); ++c) {
          const auto& h = t.summary.rows[c].error_histogram;
          for (std::size_t e = 0; e < h.size(); ++e)
            if (h[e])
              f << r.series << ',' << seed << ',' << t.trial_id << ',' << opt(t.min_size) << ','
                << t.test_denominator() << ',' << c << ',' << e << ',' << h[e] << '\n';
        }
    written.push_back("trial_histograms.csv");
  }

  {
    auto f = open_out(dir / "run_manifest.csv");
    f << "preset,seed,trial_id,status,min_size,total_trees,wall_time_ms,redraws\n";
    for (const auto& r : results)
      for (const auto& m : r.manifest) {
        char ms[32];
        std::snprintf(ms, sizeof ms, "%.3f", m.wall_time_ms);
        f << r.series << ',' << seed << ',' << m.trial_id << ','
          << (m.accepted ? "accepted" : "rejected") << ',' << opt(m.min_size) << ','
          << m.total_trees << ',' << ms << ',' << m.redraws << '\n';
      }
    written.push_back("run_manifest.csv");
  }

  if (charts)
    for (const auto& [name, ch] : chart_files) {
      auto f = open_out(dir / name);
      f << render_svg(ch);
      written.push_back(name);
    }
  return written;
}

std::map<std::string, std::vector<TrialRecord>> read_trial_histograms(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("preset,seed,trial_id,", 0) != 0)
    throw Error(ErrorKind::MalformedHeader, "not a trial_histograms.csv file");
  std::map<std::string, std::map<std::size_t, TrialRecord>> acc;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 8)
      throw Error(ErrorKind::MalformedRow, "trial_histograms.csv line " + std::to_string(line_no));
    try {
      auto& t = acc[cells[0]][std::stoul(cells[2])];
      t.trial_id = std::stoul(cells[2]);
      t.seed = std::stoull(cells[1]);
      if (!cells[3].empty()) t.min_size = std::stoul(cells[3]);
      t.summary.test_denominator = std::stoull(cells[4]);
      const std::size_t c = std::stoul(cells[5]), e = std::stoul(cells[6]);
      const std::uint64_t n = std::stoull(cells[7]);
      if (e > t.summary.test_denominator) throw std::out_of_range("errors");
      if (t.summary.rows.size() <= c) t.summary.rows.resize(c + 1);
      auto& row = t.summary.rows[c];
      if (row.error_histogram.empty()) row.error_histogram.assign(t.summary.test_denominator + 1, 0);
      row.error_histogram[e] += n;
      row.tree_count += n;
      if (e == 0) row.correct_tree_count += n;
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::MalformedRow, "trial_histograms.csv line " + std::to_string(line_no));
    }
  }
  std::map<std::string, std::vector<TrialRecord>> out;
  for (auto& [series, trials] : acc) {
    auto& v = out[series];
    for (auto& [id, t] : trials) {
      for (auto& row : t.summary.rows)
        if (row.error_histogram.empty()) row.error_histogram.assign(t.summary.test_denominator + 1, 0);
      v.push_back(std::move(t));
    }
  }
  return out;
}

std::map<std::string, std::vector<PolicyRow>> policy_from_run(const std::string& run_dir) {
  const fs::path p = fs::path(run_dir) / "trial_histograms.csv";
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + p.string() + "'");
  std::map<std::string, std::vector<PolicyRow>> out;
  for (const auto& [series, trials] : read_trial_histograms(in)) out[series] = derive_policy(trials);
  return out;
}

}  // namespace forestscope
