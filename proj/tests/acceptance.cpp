// One line per acceptance criterion; exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "forestscope/experiments.hpp"
#include "forestscope/report.hpp"
#include "support.hpp"

using namespace fst;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

int failures = 0;

void report(int id, const char* title, const Verdict& v, double secs) {
  std::printf("[%s] criterion %d: %s (%.1f s)%s%s\n", v.pass ? "PASS" : "FAIL", id, title, secs,
              v.detail.empty() ? "" : " -- ", v.detail.c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::vector<LegResult> run_preset(const std::string& name, std::optional<std::size_t> trials = {},
                                  std::size_t threads = 1) {
  auto c = preset(name);
  if (trials) override_trials(c, *trials);
  RunOptions o;
  o.threads = threads;
  return run_trials(c, o);
}

const AggregateRow* row_at(const std::vector<AggregateRow>& rows, std::size_t c) {
  for (const auto& r : rows)
    if (r.node_cardinality == c) return &r;
  return nullptr;
}

const PairwiseRow* diff_at(const std::vector<PairwiseRow>& rows, std::size_t d) {
  for (const auto& r : rows)
    if (r.diff == d) return &r;
  return nullptr;
}

// Tolerances.
constexpr double kCountTolerance = 0.15;
constexpr double kCorrectTolerance = 0.30;
constexpr double kProbabilityTolerance = 0.06;
constexpr double kGroupTolerance = 0.15;
constexpr double kSumTolerance = 1e-12;
constexpr double kMuxGapTarget = 0.04;
constexpr double kMuxGapTolerance = 0.03;

void criterion1() {
  const auto t0 = Clock::now();
  Verdict v;
  const auto counts = counts_by_cardinality(full("xyz-or-ab"), 8);
  v.require(counts == std::map<std::size_t, std::uint64_t>{{8, 72}}, "counts differ from {8: 72}");
  const double s = seconds_since(t0);
  v.require(s < 5.0, "slower than 5 s");
  report(1, "72 consistent trees at cardinality 8 on the full XYZ or AB data", v, s);
}

void criterion2() {
  const auto t0 = Clock::now();
  Verdict v;
  auto expect_min = [&](const std::string& label, const Dataset& d, std::size_t nodes,
                        std::optional<std::size_t> leaves) {
    const auto m = min_consistent_size(d, d.distinct_instance_count());
    if (m != nodes) {
      v.require(false, label + " minimum " + (m ? std::to_string(*m) : "none") + " != " +
                           std::to_string(nodes));
      return;
    }
    if (!leaves) return;
    std::set<std::size_t> seen;
    for (const auto& t : collect_consistent(d, {nodes, 0})) seen.insert(t.leaf_cardinality());
    v.require(seen.count(*leaves) == 1, label + " has no minimum tree with " +
                                            std::to_string(*leaves) + " leaves");
  };
  expect_min("xyz-or-ab", full("xyz-or-ab"), 8, std::nullopt);
  expect_min("mux6", full("mux6"), 7, std::nullopt);
  expect_min("a", full("a"), 1, std::nullopt);
  expect_min("ab", full("ab"), 2, std::nullopt);
  expect_min("lenses", load_dataset_file(FORESTSCOPE_DATA_DIR "/lenses.csv"), 6, 9);
  expect_min("shuttle", load_dataset_file(FORESTSCOPE_DATA_DIR "/shuttle.csv"), 7, 14);
  report(2, "minimum consistent sizes (8, 7, 1, 2, lenses 6/9, shuttle 7/14)", v, seconds_since(t0));
}

void criterion3() {
  const auto t0 = Clock::now();
  Verdict v;
  const auto schema = FeatureSchema::binary({"f0", "f1", "f2"});
  const auto space = instance_space(schema);
  std::size_t matched = 0;
  for (std::size_t m = 0; m < 50; ++m) {
    Generator gen(derive_seed(kDefaultMasterSeed, "acceptance/oracle", m));
    std::vector<LabeledExample> ex;
    for (const auto& x : space) ex.push_back({x, static_cast<ClassIndex>(uniform_below(gen, 2))});
    const Dataset d(schema, ex);
    bool all = true;
    for (std::size_t cap = 0; cap <= 7; ++cap)
      all &= canonical(collect_consistent(d, {cap, 0}), schema) ==
             canonical(enumerate_naive(d, {cap, 0}), schema);
    matched += all;
  }
  v.require(matched == 50, std::to_string(matched) + "/50 labelings match");
  const double s = seconds_since(t0);
  v.require(s < 60.0, "slower than 1 min");
  report(3, "fast and naive enumerators agree on 50 labelings, caps 0..7", v, s);
}

void criterion4() {
  // Reference per-cardinality averages: consistent trees, correct trees.
  const std::map<std::size_t, std::pair<double, double>> reference{
      {5, {12.3, 0.0}},     {6, {27.6, 0.0}},     {7, {117.1, 0.0}},   {8, {377.0, 17.8}},
      {9, {879.4, 37.8}},   {10, {1799.9, 50.2}}, {11, {3097.8, 41.6}}, {12, {4383.0, 95.4}},
      {13, {5068.9, 66.6}}, {14, {4828.3, 37.7}}, {15, {3631.5, 31.3}}, {16, {1910.6, 14.8}}};
  const auto t0 = Clock::now();
  Verdict v;
  const auto rows = aggregate_by_cardinality(run_preset("fig1")[0].trials);
  for (const auto& [c, ref] : reference) {
    const auto* r = row_at(rows, c);
    if (!r) {
      v.require(false, "c=" + std::to_string(c) + " missing");
      continue;
    }
    v.require(std::abs(r->mean_tree_count - ref.first) <= kCountTolerance * ref.first,
              fmt("c=%.0f trees %.1f vs %.1f", double(c), r->mean_tree_count, ref.first));
    // A zero reference admits no relative slack.
    v.require(std::abs(r->mean_correct_count - ref.second) <= kCorrectTolerance * ref.second,
              fmt("c=%.0f correct %.1f vs %.1f", double(c), r->mean_correct_count, ref.second));
  }
  const double s = seconds_since(t0);
  v.require(s < 120.0, "slower than 2 min");
  report(4, "fig1 mean tree counts within 15% and correct counts within 30%, c=5..16", v, s);
}

void criterion5() {
  const auto t0 = Clock::now();
  Verdict v;
  const auto r = run_preset("fig5");
  v.require(r[0].trials.size() == 32, "trial count != 32");
  for (const auto& row : aggregate_by_cardinality(r[0].trials))
    if (row.node_cardinality < 8)
      v.require(row.mean_error == 1.0,
                fmt("c=%.0f mean error %.6f", double(row.node_cardinality), row.mean_error));
  const double s = seconds_since(t0);
  v.require(s < 180.0, "slower than 3 min");
  report(5, "leave-one-out mean error exactly 1.0 below cardinality 8", v, s);
}

void criterion6() {
  const auto t0 = Clock::now();
  Verdict v;
  const auto fig1 = aggregate_by_cardinality(run_preset("fig1")[0].trials);
  auto err = [](const std::vector<AggregateRow>& rows, std::size_t c) {
    const auto* r = row_at(rows, c);
    return r ? r->mean_error : std::nan("");
  };
  v.require(err(fig1, 5) < err(fig1, 4), fmt("fig1 c=5 %.4f not below c=4 %.4f", err(fig1, 5), err(fig1, 4)));
  v.require(err(fig1, 7) < err(fig1, 6), fmt("fig1 c=7 %.4f not below c=6 %.4f", err(fig1, 7), err(fig1, 6)));
  const auto mux = aggregate_by_cardinality(run_preset("fig13", 50)[0].trials);
  const double gap = err(mux, 7) - err(mux, 4);
  v.require(std::abs(gap - kMuxGapTarget) <= kMuxGapTolerance,
            fmt("mux6 c=4 %.4f vs c=7 %.4f (gap %.4f, want 0.04 +- 0.03)", err(mux, 4), err(mux, 7), gap));
  const double s = seconds_since(t0);
  v.require(s < 3600.0, "slower than 1 h");
  report(6, "non-monotone error: fig1 c5<c4, c7<c6; mux6 c4 about 4 points below c7", v, s);
}

// Shared by criteria 7 and 8; the first caller pays for the run.
const std::vector<TrialRecord>& thousand() {
  static const std::vector<TrialRecord> t = run_preset("fig10-12")[0].trials;
  return t;
}

void criterion7() {
  const auto t0 = Clock::now();
  Verdict v;
  const auto& trials = thousand();
  const auto pooling = preset("fig10-12").pooling;
  const auto all = pairwise(trials, Baseline::AllPairs, std::nullopt, pooling);
  const auto min6 = pairwise(trials, Baseline::MinVsLarger, 6, pooling);
  const auto min7 = pairwise(trials, Baseline::MinVsLarger, 7, pooling);
  for (const auto* rows : {&all, &min6, &min7})
    for (const auto& r : *rows)
      v.require(std::abs(r.p_smaller_better + r.p_equal + r.p_larger_better - 1.0) <= kSumTolerance,
                fmt("diff %.0f probabilities sum to %.15f", double(r.diff),
                    r.p_smaller_better + r.p_equal + r.p_larger_better));
  for (std::size_t d = 2; d <= 8; ++d) {
    const auto* r = diff_at(all, d);
    v.require(r && r->p_smaller_better > r->p_larger_better,
              "all-pairs diff " + std::to_string(d) + " larger trees win more often");
  }
  auto near = [&](const std::vector<PairwiseRow>& rows, std::size_t d, double PairwiseRow::*field,
                  double target, const char* label) {
    const auto* r = diff_at(rows, d);
    const double got = r ? r->*field : std::nan("");
    v.require(std::abs(got - target) <= kProbabilityTolerance,
              std::string(label) + fmt(" %.3f vs %.3f", got, target));
  };
  near(min6, 2, &PairwiseRow::p_larger_better, 0.560, "min6 diff2 p_larger_better");
  near(min6, 2, &PairwiseRow::p_equal, 0.208, "min6 diff2 p_equal");
  near(min7, 1, &PairwiseRow::p_larger_better, 0.345, "min7 diff1 p_larger_better");
  near(min7, 1, &PairwiseRow::p_smaller_better, 0.312, "min7 diff1 p_smaller_better");
  const double s = seconds_since(t0);
  v.require(s < 1800.0, "slower than 30 min");
  report(7, "pairwise probabilities over 1000 trials", v, s);
}

void criterion8() {
  const auto t0 = Clock::now();
  Verdict v;
  const auto policy = derive_policy(thousand());
  const std::map<std::size_t, std::pair<std::size_t, double>> expect{
      {4, {5, 300}}, {5, {5, 351}}, {6, {8, 211}}};
  for (const auto& [m, e] : expect) {
    const PolicyRow* row = nullptr;
    for (const auto& r : policy)
      if (r.min_size == m) row = &r;
    if (!row) {
      v.require(false, "no trials with minimum " + std::to_string(m));
      continue;
    }
    v.require(row->preferred_cardinality == e.first,
              "min " + std::to_string(m) + " prefers " + std::to_string(row->preferred_cardinality) +
                  ", want " + std::to_string(e.first));
    v.require(std::abs(double(row->trial_count) - e.second) <= kGroupTolerance * e.second,
              fmt("min %.0f group of %.0f trials vs %.0f", double(m), double(row->trial_count), e.second));
  }
  report(8, "policy 4->5, 5->5, 6->8 with group sizes within 15%", v, seconds_since(t0));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion9() {
  const auto t0 = Clock::now();
  Verdict v;
  Generator g(derive_seed(kDefaultMasterSeed, "acceptance/properties", 0));

  // Structure, consistency, uniqueness and the cardinality bound.
  bool structure_ok = true, unique_ok = true, bound_ok = true;
  for (int round = 0; round < 80; ++round) {
    const auto schema = random_schema(g, 5, 3, 3, 400);
    const auto d = random_dataset(g, schema, 14);
    std::set<std::string> seen;
    std::uint64_t n = 0;
    const std::size_t distinct = d.distinct_instance_count();
    enumerate_consistent(d, {distinct, 100000}, [&](const TreeVisit& tv) {
      const auto t = tv.build();
      structure_ok &= !check_structure(t, d) && is_consistent(t, d);
      bound_ok &= tv.node_cardinality() + 1 <= distinct;
      seen.insert(to_string(t, schema));
      ++n;
    });
    unique_ok &= seen.size() == n;
  }
  const auto fig1 = run_preset("fig1")[0].trials;
  for (const auto& t : fig1)
    if (auto top = t.summary.max_cardinality()) bound_ok &= *top + 1 <= t.distinct_train;
  v.require(structure_ok, "a visited tree violates the constraints or is inconsistent");
  v.require(unique_ok, "duplicate canonical forms");
  v.require(bound_ok, "node cardinality exceeds distinct examples - 1");

  // Feature-order and class-label permutations.
  bool perm_ok = true;
  for (int round = 0; round < 30; ++round) {
    const auto schema = random_schema(g, 4, 3, 3, 200);
    const auto d = random_dataset(g, schema, 10);
    const auto base = counts_by_cardinality(d, d.distinct_instance_count());
    std::vector<std::size_t> perm(schema.feature_count());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), g);
    std::vector<ClassIndex> pi(schema.class_count());
    std::iota(pi.begin(), pi.end(), ClassIndex{0});
    std::shuffle(pi.begin(), pi.end(), g);
    std::vector<Feature> fs;
    for (auto p : perm) fs.push_back(schema.feature(p));
    std::vector<std::string> classes(pi.size());
    for (std::size_t c = 0; c < pi.size(); ++c) classes[pi[c]] = schema.classes()[c];
    std::vector<LabeledExample> ex;
    for (const auto& e : d.examples()) {
      Instance x;
      for (auto p : perm) x.push_back(e.instance[p]);
      ex.push_back({x, pi[e.label]});
    }
    const Dataset moved(FeatureSchema(fs, classes), ex);
    perm_ok &= counts_by_cardinality(moved, moved.distinct_instance_count()) == base;
  }
  v.require(perm_ok, "counts change under a permutation");

  // Histogram pairwise against explicit pairs on small trials.
  bool pair_ok = true;
  std::size_t small = 0;
  const auto xyz = full("xyz-or-ab");
  const auto space = instance_space(xyz.schema());
  for (std::size_t k = 0; k < 200 && small < 40; ++k) {
    const auto split = split_disjoint(xyz, 8 + uniform_below(g, 6), g);
    TrialRecord t;
    t.summary = forest_summary(split.train, split.test, space, {31, 0});
    t.min_size = t.summary.min_cardinality();
    if (t.summary.total_trees() > 200) continue;
    ++small;
    const std::vector<TrialRecord> one{t};
    for (bool min_only : {false, true}) {
      const auto rows = pairwise(one, min_only ? Baseline::MinVsLarger : Baseline::AllPairs,
                                 std::nullopt, Pooling::PairWeighted);
      const auto brute = brute_pairwise(t, min_only);
      pair_ok &= rows.size() == brute.size();
      for (const auto& r : rows) {
        const auto it = brute.find(r.diff);
        pair_ok &= it != brute.end() && it->second.smaller == r.smaller_better &&
                   it->second.equal == r.equal && it->second.larger == r.larger_better;
      }
    }
  }
  v.require(pair_ok, "histogram pairwise differs from explicit pairs");
  v.require(small > 0, "no trial with at most 200 trees to cross-check");

  // Output bytes across worker counts.
  std::vector<std::map<std::string, std::string>> runs;
  auto cfg = preset("fig10-12");
  override_trials(cfg, 40);
  for (std::size_t threads : {1, 2, 8}) {
    RunOptions o;
    o.threads = threads;
    const auto dir = fs::temp_directory_path() / ("forestscope_accept_" + std::to_string(threads));
    fs::remove_all(dir);
    std::map<std::string, std::string> bytes;
    for (const auto& f : write_outputs(cfg, run_trials(cfg, o), dir.string(), true)) {
      if (f == "run_manifest.csv") continue;  // wall_time_ms differs by design
      bytes[f] = slurp(dir / f);
    }
    runs.push_back(bytes);
  }
  v.require(runs[0] == runs[1] && runs[0] == runs[2], "CSV bytes depend on thread count");
  report(9, "property suite (structure, uniqueness, permutations, bound, pairwise, threads)", v,
         seconds_since(t0));
}

void criterion10(bool extended) {
  std::printf("[EXCLUDED] criterion 10: figure curves, the original RNG stream and the mux6 cap-10 leg"
              " have no asserted tolerance\n");
  if (!extended) return;
  const auto t0 = Clock::now();
  RunOptions o;
  o.extended = true;
  const auto r = run_trials(preset("fig13"), o);
  for (const auto& leg : r) {
    if (leg.leg.max_nodes != 10) continue;
    for (const auto& row : aggregate_by_cardinality(leg.trials))
      std::printf("  %s c=%zu mean_error=%.4f trials=%zu\n", leg.series.c_str(), row.node_cardinality,
                  row.mean_error, row.trials_present);
  }
  std::printf("  (%.1f s)\n", seconds_since(t0));
}

}  // namespace

int main(int argc, char** argv) {
  bool extended = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--extended") == 0) extended = true;
  try {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10(extended);
  } catch (const std::exception& e) {
    std::printf("[FAIL] aborted: %s\n", e.what());
    return 100;
  }
  std::printf("%d criteria failed\n", failures);
  return failures;
}
