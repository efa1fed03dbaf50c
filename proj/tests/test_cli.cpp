#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "forestscope/cli.hpp"
#include "forestscope/report.hpp"
#include "support.hpp"

using namespace fst;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = forestscope::cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("forestscope_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("enumerate prints per-cardinality counts") {
  const auto r = run_cli({"enumerate", "--concept", "xyz-or-ab", "--max-nodes", "8"});
  CHECK(r.code == 0);
  CHECK(r.out == "node_cardinality,tree_count\n8,72\n");

  const auto trees = run_cli({"enumerate", "--concept", "xyz-or-ab", "--max-nodes", "8", "--emit-trees"});
  std::istringstream lines(trees.out);
  std::string line;
  std::vector<std::string> emitted;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] == '(') emitted.push_back(line);
  CHECK(emitted.size() == 72);
  CHECK(std::is_sorted(emitted.begin(), emitted.end()));

  const auto lenses = run_cli({"enumerate", "--data", FORESTSCOPE_DATA_DIR "/lenses.csv", "--max-nodes", "6"});
  CHECK(lenses.out == "node_cardinality,tree_count\n6,3\n");
}

TEST_CASE("oracle-check") {
  const auto r = run_cli({"oracle-check", "--features", "3", "--labelings", "50", "--seed", "1"});
  CHECK(r.code == 0);
  CHECK(r.out == "50/50 match\n");
  CHECK(run_cli({"oracle-check", "--features", "9"}).code == forestscope::cli::kConfig);
}

TEST_CASE("error handling has distinct exit codes") {
  using namespace forestscope::cli;
  const auto unknown_flag = run_cli({"enumerate", "--bogus"});
  CHECK(unknown_flag.code == kUsage);
  CHECK(unknown_flag.err.rfind("error: usage: ", 0) == 0);
  CHECK(run_cli({}).code == kUsage);
  CHECK(run_cli({"enumerate"}).code == kUsage);

  const auto missing = run_cli({"enumerate", "--data", "/nonexistent.csv"});
  CHECK(missing.code == kIo);
  CHECK(missing.err.rfind("error: io: ", 0) == 0);

  const auto bad_preset = run_cli({"experiment", "--preset", "fig99"});
  CHECK(bad_preset.code == kConfig);
  CHECK(bad_preset.err.rfind("error: unknown-preset: ", 0) == 0);

  const auto dir = temp_dir("bad_data");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.csv") << "a=0|1,class=n|p\n0,q\n";
  const auto bad = run_cli({"datasets", "--validate", (dir / "bad.csv").string()});
  CHECK(bad.code == kInput);
  CHECK(bad.err.rfind("error: unknown-token: ", 0) == 0);

  CHECK(run_cli({"--help"}).code == kOk);
}

TEST_CASE("datasets lists built-ins and validates files") {
  const auto r = run_cli({"datasets"});
  CHECK(r.code == 0);
  CHECK(r.out.find("concept,xyz-or-ab,5,32") != std::string::npos);
  CHECK(r.out.find("file,lenses.csv") != std::string::npos);
  const auto v = run_cli({"datasets", "--validate", FORESTSCOPE_DATA_DIR "/lenses.csv"});
  CHECK(v.out.find("examples,24") != std::string::npos);
}

TEST_CASE("experiment writes CSVs and charts; policy reads them back") {
  const auto dir = temp_dir("fig5");
  const auto r = run_cli({"experiment", "--preset", "fig5", "--seed", "1", "--out", dir.string(),
                      "--charts", "--threads", "2", "--quiet"});
  REQUIRE(r.code == 0);
  const auto csv = slurp(dir / "cardinality_stats.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "preset,seed,node_cardinality,trials_present,mean_error,ci_half_width,mean_tree_count,"
        "mean_correct_count");
  std::size_t small_rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 8);
    if (std::stoul(cells[2]) < 8) {
      CHECK(cells[4] == "1.000000");
      ++small_rows;
    }
  }
  CHECK(small_rows > 0);
  CHECK(csv.find('\r') == std::string::npos);
  const auto svg = slurp(dir / "cardinality.svg");
  CHECK(svg.rfind("<svg", 0) == 0);

  const auto direct = run_trials(preset("fig5"));
  const auto p = run_cli({"policy", "--run", dir.string()});
  CHECK(p.code == 0);
  std::ostringstream expect;
  expect << "preset,min_size,preferred_cardinality,trial_count\n";
  for (const auto& row : derive_policy(direct[0].trials))
    expect << "fig5," << row.min_size << ',' << row.preferred_cardinality << ',' << row.trial_count
           << '\n';
  CHECK(p.out == expect.str());
}

TEST_CASE("trial histogram round trip") {
  auto c = preset("fig10-12");
  override_trials(c, 30);
  const auto results = run_trials(c);
  const auto dir = temp_dir("roundtrip");
  write_outputs(c, results, dir.string(), false);
  std::ifstream in(dir / "trial_histograms.csv");
  const auto back = read_trial_histograms(in);
  REQUIRE(back.count("fig10-12"));
  const auto& trials = back.at("fig10-12");
  REQUIRE(trials.size() == results[0].trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& a = results[0].trials[i].summary;
    const auto& b = trials[i].summary;
    CHECK(trials[i].min_size == results[0].trials[i].min_size);
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
      if (a.rows[k].tree_count == 0) continue;
      REQUIRE(k < b.rows.size());
      CHECK(a.rows[k].error_histogram == b.rows[k].error_histogram);
    }
  }
  std::ostringstream x, y;
  const auto px = pairwise(results[0].trials, Baseline::AllPairs);
  const auto py = pairwise(trials, Baseline::AllPairs);
  write_pairwise_csv(x, "s", 1, Baseline::AllPairs, std::nullopt, px);
  write_pairwise_csv(y, "s", 1, Baseline::AllPairs, std::nullopt, py);
  CHECK(x.str() == y.str());

  std::istringstream bad("nope\n");
  CHECK_THROWS_AS(read_trial_histograms(bad), Error);
}

TEST_CASE("format_real") {
  CHECK(format_real(1.0) == "1.000000");
  CHECK(format_real(0.1234567) == "0.123457");
}
