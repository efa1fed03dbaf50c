#include "forestscope/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "forestscope/error.hpp"
#include "forestscope/experiments.hpp"
#include "forestscope/forest.hpp"
#include "forestscope/report.hpp"

namespace forestscope::cli {

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig:
    case ErrorKind::UnknownPreset:
    case ErrorKind::OutOfRange:
      return kConfig;
    case ErrorKind::InvalidSchema:
    case ErrorKind::InvalidExample:
    case ErrorKind::MalformedHeader:
    case ErrorKind::MalformedRow:
    case ErrorKind::UnknownToken:
    case ErrorKind::ContradictoryExamples:
    case ErrorKind::IncompatibleConcept:
    case ErrorKind::InvalidTree:
    case ErrorKind::TreeParse:
    case ErrorKind::EmptyInput:
      return kInput;
    case ErrorKind::Io:
      return kIo;
    case ErrorKind::SpaceOverflow:
    case ErrorKind::OracleBound:
    case ErrorKind::Truncated:
    case ErrorKind::FilterExhausted:
    case ErrorKind::CoverageExceedsTrain:
    case ErrorKind::MixedDenominators:
      return kLimit;
  }
  return kFailure;
}

std::size_t default_threads() {
  if (const char* env = std::getenv("FORESTSCOPE_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
    throw Error(ErrorKind::InvalidConfig, "FORESTSCOPE_THREADS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Dataset source_dataset(const std::string& file, const std::string& concept_name) {
  if (!file.empty()) return load_dataset_file(file);
  return apply_concept(builtin_concept(concept_name), builtin_schema(concept_name));
}

int cmd_datasets(const std::string& validate_file, std::ostream& out) {
  if (!validate_file.empty()) {
    const Dataset d = load_dataset_file(validate_file);
    const auto& schema = d.schema();
    out << "examples," << d.size() << '\n';
    out << "distinct_instances," << d.distinct_instance_count() << '\n';
    out << "features," << schema.features().size() << '\n';
    const auto counts = d.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c)
      out << "class," << schema.classes()[c] << ',' << counts[c] << '\n';
    return kOk;
  }
  out << "kind,name,features,instances\n";
  for (const auto& name : builtin_concept_names()) {
    if (name.find('<') != std::string::npos) {
      out << "concept," << name << ",n,2^n\n";
      continue;
    }
    const auto schema = builtin_schema(name);
    out << "concept," << name << ',' << schema.features().size() << ','
        << schema.instance_space_size() << '\n';
  }
  const std::filesystem::path dir(FORESTSCOPE_DATA_DIR);
  std::vector<std::string> files;
  if (std::filesystem::is_directory(dir))
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.path().extension() == ".csv") files.push_back(e.path().filename().string());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const Dataset d = load_dataset_file((dir / f).string());
    out << "file," << f << ',' << d.schema().features().size() << ',' << d.size() << '\n';
  }
  return kOk;
}

int cmd_enumerate(const Dataset& data, std::optional<std::size_t> max_nodes, std::uint64_t tree_cap,
                  bool emit_trees, std::ostream& out) {
  const std::size_t distinct = data.distinct_instance_count();
  const std::size_t cap = max_nodes.value_or(distinct > 0 ? distinct - 1 : 0);
  std::map<std::size_t, std::uint64_t> counts;
  std::map<std::size_t, std::vector<std::string>> trees;
  enumerate_consistent(data, {cap, tree_cap}, [&](const TreeVisit& v) {
    ++counts[v.node_cardinality()];
    if (emit_trees) trees[v.node_cardinality()].push_back(to_string(v.build(), data.schema()));
  });
  out << "node_cardinality,tree_count\n";
  for (const auto& [c, n] : counts) out << c << ',' << n << '\n';
  if (emit_trees)
    for (auto& [c, list] : trees) {
      std::sort(list.begin(), list.end());
      for (const auto& t : list) out << t << '\n';
    }
  return kOk;
}

int cmd_oracle_check(std::size_t k, std::size_t labelings, std::uint64_t seed,
                     std::optional<std::size_t> max_nodes, std::ostream& out) {
  if (k == 0 || k > kNaiveMaxFeatures)
    throw Error(ErrorKind::OutOfRange,
                "--features must be in [1, " + std::to_string(kNaiveMaxFeatures) + "]");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) names.push_back("f" + std::to_string(i));
  const auto schema = FeatureSchema::binary(names);
  const auto space = instance_space(schema);
  const std::size_t cap = max_nodes.value_or(space.size() - 1);
  std::size_t matched = 0;
  for (std::size_t m = 0; m < labelings; ++m) {
    Generator gen(derive_seed(seed, "oracle-check", m));
    std::vector<LabeledExample> ex;
    for (const auto& inst : space)
      ex.push_back({inst, static_cast<ClassIndex>(uniform_below(gen, 2))});
    const Dataset d(schema, std::move(ex));
    std::vector<std::string> fast, naive;
    for (const auto& t : collect_consistent(d, {cap, 0})) fast.push_back(to_string(t, schema));
    for (const auto& t : enumerate_naive(d, {cap, 0})) naive.push_back(to_string(t, schema));
    std::sort(fast.begin(), fast.end());
    std::sort(naive.begin(), naive.end());
    if (fast == naive) ++matched;
    else
      out << "mismatch labeling " << m << ": fast " << fast.size() << " naive " << naive.size()
          << '\n';
  }
  out << matched << '/' << labelings << (matched == labelings ? " match" : " mismatch") << '\n';
  return matched == labelings ? kOk : kMismatch;
}

struct ExperimentArgs {
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out_dir;
  bool charts = false;
  std::optional<std::size_t> threads;
  bool extended = false;
  bool post_filter = false;
  std::string pooling = "trial";
  bool quiet = false;
};

int cmd_experiment(const ExperimentArgs& a, std::ostream& out, std::ostream& err) {
  ExperimentConfig config = preset(a.preset_name);
  if (a.seed) config.master_seed = *a.seed;
  if (a.trials) override_trials(config, *a.trials);
  if (a.post_filter) config.post_filter = true;
  config.pooling = a.pooling == "pair" ? Pooling::PairWeighted : Pooling::TrialWeighted;
  validate(config);

  RunOptions opts;
  opts.threads = a.threads ? *a.threads : default_threads();
  opts.extended = a.extended;
  std::mutex log_mutex;
  if (!a.quiet)
    opts.on_trial = [&](const std::string& series, const ManifestRow& m) {
      std::lock_guard lock(log_mutex);
      err << "trial " << series << ' ' << m.trial_id << ' '
          << (m.accepted ? "accepted" : "rejected") << " trees=" << m.total_trees << '\n';
    };
  const auto results = run_trials(config, opts);
  const std::string dir = a.out_dir.empty() ? "out/" + config.name : a.out_dir;
  for (const auto& f : write_outputs(config, results, dir, a.charts))
    out << (std::filesystem::path(dir) / f).string() << '\n';
  return kOk;
}

int cmd_policy(const std::string& run_dir, std::ostream& out) {
  out << "preset,min_size,preferred_cardinality,trial_count\n";
  for (const auto& [series, rows] : policy_from_run(run_dir))
    for (const auto& r : rows)
      out << series << ',' << r.min_size << ',' << r.preferred_cardinality << ',' << r.trial_count
          << '\n';
  return kOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Enumerate consistent decision trees and study size versus accuracy",
               "forestscope"};
  app.require_subcommand(1);

  std::string validate_file;
  auto* datasets = app.add_subcommand("datasets", "List built-in concepts and bundled data files");
  datasets->add_option("--validate", validate_file, "Load a dataset file and print its summary");

  std::string data_file, concept_name;
  std::optional<std::size_t> max_nodes;
  std::uint64_t tree_cap = kDefaultTreeCap;
  bool emit_trees = false;
  auto* enumerate = app.add_subcommand("enumerate", "Count consistent trees per node cardinality");
  auto* data_opt = enumerate->add_option("--data", data_file, "Dataset file");
  auto* concept_opt = enumerate->add_option("--concept", concept_name, "Built-in concept");
  data_opt->excludes(concept_opt);
  enumerate->add_option("--max-nodes", max_nodes, "Node budget (default: distinct examples - 1)");
  enumerate->add_option("--tree-cap", tree_cap, "Abort after this many trees (0 = no cap)");
  enumerate->add_flag("--emit-trees", emit_trees, "Also print every tree, sorted");

  ExperimentArgs ea;
  auto* experiment = app.add_subcommand("experiment", "Run a preset experiment and write CSVs");
  experiment->add_option("--preset", ea.preset_name, "Preset name")->required();
  experiment->add_option("--seed", ea.seed, "Master seed");
  experiment->add_option("--trials", ea.trials, "Override the trial count of every leg")
      ->check(CLI::PositiveNumber);
  experiment->add_option("--out", ea.out_dir, "Output directory (default: out/<preset>)");
  experiment->add_flag("--charts", ea.charts, "Also write SVG charts");
  experiment->add_option("--threads", ea.threads, "Worker threads")->check(CLI::PositiveNumber);
  experiment->add_flag("--extended", ea.extended, "Include extended legs");
  experiment->add_flag("--post-filter", ea.post_filter,
                       "Drop rejected draws instead of redrawing them");
  experiment->add_option("--pooling", ea.pooling, "Pairwise pooling")
      ->check(CLI::IsMember({"pair", "trial"}));
  experiment->add_flag("--quiet", ea.quiet, "No per-trial log lines");

  std::size_t features = 3, labelings = 50;
  std::uint64_t oracle_seed = kDefaultMasterSeed;
  std::optional<std::size_t> oracle_nodes;
  auto* oracle = app.add_subcommand("oracle-check", "Compare the enumerator against brute force");
  oracle->add_option("--features", features, "Binary features");
  oracle->add_option("--labelings", labelings, "Random labelings of the instance space");
  oracle->add_option("--seed", oracle_seed, "Seed");
  oracle->add_option("--max-nodes", oracle_nodes, "Node budget (default: complete)");

  std::string run_dir;
  auto* policy = app.add_subcommand("policy", "Derive the size policy from a finished run");
  policy->add_option("--run", run_dir, "Run directory")->required();

  std::vector<const char*> argv{"forestscope"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*datasets) return cmd_datasets(validate_file, out);
    if (*enumerate) {
      if (data_file.empty() && concept_name.empty()) {
        err << "error: usage: enumerate needs --data or --concept\n";
        return kUsage;
      }
      return cmd_enumerate(source_dataset(data_file, concept_name), max_nodes, tree_cap,
                           emit_trees, out);
    }
    if (*experiment) return cmd_experiment(ea, out, err);
    if (*oracle) return cmd_oracle_check(features, labelings, oracle_seed, oracle_nodes, out);
    if (*policy) return cmd_policy(run_dir, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace forestscope::cli
