#include "forestscope/experiments.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <limits>
#include <mutex>
#include <thread>

namespace forestscope {

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::InvalidConfig, msg); }

ExperimentConfig xyz_base(std::string name, std::size_t trials) {
  ExperimentConfig c;
  c.name = std::move(name);
  c.concept_name = "xyz-or-ab";
  c.legs = {{"", 20, trials, std::nullopt}};
  return c;
}

RepresentativeBounds xyz_representative_bounds() {
  // Positive count within one standard deviation of 20 * 11/32; each feature
  // true in 7..13 of 20.
  RepresentativeBounds b;
  b.class_bounds = {std::nullopt, CountRange{5, 8}};
  b.value_bounds.assign(5, {std::nullopt, CountRange{7, 13}});
  return b;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig1",  "table1", "fig2",  "fig3",  "fig4",      "fig4-single", "fig5",  "fig6",
          "fig7",  "fig8",   "fig9",  "fig10-12", "table2", "fig13",      "fig14", "fig15"};
}

ExperimentConfig preset(const std::string& name) {
  if (name == "fig1" || name == "table1") return xyz_base(name, 100);
  if (name == "fig2") {
    auto c = xyz_base(name, 100);
    c.filter = FilterMode::Representative;
    c.bounds = xyz_representative_bounds();
    c.post_filter = true;
    return c;
  }
  if (name == "fig3") {
    auto c = xyz_base(name, 100);
    c.analyses.min_size_groups = true;
    return c;
  }
  if (name == "fig4" || name == "fig4-single") {
    auto c = xyz_base(name, 100);
    c.filter = FilterMode::LeafCoverage;
    c.per_leaf = name == "fig4" ? 2 : 1;
    return c;
  }
  if (name == "fig5") {
    ExperimentConfig c;
    c.name = name;
    c.concept_name = "xyz-or-ab";
    c.split = SplitMode::LeaveOneOut;
    c.legs = {{"", 31, 32, std::nullopt}};
    return c;
  }
  if (name == "fig6" || name == "fig7") {
    auto c = xyz_base(name, 100);
    c.concept_name = name == "fig6" ? "a" : "ab";
    return c;
  }
  if (name == "fig8") {
    auto c = xyz_base(name, 100);
    c.split = SplitMode::WithReplacement;
    c.legs[0].n_train = 31;
    c.test_n = 1000;
    return c;
  }
  if (name == "fig9") {
    auto c = xyz_base(name, 100);
    c.analyses.path_length = true;
    return c;
  }
  if (name == "fig10-12" || name == "table2") {
    auto c = xyz_base(name, 1000);
    c.analyses.min_size_groups = true;
    c.analyses.pairwise_all = true;
    c.analyses.pairwise_min = true;
    c.analyses.min_size_conditions = {std::nullopt, 5, 6, 7};
    c.analyses.policy = true;
    return c;
  }
  if (name == "fig13") {
    ExperimentConfig c;
    c.name = name;
    c.concept_name = "mux6";
    c.legs = {{"cap8", 20, 340, 8}};
    c.extended_legs = {{"cap10", 20, 10, 10}};
    return c;
  }
  if (name == "fig14") {
    ExperimentConfig c;
    c.name = name;
    c.data_file = "lenses.csv";
    c.legs = {{"n8", 8, 50, std::nullopt}, {"n12", 12, 50, std::nullopt},
              {"n18", 18, 50, std::nullopt}};
    c.analyses.leaf_cardinality = true;
    return c;
  }
  if (name == "fig15") {
    ExperimentConfig c;
    c.name = name;
    c.data_file = "shuttle.csv";
    c.legs = {{"n20", 20, 10, 7}, {"n50", 50, 10, 9}, {"n100", 100, 10, 11}};
    c.analyses.leaf_cardinality = true;
    return c;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw Error(ErrorKind::UnknownPreset, "unknown preset '" + name + "'; available: " + known);
}

void override_trials(ExperimentConfig& config, std::size_t trials) {
  if (config.split == SplitMode::LeaveOneOut)
    config_error("leave-one-out fixes the trial count to the dataset size");
  for (auto& leg : config.legs) leg.trials = trials;
  for (auto& leg : config.extended_legs) leg.trials = trials;
}

void validate(const ExperimentConfig& config) {
  if (config.concept_name.empty() == config.data_file.empty())
    config_error("exactly one of concept or data file must be set");
  if (config.legs.empty()) config_error("no trial legs");
  for (const auto* legs : {&config.legs, &config.extended_legs})
    for (const auto& leg : *legs)
      if (leg.trials == 0) config_error("trial count must be at least 1");
  if (config.filter != FilterMode::None && config.split != SplitMode::Disjoint)
    config_error("filters apply only to disjoint splits");
  if (config.split == SplitMode::WithReplacement && config.test_n == 0)
    config_error("with-replacement sampling needs a test size >= 1");
  if (config.filter == FilterMode::Representative && config.retry_limit == 0 && !config.post_filter)
    config_error("representative redraw needs a retry limit >= 1");
  if (config.filter == FilterMode::LeafCoverage && config.per_leaf == 0)
    config_error("leaf coverage needs per_leaf >= 1");
  if (!(config.bin_width > 0.0)) config_error("bin width must be positive");
}

Dataset load_source(const ExperimentConfig& config, const std::string& data_dir) {
  if (!config.concept_name.empty())
    return apply_concept(builtin_concept(config.concept_name), builtin_schema(config.concept_name));
  std::filesystem::path p(config.data_file);
  if (p.is_relative() && !std::filesystem::exists(p)) p = std::filesystem::path(data_dir) / p;
  return load_dataset_file(p.string());
}

std::string series_name(const ExperimentConfig& config, const Leg& leg) {
  return leg.label.empty() ? config.name : config.name + "/" + leg.label;
}

namespace {

struct Shared {
  const ExperimentConfig* config = nullptr;
  Dataset source;
  std::vector<Instance> space;
  std::vector<DecisionTree> reference_trees;  // leaf coverage only
};

struct Outcome {
  std::optional<TrialRecord> record;
  ManifestRow manifest;
};

Dataset subset(const Dataset& data, std::size_t skip) {
  std::vector<LabeledExample> rest;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (i != skip) rest.push_back(data.examples()[i]);
  return Dataset(data.schema(), std::move(rest));
}

std::vector<Instance> instances_of(const Dataset& d) {
  std::vector<Instance> out;
  for (const auto& ex : d.examples()) out.push_back(ex.instance);
  return out;
}

Outcome run_one(const Shared& sh, const Leg& leg, const std::string& series, std::size_t t) {
  const auto& cfg = *sh.config;
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  out.manifest.trial_id = t;
  out.manifest.seed = derive_seed(cfg.master_seed, series, t);
  Generator gen(out.manifest.seed);

  std::optional<Split> split;
  switch (cfg.split) {
    case SplitMode::LeaveOneOut: {
      Dataset held(sh.source.schema(), {sh.source.examples()[t]});
      split.emplace(Split{subset(sh.source, t), std::move(held)});
      break;
    }
    case SplitMode::WithReplacement: {
      Dataset train = sample_with_replacement(sh.source, leg.n_train, gen);
      Dataset test = sample_with_replacement(sh.source, cfg.test_n, gen);
      split.emplace(Split{std::move(train), std::move(test)});
      break;
    }
    case SplitMode::Disjoint:
      if (cfg.filter == FilterMode::LeafCoverage) {
        const auto& ref =
            sh.reference_trees[static_cast<std::size_t>(uniform_below(gen, sh.reference_trees.size()))];
        split.emplace(leaf_coverage_sample(sh.source, ref, cfg.per_leaf, leg.n_train, gen));
      } else if (cfg.filter == FilterMode::Representative) {
        const std::size_t attempts = cfg.post_filter ? 1 : cfg.retry_limit;
        for (std::size_t a = 0; a < attempts; ++a) {
          Split s = split_disjoint(sh.source, leg.n_train, gen);
          if (!representative_filter(s.train, cfg.bounds)) {
            split.emplace(std::move(s));
            break;
          }
          ++out.manifest.redraws;
        }
        if (!split && !cfg.post_filter)
          throw Error(ErrorKind::FilterExhausted,
                      series + " trial " + std::to_string(t) + ": no representative draw in " +
                          std::to_string(cfg.retry_limit) + " attempts");
      } else {
        split.emplace(split_disjoint(sh.source, leg.n_train, gen));
      }
      break;
  }

  if (!split) {
    out.manifest.accepted = false;
    out.manifest.redraws = 0;
  } else {
    std::vector<Instance> pop_storage;
    const std::vector<Instance>* pop = &sh.space;
    if (cfg.population == PopulationChoice::TrainSet) {
      pop_storage = instances_of(split->train);
      pop = &pop_storage;
    } else if (cfg.population == PopulationChoice::TestSet) {
      pop_storage = instances_of(split->test);
      pop = &pop_storage;
    }
    EnumerationLimits limits;
    limits.max_nodes = leg.max_nodes.value_or(std::numeric_limits<std::size_t>::max());
    limits.max_trees_per_trial = cfg.max_trees_per_trial;

    TrialRecord rec;
    rec.trial_id = t;
    rec.seed = out.manifest.seed;
    rec.n_train = split->train.size();
    rec.n_test = split->test.size();
    rec.distinct_train = split->train.distinct_instance_count();
    rec.summary = forest_summary(split->train, split->test, *pop, limits, cfg.bin_width);
    rec.min_size = rec.summary.min_cardinality();
    out.manifest.min_size = rec.min_size;
    out.manifest.total_trees = rec.summary.total_trees();
    out.record = std::move(rec);
  }
  out.manifest.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

std::vector<LegResult> run_trials(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  Shared sh{&config, load_source(config, options.data_dir), {}, {}};
  sh.space = instance_space(sh.source.schema());

  std::vector<Leg> legs = config.legs;
  if (options.extended)
    legs.insert(legs.end(), config.extended_legs.begin(), config.extended_legs.end());

  const std::size_t n = sh.source.size();
  for (const auto& leg : legs) {
    switch (config.split) {
      case SplitMode::LeaveOneOut:
        if (leg.trials != n || leg.n_train + 1 != n)
          config_error("leave-one-out needs trials = " + std::to_string(n) +
                       " and n_train = " + std::to_string(n - 1));
        break;
      case SplitMode::Disjoint:
        if (leg.n_train >= n)
          config_error("n_train " + std::to_string(leg.n_train) + " leaves no test examples (" +
                       std::to_string(n) + " available)");
        break;
      case SplitMode::WithReplacement:
        if (n == 0) config_error("empty source dataset");
        break;
    }
  }
  if (config.filter == FilterMode::LeafCoverage) {
    const auto m = min_consistent_size(sh.source, sh.source.size());
    if (!m) config_error("source dataset admits no consistent tree");
    sh.reference_trees = collect_consistent(sh.source, {*m, 0});
  }

  struct Item {
    std::size_t leg;
    std::size_t trial;
  };
  std::vector<Item> items;
  std::vector<std::string> series;
  std::vector<std::vector<Outcome>> outcomes(legs.size());
  for (std::size_t l = 0; l < legs.size(); ++l) {
    series.push_back(series_name(config, legs[l]));
    outcomes[l].resize(legs[l].trials);
    for (std::size_t t = 0; t < legs[l].trials; ++t) items.push_back({l, t});
  }
  std::vector<std::exception_ptr> errors(items.size());
  std::atomic<std::size_t> next{0};
  std::mutex report_mu;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      const auto [l, t] = items[i];
      try {
        outcomes[l][t] = run_one(sh, legs[l], series[l], t);
        if (options.on_trial) {
          std::lock_guard lock(report_mu);
          options.on_trial(series[l], outcomes[l][t].manifest);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.threads, items.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<LegResult> out;
  for (std::size_t l = 0; l < legs.size(); ++l) {
    LegResult r;
    r.series = series[l];
    r.leg = legs[l];
    for (auto& o : outcomes[l]) {
      r.manifest.push_back(o.manifest);
      if (o.record) r.trials.push_back(std::move(*o.record));
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace forestscope
