#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "forestscope/experiments.hpp"
#include "forestscope/forest.hpp"
#include "forestscope/report.hpp"

namespace py = pybind11;
using namespace forestscope;

namespace {

std::map<std::size_t, std::uint64_t> count_trees(const Dataset& d, std::size_t max_nodes,
                                                 std::uint64_t tree_cap) {
  std::map<std::size_t, std::uint64_t> out;
  py::gil_scoped_release release;
  enumerate_consistent(d, {max_nodes, tree_cap},
                       [&](const TreeVisit& v) { ++out[v.node_cardinality()]; });
  return out;
}

Dataset concept_dataset(const std::string& name) {
  return apply_concept(builtin_concept(name), builtin_schema(name));
}

std::vector<LegResult> run_preset(const std::string& name, std::optional<std::uint64_t> seed,
                                  std::optional<std::size_t> trials, std::size_t threads,
                                  bool extended) {
  ExperimentConfig c = preset(name);
  if (seed) c.master_seed = *seed;
  if (trials) override_trials(c, *trials);
  RunOptions o;
  o.threads = threads;
  o.extended = extended;
  py::gil_scoped_release release;
  return run_trials(c, o);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exhaustive enumeration of consistent decision trees";

  static py::exception<Error> error(m, "ForestscopeError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<Feature>(m, "Feature")
      .def(py::init<std::string, std::vector<std::string>>(), py::arg("name"), py::arg("values"))
      .def_readonly("name", &Feature::name)
      .def_readonly("values", &Feature::values);

  py::class_<FeatureSchema>(m, "FeatureSchema")
      .def(py::init<std::vector<Feature>, std::vector<std::string>>(), py::arg("features"),
           py::arg("classes"))
      .def_static("binary", &FeatureSchema::binary, py::arg("names"),
                  py::arg("classes") = std::vector<std::string>{"neg", "pos"})
      .def_property_readonly("features", &FeatureSchema::features)
      .def_property_readonly("classes", &FeatureSchema::classes)
      .def("instance_space_size", &FeatureSchema::instance_space_size);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](FeatureSchema s, const std::vector<std::pair<Instance, ClassIndex>>& rows) {
             std::vector<LabeledExample> ex;
             for (const auto& [x, y] : rows) ex.push_back({x, y});
             return Dataset(std::move(s), std::move(ex));
           }),
           py::arg("schema"), py::arg("examples"))
      .def_property_readonly("schema", &Dataset::schema)
      .def_property_readonly("examples",
                             [](const Dataset& d) {
                               std::vector<std::pair<Instance, ClassIndex>> out;
                               for (const auto& e : d.examples()) out.emplace_back(e.instance, e.label);
                               return out;
                             })
      .def("__len__", &Dataset::size)
      .def("distinct_instance_count", &Dataset::distinct_instance_count)
      .def("class_counts", &Dataset::class_counts);

  py::class_<DecisionTree>(m, "DecisionTree")
      .def_static("leaf", &DecisionTree::leaf)
      .def_static("test", &DecisionTree::test)
      .def_property_readonly("node_cardinality", &DecisionTree::node_cardinality)
      .def_property_readonly("leaf_cardinality", &DecisionTree::leaf_cardinality)
      .def("classify", [](const DecisionTree& t, const Instance& x) { return classify(t, x); })
      .def("__eq__", &DecisionTree::operator==);

  m.def("load_dataset", &load_dataset_file, py::arg("path"));
  m.def("concept_dataset", &concept_dataset, py::arg("name"));
  m.def("instance_space", &instance_space);
  m.def("to_string", py::overload_cast<const DecisionTree&, const FeatureSchema&>(&to_string));
  m.def("parse_tree", [](const std::string& s, const FeatureSchema& schema) { return parse_tree(s, schema); });
  m.def("is_consistent", &is_consistent);

  m.def("count_trees", &count_trees, py::arg("train"), py::arg("max_nodes"),
        py::arg("tree_cap") = kDefaultTreeCap,
        "Consistent tree counts keyed by node cardinality.");
  m.def(
      "collect_consistent",
      [](const Dataset& d, std::size_t max_nodes) { return collect_consistent(d, {max_nodes, 0}); },
      py::arg("train"), py::arg("max_nodes"));
  m.def(
      "enumerate_naive",
      [](const Dataset& d, std::size_t max_nodes) { return enumerate_naive(d, {max_nodes, 0}); },
      py::arg("train"), py::arg("max_nodes"));
  m.def("min_consistent_size", &min_consistent_size, py::arg("train"), py::arg("cap"));

  py::class_<AggregateRow>(m, "AggregateRow")
      .def_readonly("node_cardinality", &AggregateRow::node_cardinality)
      .def_readonly("trials_present", &AggregateRow::trials_present)
      .def_readonly("mean_error", &AggregateRow::mean_error)
      .def_readonly("ci_half_width", &AggregateRow::ci_half_width)
      .def_readonly("mean_tree_count", &AggregateRow::mean_tree_count)
      .def_readonly("mean_correct_count", &AggregateRow::mean_correct_count);

  py::class_<PairwiseRow>(m, "PairwiseRow")
      .def_readonly("diff", &PairwiseRow::diff)
      .def_readonly("p_smaller_better", &PairwiseRow::p_smaller_better)
      .def_readonly("p_equal", &PairwiseRow::p_equal)
      .def_readonly("p_larger_better", &PairwiseRow::p_larger_better)
      .def_readonly("pair_count", &PairwiseRow::pair_count);

  py::class_<PolicyRow>(m, "PolicyRow")
      .def_readonly("min_size", &PolicyRow::min_size)
      .def_readonly("preferred_cardinality", &PolicyRow::preferred_cardinality)
      .def_readonly("trial_count", &PolicyRow::trial_count);

  py::class_<TrialRecord>(m, "TrialRecord")
      .def_readonly("trial_id", &TrialRecord::trial_id)
      .def_readonly("seed", &TrialRecord::seed)
      .def_readonly("n_train", &TrialRecord::n_train)
      .def_readonly("n_test", &TrialRecord::n_test)
      .def_readonly("min_size", &TrialRecord::min_size)
      .def_property_readonly("tree_counts", [](const TrialRecord& t) {
        std::map<std::size_t, std::uint64_t> out;
        for (std::size_t c = 0; c < t.summary.rows.size(); ++c)
          if (t.summary.rows[c].tree_count) out[c] = t.summary.rows[c].tree_count;
        return out;
      });

  py::class_<LegResult>(m, "LegResult")
      .def_readonly("series", &LegResult::series)
      .def_readonly("trials", &LegResult::trials);

  py::enum_<Baseline>(m, "Baseline")
      .value("ALL_PAIRS", Baseline::AllPairs)
      .value("MIN_VS_LARGER", Baseline::MinVsLarger);
  py::enum_<Pooling>(m, "Pooling")
      .value("PAIR_WEIGHTED", Pooling::PairWeighted)
      .value("TRIAL_WEIGHTED", Pooling::TrialWeighted);

  m.def("preset_names", &preset_names);
  m.def("run_preset", &run_preset, py::arg("name"), py::arg("seed") = py::none(),
        py::arg("trials") = py::none(), py::arg("threads") = 1, py::arg("extended") = false);
  m.def("aggregate_by_cardinality",
        [](const std::vector<TrialRecord>& t) { return aggregate_by_cardinality(t); });
  m.def(
      "pairwise",
      [](const std::vector<TrialRecord>& t, Baseline b, std::optional<std::size_t> cond,
         Pooling p) { return pairwise(t, b, cond, p); },
      py::arg("trials"), py::arg("baseline") = Baseline::AllPairs,
      py::arg("min_size") = py::none(), py::arg("pooling") = Pooling::TrialWeighted);
  m.def("derive_policy", [](const std::vector<TrialRecord>& t) { return derive_policy(t); });
  m.def(
      "run_experiment",
      [](const std::string& name, const std::string& out_dir, std::optional<std::uint64_t> seed,
         std::optional<std::size_t> trials, std::size_t threads, bool charts) {
        ExperimentConfig c = preset(name);
        if (seed) c.master_seed = *seed;
        if (trials) override_trials(c, *trials);
        RunOptions o;
        o.threads = threads;
        py::gil_scoped_release release;
        return write_outputs(c, run_trials(c, o), out_dir, charts);
      },
      py::arg("name"), py::arg("out_dir"), py::arg("seed") = py::none(),
      py::arg("trials") = py::none(), py::arg("threads") = 1, py::arg("charts") = false,
      "Runs a preset and writes its CSV files; returns the file names.");
}
