#include "forestscope/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "forestscope/tree.hpp"

namespace forestscope {

namespace {

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

template <typename... Parts>
std::string cat(const Parts&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// FeatureSchema

FeatureSchema::FeatureSchema(std::vector<Feature> features, std::vector<std::string> classes)
    : features_(std::move(features)), classes_(std::move(classes)) {
  std::set<std::string> names;
  for (const auto& f : features_) {
    if (f.name.empty()) fail(ErrorKind::InvalidSchema, "feature with empty name");
    if (!names.insert(f.name).second)
      fail(ErrorKind::InvalidSchema, cat("duplicate feature name '", f.name, "'"));
    if (f.arity() < 2)
      fail(ErrorKind::InvalidSchema, cat("feature '", f.name, "' has arity < 2"));
    if (f.arity() > std::numeric_limits<ValueIndex>::max())
      fail(ErrorKind::InvalidSchema, cat("feature '", f.name, "' has too many values"));
    std::set<std::string> tokens(f.values.begin(), f.values.end());
    if (tokens.size() != f.values.size())
      fail(ErrorKind::InvalidSchema, cat("duplicate value token in feature '", f.name, "'"));
  }
  if (classes_.size() < 2) fail(ErrorKind::InvalidSchema, "fewer than two classes");
  std::set<std::string> cls(classes_.begin(), classes_.end());
  if (cls.size() != classes_.size()) fail(ErrorKind::InvalidSchema, "duplicate class token");
}

FeatureSchema FeatureSchema::binary(const std::vector<std::string>& names,
                                    std::vector<std::string> classes) {
  std::vector<Feature> feats;
  feats.reserve(names.size());
  for (const auto& n : names) feats.push_back({n, {"0", "1"}});
  return FeatureSchema(std::move(feats), std::move(classes));
}

std::size_t FeatureSchema::max_arity() const noexcept {
  std::size_t a = 0;
  for (const auto& f : features_) a = std::max(a, f.arity());
  return a;
}

std::optional<std::size_t> FeatureSchema::find_feature(const std::string& name) const {
  for (std::size_t i = 0; i < features_.size(); ++i)
    if (features_[i].name == name) return i;
  return std::nullopt;
}

std::optional<ValueIndex> FeatureSchema::find_value(std::size_t feature,
                                                    const std::string& token) const {
  const auto& vals = features_.at(feature).values;
  for (std::size_t v = 0; v < vals.size(); ++v)
    if (vals[v] == token) return static_cast<ValueIndex>(v);
  return std::nullopt;
}

std::optional<ClassIndex> FeatureSchema::find_class(const std::string& token) const {
  for (std::size_t c = 0; c < classes_.size(); ++c)
    if (classes_[c] == token) return static_cast<ClassIndex>(c);
  return std::nullopt;
}

std::uint64_t FeatureSchema::instance_space_size() const {
  std::uint64_t n = 1;
  for (const auto& f : features_) {
    if (n > std::numeric_limits<std::uint64_t>::max() / f.arity())
      fail(ErrorKind::SpaceOverflow, "instance space exceeds 2^64 - 1");
    n *= f.arity();
  }
  return n;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(FeatureSchema schema, std::vector<LabeledExample> examples)
    : schema_(std::move(schema)), examples_(std::move(examples)) {
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const auto& ex = examples_[i];
    if (ex.instance.size() != schema_.feature_count())
      fail(ErrorKind::InvalidExample, cat("example ", i, " has ", ex.instance.size(),
                                          " values, schema has ", schema_.feature_count()));
    for (std::size_t f = 0; f < ex.instance.size(); ++f)
      if (ex.instance[f] >= schema_.arity(f))
        fail(ErrorKind::InvalidExample, cat("example ", i, " value out of range for feature '",
                                            schema_.feature(f).name, "'"));
    if (ex.label >= schema_.class_count())
      fail(ErrorKind::InvalidExample, cat("example ", i, " label out of range"));
  }
}

std::optional<std::pair<std::size_t, std::size_t>> Dataset::find_contradiction() const {
  std::map<const Instance*, std::size_t, bool (*)(const Instance*, const Instance*)> first(
      [](const Instance* a, const Instance* b) { return *a < *b; });
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    auto [it, inserted] = first.emplace(&examples_[i].instance, i);
    if (!inserted && examples_[it->second].label != examples_[i].label)
      return std::make_pair(it->second, i);
  }
  return std::nullopt;
}

std::size_t Dataset::distinct_instance_count() const {
  std::set<Instance> seen;
  for (const auto& ex : examples_) seen.insert(ex.instance);
  return seen.size();
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(schema_.class_count(), 0);
  for (const auto& ex : examples_) ++counts[ex.label];
  return counts;
}

std::vector<Instance> instance_space(const FeatureSchema& schema) {
  const std::uint64_t n = schema.instance_space_size();
  if (n > std::numeric_limits<std::size_t>::max() / std::max<std::size_t>(1, schema.feature_count()))
    fail(ErrorKind::SpaceOverflow, "instance space too large to materialize");
  std::vector<Instance> out;
  out.reserve(static_cast<std::size_t>(n));
  Instance cur(schema.feature_count(), 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    out.push_back(cur);
    // Odometer increment, last feature fastest.
    for (std::size_t f = cur.size(); f-- > 0;) {
      if (++cur[f] < schema.arity(f)) break;
      cur[f] = 0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Concepts

namespace {

bool bit(const Instance& x, std::size_t i) { return x[i] != 0; }

std::optional<std::size_t> parity_width(const std::string& name) {
  constexpr std::string_view prefix = "parity-";
  if (name.rfind(prefix, 0) != 0) return std::nullopt;
  const std::string digits = name.substr(prefix.size());
  if (digits.empty() || digits.size() > 2 ||
      !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
    return std::nullopt;
  const std::size_t n = std::stoul(digits);
  if (n < 1 || n > 24) return std::nullopt;
  return n;
}

}  // namespace

Concept builtin_concept(const std::string& name) {
  if (name == "a")
    return {name, 5, [](const Instance& x) -> ClassIndex { return bit(x, 0); }};
  if (name == "ab")
    return {name, 5, [](const Instance& x) -> ClassIndex { return bit(x, 0) && bit(x, 1); }};
  if (name == "xyz-or-ab")
    return {name, 5, [](const Instance& x) -> ClassIndex {
              return (bit(x, 0) && bit(x, 1) && bit(x, 2)) || (bit(x, 3) && bit(x, 4));
            }};
  if (name == "mux6")
    // Features: a0 a1 d0 d1 d2 d3 i0 i1. Address a0*2 + a1 selects d0..d3.
    return {name, 8, [](const Instance& x) -> ClassIndex {
              const std::size_t addr = 2 * (x[0] != 0) + (x[1] != 0);
              return bit(x, 2 + addr);
            }};
  if (auto n = parity_width(name))
    return {name, *n, [](const Instance& x) -> ClassIndex {
              ClassIndex p = 0;
              for (auto v : x) p ^= static_cast<ClassIndex>(v != 0);
              return p;
            }};
  fail(ErrorKind::IncompatibleConcept, cat("unknown concept '", name, "'"));
}

FeatureSchema builtin_schema(const std::string& name) {
  if (name == "a" || name == "ab") return FeatureSchema::binary({"a", "b", "c", "d", "e"});
  if (name == "xyz-or-ab") return FeatureSchema::binary({"x", "y", "z", "a", "b"});
  if (name == "mux6")
    return FeatureSchema::binary({"a0", "a1", "d0", "d1", "d2", "d3", "i0", "i1"});
  if (auto n = parity_width(name)) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < *n; ++i) names.push_back("p" + std::to_string(i));
    return FeatureSchema::binary(names);
  }
  fail(ErrorKind::IncompatibleConcept, cat("unknown concept '", name, "'"));
}

std::vector<std::string> builtin_concept_names() {
  return {"a", "ab", "xyz-or-ab", "mux6", "parity-<n>"};
}

Dataset apply_concept(const Concept& target, const FeatureSchema& schema) {
  if (schema.feature_count() != target.feature_count)
    fail(ErrorKind::IncompatibleConcept,
         cat("concept '", target.name, "' needs ", target.feature_count, " features, schema has ",
             schema.feature_count()));
  for (const auto& f : schema.features())
    if (f.arity() != 2)
      fail(ErrorKind::IncompatibleConcept,
           cat("concept '", target.name, "' needs binary features; '", f.name, "' is not"));
  std::vector<LabeledExample> examples;
  for (auto& x : instance_space(schema)) {
    const ClassIndex label = target.eval(x);
    if (label >= schema.class_count())
      fail(ErrorKind::IncompatibleConcept, "concept label exceeds schema class count");
    examples.push_back({std::move(x), label});
  }
  return Dataset(schema, std::move(examples));
}

// ---------------------------------------------------------------------------
// Sampling

Split split_disjoint(const Dataset& data, std::size_t n_train, Generator& gen) {
  const std::size_t n = data.size();
  if (n_train > n)
    fail(ErrorKind::OutOfRange, cat("n_train ", n_train, " exceeds ", n, " examples"));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  // Partial Fisher-Yates: the first n_train slots are a uniform sample.
  for (std::size_t i = 0; i < n_train; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_below(gen, n - i));
    std::swap(order[i], order[j]);
  }
  std::vector<bool> in_train(n, false);
  std::vector<LabeledExample> train, test;
  train.reserve(n_train);
  test.reserve(n - n_train);
  for (std::size_t i = 0; i < n_train; ++i) {
    in_train[order[i]] = true;
    train.push_back(data.examples()[order[i]]);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!in_train[i]) test.push_back(data.examples()[i]);
  return {Dataset(data.schema(), std::move(train)), Dataset(data.schema(), std::move(test))};
}

Dataset sample_with_replacement(const Dataset& data, std::size_t n, Generator& gen) {
  if (data.empty()) fail(ErrorKind::EmptyInput, "cannot sample from an empty dataset");
  std::vector<LabeledExample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(data.examples()[static_cast<std::size_t>(uniform_below(gen, data.size()))]);
  return Dataset(data.schema(), std::move(out));
}

std::optional<BoundViolation> representative_filter(const Dataset& train,
                                                    const RepresentativeBounds& bounds) {
  const auto& schema = train.schema();
  for (std::size_t f = 0; f < schema.feature_count() && f < bounds.value_bounds.size(); ++f) {
    const auto& fb = bounds.value_bounds[f];
    std::vector<std::size_t> counts(schema.arity(f), 0);
    for (const auto& ex : train.examples()) ++counts[ex.instance[f]];
    for (std::size_t v = 0; v < fb.size() && v < counts.size(); ++v)
      if (fb[v] && !fb[v]->contains(counts[v]))
        return BoundViolation{BoundViolation::Kind::FeatureValue, f, v, counts[v], *fb[v]};
  }
  const auto counts = train.class_counts();
  for (std::size_t c = 0; c < bounds.class_bounds.size() && c < counts.size(); ++c)
    if (bounds.class_bounds[c] && !bounds.class_bounds[c]->contains(counts[c]))
      return BoundViolation{BoundViolation::Kind::Class, 0, c, counts[c], *bounds.class_bounds[c]};
  return std::nullopt;
}

Split leaf_coverage_sample(const Dataset& data, const DecisionTree& reference_tree,
                           std::size_t per_leaf, std::size_t n_train, Generator& gen) {
  validate(reference_tree, data.schema());
  const std::size_t n = data.size();
  if (n_train > n)
    fail(ErrorKind::OutOfRange, cat("n_train ", n_train, " exceeds ", n, " examples"));

  // Group example indices by the leaf they reach, leaves in depth-first order.
  std::map<const DecisionTree*, std::vector<std::size_t>> reach;
  std::vector<const DecisionTree*> leaves;
  auto collect = [&](auto&& self, const DecisionTree& t) -> void {
    if (t.is_leaf()) {
      leaves.push_back(&t);
      return;
    }
    for (const auto& c : t.children()) self(self, c);
  };
  collect(collect, reference_tree);
  for (std::size_t i = 0; i < n; ++i) {
    const DecisionTree* t = &reference_tree;
    while (!t->is_leaf()) t = &t->children()[data.examples()[i].instance[t->feature()]];
    reach[t].push_back(i);
  }

  std::size_t forced = 0;
  for (const auto* leaf : leaves) forced += std::min(per_leaf, reach[leaf].size());
  if (forced > n_train)
    fail(ErrorKind::CoverageExceedsTrain,
         cat("leaf coverage forces ", forced, " examples but n_train is ", n_train));

  std::vector<bool> taken(n, false);
  std::vector<std::size_t> chosen;
  chosen.reserve(n_train);
  for (const auto* leaf : leaves) {
    auto pool = reach[leaf];
    const std::size_t k = std::min(per_leaf, pool.size());
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform_below(gen, pool.size() - i));
      std::swap(pool[i], pool[j]);
      taken[pool[i]] = true;
      chosen.push_back(pool[i]);
    }
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i)
    if (!taken[i]) rest.push_back(i);
  const std::size_t fill = n_train - forced;
  for (std::size_t i = 0; i < fill; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_below(gen, rest.size() - i));
    std::swap(rest[i], rest[j]);
    taken[rest[i]] = true;
    chosen.push_back(rest[i]);
  }

  std::vector<LabeledExample> train, test;
  for (auto i : chosen) train.push_back(data.examples()[i]);
  for (std::size_t i = 0; i < n; ++i)
    if (!taken[i]) test.push_back(data.examples()[i]);
  return {Dataset(data.schema(), std::move(train)), Dataset(data.schema(), std::move(test))};
}

// ---------------------------------------------------------------------------
// File format

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

Feature parse_header_cell(const std::string& cell, std::size_t column) {
  const auto eq = cell.find('=');
  if (eq == std::string::npos || eq == 0)
    fail(ErrorKind::MalformedHeader, cat("header column ", column, ": expected name=v1|v2"));
  Feature f{cell.substr(0, eq), split(cell.substr(eq + 1), '|')};
  for (const auto& v : f.values)
    if (v.empty())
      fail(ErrorKind::MalformedHeader, cat("header column ", column, ": empty value token"));
  return f;
}

}  // namespace

Dataset load_dataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<FeatureSchema> schema;
  std::vector<LabeledExample> examples;
  std::vector<std::size_t> example_line;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      fail(ErrorKind::MalformedRow, cat("line ", line_no, ": CR line ending"));
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line, ',');
    if (!schema) {
      if (cells.size() < 2)
        fail(ErrorKind::MalformedHeader, "header needs at least one feature and a class column");
      std::vector<Feature> feats;
      for (std::size_t i = 0; i + 1 < cells.size(); ++i)
        feats.push_back(parse_header_cell(cells[i], i + 1));
      Feature cls = parse_header_cell(cells.back(), cells.size());
      if (cls.name != "class")
        fail(ErrorKind::MalformedHeader, "last header column must be class=c1|c2|...");
      try {
        schema.emplace(std::move(feats), std::move(cls.values));
      } catch (const Error& e) {
        fail(ErrorKind::MalformedHeader, e.what());
      }
      continue;
    }
    if (cells.size() != schema->feature_count() + 1)
      fail(ErrorKind::MalformedRow, cat("line ", line_no, ": expected ",
                                        schema->feature_count() + 1, " columns, got ",
                                        cells.size()));
    LabeledExample ex;
    ex.instance.resize(schema->feature_count());
    for (std::size_t f = 0; f < schema->feature_count(); ++f) {
      auto v = schema->find_value(f, cells[f]);
      if (!v)
        fail(ErrorKind::UnknownToken, cat("line ", line_no, " column ", f + 1, ": token '",
                                          cells[f], "' not declared for feature '",
                                          schema->feature(f).name, "'"));
      ex.instance[f] = *v;
    }
    auto c = schema->find_class(cells.back());
    if (!c)
      fail(ErrorKind::UnknownToken, cat("line ", line_no, " column ", cells.size(),
                                        ": class token '", cells.back(), "' not declared"));
    ex.label = *c;
    examples.push_back(std::move(ex));
    example_line.push_back(line_no);
  }
  if (!schema) fail(ErrorKind::MalformedHeader, "missing header line");
  Dataset data(std::move(*schema), std::move(examples));
  if (auto bad = data.find_contradiction())
    fail(ErrorKind::ContradictoryExamples,
         cat("lines ", example_line[bad->first], " and ", example_line[bad->second],
             ": same instance, different class"));
  return data;
}

Dataset load_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, cat("cannot open '", path, "'"));
  return load_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& data) {
  const auto& s = data.schema();
  auto join = [](const std::vector<std::string>& v) {
    std::string r;
    for (std::size_t i = 0; i < v.size(); ++i) r += (i ? "|" : "") + v[i];
    return r;
  };
  for (const auto& f : s.features()) out << f.name << '=' << join(f.values) << ',';
  out << "class=" << join(s.classes()) << '\n';
  for (const auto& ex : data.examples()) {
    for (std::size_t f = 0; f < s.feature_count(); ++f)
      out << s.feature(f).values[ex.instance[f]] << ',';
    out << s.classes()[ex.label] << '\n';
  }
}

}  // namespace forestscope
