#include "forestscope/forest.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace forestscope {

namespace {

// Rows of a dataset collapsed to distinct (instance, label) pairs with
// multiplicities, values stored row-major.
struct Table {
  std::size_t width = 0;
  std::vector<ValueIndex> values;
  std::vector<ClassIndex> labels;
  std::vector<std::uint64_t> weights;

  std::size_t rows() const noexcept { return weights.size(); }
  ValueIndex at(std::size_t row, std::size_t f) const noexcept { return values[row * width + f]; }

  void add(const Instance& x, ClassIndex label, std::uint64_t w) {
    values.insert(values.end(), x.begin(), x.end());
    labels.push_back(label);
    weights.push_back(w);
  }
};

Table collapse(const Dataset& data) {
  std::map<LabeledExample, std::uint64_t> counts;
  for (const auto& ex : data.examples()) ++counts[ex];
  Table t;
  t.width = data.schema().feature_count();
  for (const auto& [ex, n] : counts) t.add(ex.instance, ex.label, n);
  return t;
}

Table collapse(const std::vector<Instance>& population, std::size_t width) {
  std::map<Instance, std::uint64_t> counts;
  for (const auto& x : population) ++counts[x];
  Table t;
  t.width = width;
  for (const auto& [x, n] : counts) t.add(x, 0, n);
  return t;
}

}  // namespace

struct Enumerator::State {
  struct Span {
    std::uint32_t begin = 0;
    std::uint32_t size = 0;
  };
  struct Open {
    Span train, test, pop;
    std::uint64_t pop_weight = 0;
    std::uint64_t used_features = 0;
    std::uint32_t id = 0;
    std::uint32_t lower_bound = 0;
  };
  struct Child {
    bool is_leaf = true;
    ClassIndex label = 0;
    std::uint32_t id = 0;
  };
  struct Expansion {
    std::uint32_t id = 0;
    std::uint32_t feature = 0;
    std::uint32_t first_child = 0;
  };
  // Per-recursion-level scratch, sized to the largest arity.
  struct Scratch {
    std::vector<std::uint32_t> train_count, test_count, pop_count;
    std::vector<std::uint64_t> class_mask;
    std::vector<std::uint32_t> offset;
    std::vector<std::uint64_t> pop_weight;
    std::vector<std::uint32_t> train_begin, test_begin, pop_begin;
    std::vector<ClassIndex> leaf_label;
    std::vector<char> is_leaf;
  };

  FeatureSchema schema;
  std::vector<std::size_t> arity;
  std::size_t max_arity = 2;
  Table train, test, pop;
  bool has_test = false;
  bool has_pop = false;

  std::vector<std::uint32_t> train_arena, test_arena, pop_arena;
  std::vector<Open> open;
  std::vector<Scratch> scratch;
  std::vector<Expansion> expansions;
  std::vector<Child> children;
  std::uint32_t next_id = 1;

  std::size_t lb_sum = 0;
  std::size_t nodes = 0;
  std::size_t leaves = 1;
  std::uint64_t errors = 0;
  std::uint64_t path_sum = 0;

  std::size_t max_nodes = 0;
  std::uint64_t visit_cap = 0;
  std::uint64_t visits = 0;
  bool stop_on_first = false;
  bool stopped = false;
  const Visitor* visitor = nullptr;
  const Enumerator* owner = nullptr;

  bool root_is_leaf = false;
  ClassIndex root_label = 0;

#ifndef NDEBUG
  std::optional<Dataset> checked_train;
#endif

  explicit State(const FeatureSchema& s) : schema(s) {}

  std::uint32_t lower_bound(std::uint64_t class_mask) const noexcept {
    const auto m = static_cast<std::uint32_t>(std::popcount(class_mask));
    if (m <= 1) return 0;
    // A tree with t tests has at most 1 + t * (a - 1) leaves.
    const auto a1 = static_cast<std::uint32_t>(max_arity - 1);
    return (m - 1 + a1 - 1) / a1;
  }

  ClassIndex majority(const Open& n) const {
    std::vector<std::uint64_t> votes(schema.class_count(), 0);
    for (std::uint32_t i = 0; i < n.train.size; ++i) {
      const auto r = train_arena[n.train.begin + i];
      votes[train.labels[r]] += train.weights[r];
    }
    return static_cast<ClassIndex>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }

  void emit() {
    ++visits;
    if (visit_cap != 0 && visits > visit_cap)
      throw Error(ErrorKind::Truncated,
                  "enumeration exceeded the cap of " + std::to_string(visit_cap) + " trees");
#ifndef NDEBUG
    if (checked_train) {
      const DecisionTree t = build();
      assert(!check_structure(t, *checked_train));
      assert(is_consistent(t, *checked_train));
    }
#endif
    if (visitor && *visitor) {
      TreeVisit v;
      v.owner_ = owner;
      v.nodes_ = nodes;
      v.leaves_ = leaves;
      v.errors_ = errors;
      v.path_sum_ = path_sum;
      (*visitor)(v);
    }
    if (stop_on_first) stopped = true;
  }

  void search() {
    if (open.empty()) {
      emit();
      return;
    }
    const Open node = open.back();
    open.pop_back();
    lb_sum -= node.lower_bound;
    Scratch& sc = scratch[nodes];
    std::optional<ClassIndex> parent_majority;

    for (std::size_t f = 0; f < arity.size() && !stopped; ++f) {
      if (node.used_features >> f & 1ULL) continue;
      const std::size_t k = arity[f];

      std::fill_n(sc.train_count.begin(), k, 0);
      std::fill_n(sc.class_mask.begin(), k, 0);
      for (std::uint32_t i = 0; i < node.train.size; ++i) {
        const auto r = train_arena[node.train.begin + i];
        const auto v = train.at(r, f);
        ++sc.train_count[v];
        sc.class_mask[v] |= 1ULL << train.labels[r];
      }
      std::size_t nonempty = 0;
      std::size_t child_lb = 0;
      for (std::size_t v = 0; v < k; ++v) {
        nonempty += sc.train_count[v] != 0;
        child_lb += lower_bound(sc.class_mask[v]);
      }
      if (nonempty < 2) continue;
      if (nodes + 1 + lb_sum + child_lb > max_nodes) continue;

      bool any_empty = false;
      for (std::size_t v = 0; v < k; ++v) {
        const auto mask = sc.class_mask[v];
        sc.is_leaf[v] = std::popcount(mask) <= 1;
        if (mask == 0) {
          any_empty = true;
        } else {
          sc.leaf_label[v] = static_cast<ClassIndex>(std::countr_zero(mask));
        }
      }
      if (any_empty) {
        if (!parent_majority) parent_majority = majority(node);
        for (std::size_t v = 0; v < k; ++v)
          if (sc.class_mask[v] == 0) sc.leaf_label[v] = *parent_majority;
      }

      const std::size_t train_mark = train_arena.size();
      const std::size_t test_mark = test_arena.size();
      const std::size_t pop_mark = pop_arena.size();
      const std::size_t open_mark = open.size();
      const std::size_t child_mark = children.size();
      const std::uint32_t id_mark = next_id;

      // Scatter the training rows of impure children into the arena.
      std::uint32_t cursor = static_cast<std::uint32_t>(train_mark);
      for (std::size_t v = 0; v < k; ++v) {
        sc.offset[v] = sc.train_begin[v] = cursor;
        if (!sc.is_leaf[v]) cursor += sc.train_count[v];
      }
      train_arena.resize(cursor);
      for (std::uint32_t i = 0; i < node.train.size; ++i) {
        const auto r = train_arena[node.train.begin + i];
        const auto v = train.at(r, f);
        if (!sc.is_leaf[v]) train_arena[sc.offset[v]++] = r;
      }

      // Test rows: score those landing in leaves now, defer the rest.
      std::uint64_t err_add = 0;
      std::fill_n(sc.test_count.begin(), k, 0);
      if (has_test) {
        for (std::uint32_t i = 0; i < node.test.size; ++i) {
          const auto r = test_arena[node.test.begin + i];
          const auto v = test.at(r, f);
          if (sc.is_leaf[v]) {
            if (test.labels[r] != sc.leaf_label[v]) err_add += test.weights[r];
          } else {
            ++sc.test_count[v];
          }
        }
        cursor = static_cast<std::uint32_t>(test_mark);
        for (std::size_t v = 0; v < k; ++v) {
          sc.offset[v] = sc.test_begin[v] = cursor;
          cursor += sc.test_count[v];
        }
        test_arena.resize(cursor);
        for (std::uint32_t i = 0; i < node.test.size; ++i) {
          const auto r = test_arena[node.test.begin + i];
          const auto v = test.at(r, f);
          if (!sc.is_leaf[v]) test_arena[sc.offset[v]++] = r;
        }
      }

      std::fill_n(sc.pop_count.begin(), k, 0);
      std::fill_n(sc.pop_weight.begin(), k, 0);
      if (has_pop) {
        for (std::uint32_t i = 0; i < node.pop.size; ++i) {
          const auto r = pop_arena[node.pop.begin + i];
          const auto v = pop.at(r, f);
          if (!sc.is_leaf[v]) {
            ++sc.pop_count[v];
            sc.pop_weight[v] += pop.weights[r];
          }
        }
        cursor = static_cast<std::uint32_t>(pop_mark);
        for (std::size_t v = 0; v < k; ++v) {
          sc.offset[v] = sc.pop_begin[v] = cursor;
          cursor += sc.pop_count[v];
        }
        pop_arena.resize(cursor);
        for (std::uint32_t i = 0; i < node.pop.size; ++i) {
          const auto r = pop_arena[node.pop.begin + i];
          const auto v = pop.at(r, f);
          if (!sc.is_leaf[v]) pop_arena[sc.offset[v]++] = r;
        }
      }

      // Record the expansion and open the impure children. Pushed in reverse
      // value order so the smallest value is expanded next.
      expansions.push_back({node.id, static_cast<std::uint32_t>(f),
                            static_cast<std::uint32_t>(child_mark)});
      children.resize(child_mark + k);
      for (std::size_t v = 0; v < k; ++v) {
        auto& c = children[child_mark + v];
        c.is_leaf = sc.is_leaf[v];
        c.label = sc.leaf_label[v];
        if (!c.is_leaf) c.id = next_id++;
      }
      for (std::size_t v = k; v-- > 0;) {
        if (sc.is_leaf[v]) continue;
        Open o;
        o.train = {sc.train_begin[v], sc.train_count[v]};
        o.test = {has_test ? sc.test_begin[v] : 0u, sc.test_count[v]};
        o.pop = {has_pop ? sc.pop_begin[v] : 0u, sc.pop_count[v]};
        o.pop_weight = sc.pop_weight[v];
        o.used_features = node.used_features | (1ULL << f);
        o.id = children[child_mark + v].id;
        o.lower_bound = lower_bound(sc.class_mask[v]);
        open.push_back(o);
      }

      nodes += 1;
      leaves += k - 1;
      errors += err_add;
      path_sum += node.pop_weight;
      lb_sum += child_lb;

      search();

      lb_sum -= child_lb;
      path_sum -= node.pop_weight;
      errors -= err_add;
      leaves -= k - 1;
      nodes -= 1;
      open.resize(open_mark);
      next_id = id_mark;
      children.resize(child_mark);
      expansions.pop_back();
      train_arena.resize(train_mark);
      test_arena.resize(test_mark);
      pop_arena.resize(pop_mark);
    }

    lb_sum += node.lower_bound;
    open.push_back(node);
  }

  std::uint64_t run(std::size_t budget, std::uint64_t cap, bool first_only, const Visitor* v) {
    max_nodes = budget;
    visit_cap = cap;
    visits = 0;
    stop_on_first = first_only;
    stopped = false;
    visitor = v;

    std::uint64_t mask = 0;
    for (std::size_t r = 0; r < train.rows(); ++r) mask |= 1ULL << train.labels[r];
    if (std::popcount(mask) == 1) {
      root_is_leaf = true;
      root_label = static_cast<ClassIndex>(std::countr_zero(mask));
      nodes = 0;
      leaves = 1;
      errors = 0;
      for (std::size_t r = 0; r < test.rows(); ++r)
        if (test.labels[r] != root_label) errors += test.weights[r];
      path_sum = 0;
      emit();
      return visits;
    }
    root_is_leaf = false;

    train_arena.resize(train.rows());
    std::iota(train_arena.begin(), train_arena.end(), 0u);
    test_arena.resize(test.rows());
    std::iota(test_arena.begin(), test_arena.end(), 0u);
    pop_arena.resize(pop.rows());
    std::iota(pop_arena.begin(), pop_arena.end(), 0u);

    Open root;
    root.train = {0, static_cast<std::uint32_t>(train.rows())};
    root.test = {0, static_cast<std::uint32_t>(test.rows())};
    root.pop = {0, static_cast<std::uint32_t>(pop.rows())};
    root.pop_weight = std::accumulate(pop.weights.begin(), pop.weights.end(), std::uint64_t{0});
    root.id = 0;
    root.lower_bound = lower_bound(mask);

    const std::size_t levels = std::min(budget, train.rows()) + 1;
    scratch.resize(std::max(scratch.size(), levels));
    for (auto& s : scratch) {
      s.train_count.resize(max_arity);
      s.test_count.resize(max_arity);
      s.pop_count.resize(max_arity);
      s.class_mask.resize(max_arity);
      s.offset.resize(max_arity);
      s.pop_weight.resize(max_arity);
      s.train_begin.resize(max_arity);
      s.test_begin.resize(max_arity);
      s.pop_begin.resize(max_arity);
      s.leaf_label.resize(max_arity);
      s.is_leaf.resize(max_arity);
    }
    open.clear();
    expansions.clear();
    children.clear();
    next_id = 1;
    nodes = 0;
    leaves = 1;
    errors = 0;
    path_sum = 0;
    lb_sum = root.lower_bound;
    if (root.lower_bound <= budget) {
      open.push_back(root);
      search();
    }
    return visits;
  }

  DecisionTree build_node(std::uint32_t id, const std::vector<std::int32_t>& by_id) const {
    const Expansion& e = expansions[static_cast<std::size_t>(by_id[id])];
    std::vector<DecisionTree> kids;
    const std::size_t k = arity[e.feature];
    kids.reserve(k);
    for (std::size_t v = 0; v < k; ++v) {
      const Child& c = children[e.first_child + v];
      kids.push_back(c.is_leaf ? DecisionTree::leaf(c.label) : build_node(c.id, by_id));
    }
    return DecisionTree::test(e.feature, std::move(kids));
  }

  DecisionTree build() const {
    if (root_is_leaf) return DecisionTree::leaf(root_label);
    std::vector<std::int32_t> by_id(next_id, -1);
    for (std::size_t i = 0; i < expansions.size(); ++i)
      by_id[expansions[i].id] = static_cast<std::int32_t>(i);
    return build_node(0, by_id);
  }
};

DecisionTree TreeVisit::build() const { return owner_->state_->build(); }

Enumerator::Enumerator(const Dataset& train, const Dataset* test,
                       const std::vector<Instance>* population)
    : state_(std::make_unique<State>(train.schema())) {
  const auto& schema = train.schema();
  if (train.empty()) throw Error(ErrorKind::EmptyInput, "empty training set");
  if (schema.feature_count() > 64)
    throw Error(ErrorKind::OutOfRange, "enumeration supports at most 64 features");
  if (schema.class_count() > 64)
    throw Error(ErrorKind::OutOfRange, "enumeration supports at most 64 classes");
  if (test && !(test->schema() == schema))
    throw Error(ErrorKind::InvalidExample, "test set schema differs from training schema");
  auto& s = *state_;
  s.owner = this;
  for (const auto& f : schema.features()) s.arity.push_back(f.arity());
  s.max_arity = schema.max_arity();
  s.train = collapse(train);
#ifndef NDEBUG
  s.checked_train.emplace(train);
#endif
  s.test.width = schema.feature_count();
  s.pop.width = schema.feature_count();
  if (test) {
    s.test = collapse(*test);
    s.has_test = true;
  }
  if (population) {
    for (const auto& x : *population)
      if (x.size() != schema.feature_count())
        throw Error(ErrorKind::InvalidExample, "population instance has wrong width");
    s.pop = collapse(*population, schema.feature_count());
    s.has_pop = true;
  }
}

Enumerator::~Enumerator() = default;

std::uint64_t Enumerator::run(const EnumerationLimits& limits, const Visitor& visitor) {
  return state_->run(limits.max_nodes, limits.max_trees_per_trial, false, &visitor);
}

bool Enumerator::exists_within(std::size_t max_nodes) {
  return state_->run(max_nodes, 0, true, nullptr) > 0;
}

std::size_t Enumerator::distinct_train_count() const noexcept {
  std::set<std::vector<ValueIndex>> seen;
  const auto& t = state_->train;
  for (std::size_t r = 0; r < t.rows(); ++r)
    seen.emplace(t.values.begin() + static_cast<std::ptrdiff_t>(r * t.width),
                 t.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * t.width));
  return seen.size();
}

std::uint64_t enumerate_consistent(const Dataset& train, const EnumerationLimits& limits,
                                   const Visitor& visitor) {
  Enumerator e(train);
  return e.run(limits, visitor);
}

std::vector<DecisionTree> collect_consistent(const Dataset& train,
                                             const EnumerationLimits& limits) {
  std::vector<DecisionTree> out;
  enumerate_consistent(train, limits, [&](const TreeVisit& v) { out.push_back(v.build()); });
  return out;
}

// ---------------------------------------------------------------------------
// Reference enumerator

namespace {

using ExampleRefs = std::vector<const LabeledExample*>;

ClassIndex naive_majority(const ExampleRefs& refs, std::size_t classes) {
  std::vector<std::size_t> votes(classes, 0);
  for (const auto* ex : refs) ++votes[ex->label];
  return static_cast<ClassIndex>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

// All syntactic trees over the unused features with at most `budget` tests,
// bucketed by node count. A leaf reached by examples takes the first one's
// label (any other label is inconsistent with that example); an empty leaf
// takes the parent majority.
std::vector<std::vector<DecisionTree>> naive_trees(const FeatureSchema& schema,
                                                   const ExampleRefs& here,
                                                   const ExampleRefs& parent,
                                                   std::vector<bool>& used, std::size_t budget) {
  std::vector<std::vector<DecisionTree>> by_size(budget + 1);
  const ClassIndex label = here.empty() ? naive_majority(parent, schema.class_count())
                                        : here.front()->label;
  by_size[0].push_back(DecisionTree::leaf(label));
  if (budget == 0) return by_size;

  for (std::size_t f = 0; f < schema.feature_count(); ++f) {
    if (used[f]) continue;
    used[f] = true;
    const std::size_t k = schema.arity(f);
    std::vector<ExampleRefs> parts(k);
    for (const auto* ex : here) parts[ex->instance[f]].push_back(ex);
    std::vector<std::vector<std::vector<DecisionTree>>> sub;
    for (std::size_t v = 0; v < k; ++v)
      sub.push_back(naive_trees(schema, parts[v], here, used, budget - 1));
    used[f] = false;

    // Cartesian product over children with total size <= budget - 1.
    std::vector<DecisionTree> partial;
    auto combine = [&](auto&& self, std::size_t v, std::size_t spent) -> void {
      if (v == k) {
        by_size[spent + 1].push_back(DecisionTree::test(f, partial));
        return;
      }
      for (std::size_t s = 0; spent + s + 1 <= budget && s < sub[v].size(); ++s)
        for (const auto& t : sub[v][s]) {
          partial.push_back(t);
          self(self, v + 1, spent + s);
          partial.pop_back();
        }
    };
    combine(combine, 0, 0);
  }
  return by_size;
}

}  // namespace

std::vector<DecisionTree> enumerate_naive(const Dataset& train, const EnumerationLimits& limits) {
  const auto& schema = train.schema();
  if (schema.feature_count() > kNaiveMaxFeatures || schema.instance_space_size() > kNaiveMaxSpace)
    throw Error(ErrorKind::OracleBound, "naive enumeration is limited to 4 features and 64 instances");
  if (train.empty()) throw Error(ErrorKind::EmptyInput, "empty training set");
  ExampleRefs all;
  for (const auto& ex : train.examples()) all.push_back(&ex);
  std::vector<bool> used(schema.feature_count(), false);
  // Paths have distinct features, so no tree exceeds the full-depth size.
  std::size_t full = 0, width = 1;
  for (std::size_t f = 0; f < schema.feature_count(); ++f) {
    full += width;
    width *= schema.arity(f);
  }
  const std::size_t budget = std::min(limits.max_nodes, full);
  auto by_size = naive_trees(schema, all, all, used, budget);

  std::vector<std::pair<std::string, DecisionTree>> keep;
  for (auto& bucket : by_size)
    for (auto& t : bucket)
      if (!check_structure(t, train) && is_consistent(t, train))
        keep.emplace_back(to_string(t, schema), std::move(t));
  std::sort(keep.begin(), keep.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<DecisionTree> out;
  for (auto& [s, t] : keep) out.push_back(std::move(t));
  return out;
}

std::optional<std::size_t> min_consistent_size(const Dataset& train, std::size_t cap) {
  Enumerator e(train);
  const std::size_t limit = std::min(cap, train.size());
  for (std::size_t c = 0; c <= limit; ++c)
    if (e.exists_within(c)) return c;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Summary

std::uint64_t CardinalityRow::error_sum() const noexcept {
  std::uint64_t s = 0;
  for (std::size_t e = 0; e < error_histogram.size(); ++e) s += e * error_histogram[e];
  return s;
}

std::uint64_t ForestSummary::total_trees() const noexcept {
  std::uint64_t n = 0;
  for (const auto& r : rows) n += r.tree_count;
  return n;
}

std::optional<std::size_t> ForestSummary::min_cardinality() const noexcept {
  for (std::size_t c = 0; c < rows.size(); ++c)
    if (rows[c].tree_count) return c;
  return std::nullopt;
}

std::optional<std::size_t> ForestSummary::max_cardinality() const noexcept {
  for (std::size_t c = rows.size(); c-- > 0;)
    if (rows[c].tree_count) return c;
  return std::nullopt;
}

ForestSummary forest_summary(const Dataset& train, const Dataset& test,
                             const std::vector<Instance>& path_population,
                             const EnumerationLimits& limits, double bin_width) {
  if (test.empty()) throw Error(ErrorKind::EmptyInput, "empty test set");
  if (!(bin_width > 0.0)) throw Error(ErrorKind::OutOfRange, "bin width must be positive");
  Enumerator e(train, &test, path_population.empty() ? nullptr : &path_population);

  ForestSummary s;
  s.test_denominator = test.size();
  s.population_size = path_population.size();
  s.bin_width = bin_width;
  // Each test strictly partitions the distinct training instances.
  const std::size_t distinct = e.distinct_train_count();
  const std::size_t top = std::min(limits.max_nodes, distinct > 0 ? distinct - 1 : 0);
  s.rows.resize(top + 1);
  for (auto& r : s.rows) r.error_histogram.assign(s.test_denominator + 1, 0);

  EnumerationLimits bounded = limits;
  bounded.max_nodes = top;
  const double scale = s.population_size ? 1.0 / (static_cast<double>(s.population_size) * bin_width)
                                         : 0.0;
  e.run(bounded, [&](const TreeVisit& v) {
    auto& row = s.rows[v.node_cardinality()];
    ++row.tree_count;
    ++row.error_histogram[v.test_errors()];
    if (v.test_errors() == 0) ++row.correct_tree_count;
    ++row.leaf_histogram[v.leaf_cardinality()];
    row.path_length_sum += v.path_length_sum();
    if (s.population_size) {
      // The epsilon keeps exact bin edges (e.g. 3.0 / 0.25) in the upper bin.
      const auto bin = static_cast<std::int64_t>(
          std::floor(static_cast<double>(v.path_length_sum()) * scale + 1e-9));
      auto& cell = s.path_bins[bin];
      ++cell.tree_count;
      cell.error_sum += v.test_errors();
    }
    auto& lc = s.leaf_cells[v.leaf_cardinality()];
    ++lc.tree_count;
    lc.error_sum += v.test_errors();
  });
  return s;
}

}  // namespace forestscope
