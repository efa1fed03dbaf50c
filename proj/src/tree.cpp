#include "forestscope/tree.hpp"

#include <cctype>
#include <sstream>

namespace forestscope {

DecisionTree DecisionTree::leaf(ClassIndex label) {
  DecisionTree t;
  t.label_ = label;
  return t;
}

DecisionTree DecisionTree::test(std::size_t feature, std::vector<DecisionTree> children) {
  if (children.size() < 2) throw Error(ErrorKind::InvalidTree, "test node needs >= 2 children");
  DecisionTree t;
  t.feature_ = feature;
  t.children_ = std::move(children);
  return t;
}

std::size_t DecisionTree::node_cardinality() const noexcept {
  if (is_leaf()) return 0;
  std::size_t n = 1;
  for (const auto& c : children_) n += c.node_cardinality();
  return n;
}

std::size_t DecisionTree::leaf_cardinality() const noexcept {
  if (is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : children_) n += c.leaf_cardinality();
  return n;
}

bool DecisionTree::operator==(const DecisionTree& other) const noexcept {
  if (is_leaf() != other.is_leaf()) return false;
  if (is_leaf()) return label_ == other.label_;
  return feature_ == other.feature_ && children_ == other.children_;
}

void validate(const DecisionTree& tree, const FeatureSchema& schema) {
  std::vector<bool> on_path(schema.feature_count(), false);
  auto walk = [&](auto&& self, const DecisionTree& t) -> void {
    if (t.is_leaf()) {
      if (t.label() >= schema.class_count())
        throw Error(ErrorKind::InvalidTree, "leaf label out of range");
      return;
    }
    if (t.feature() >= schema.feature_count())
      throw Error(ErrorKind::InvalidTree, "test feature out of range");
    if (t.children().size() != schema.arity(t.feature()))
      throw Error(ErrorKind::InvalidTree,
                  "test on '" + schema.feature(t.feature()).name + "' has wrong child count");
    if (on_path[t.feature()])
      throw Error(ErrorKind::InvalidTree,
                  "feature '" + schema.feature(t.feature()).name + "' repeated on a path");
    on_path[t.feature()] = true;
    for (const auto& c : t.children()) self(self, c);
    on_path[t.feature()] = false;
  };
  walk(walk, tree);
}

namespace {

const DecisionTree& leaf_for(const DecisionTree& tree, const Instance& x, std::size_t* depth) {
  const DecisionTree* t = &tree;
  std::size_t d = 0;
  while (!t->is_leaf()) {
    t = &t->children()[x[t->feature()]];
    ++d;
  }
  if (depth) *depth = d;
  return *t;
}

}  // namespace

ClassIndex classify(const DecisionTree& tree, const Instance& instance) {
  return leaf_for(tree, instance, nullptr).label();
}

std::size_t path_length(const DecisionTree& tree, const Instance& instance) {
  std::size_t d = 0;
  leaf_for(tree, instance, &d);
  return d;
}

std::size_t error_count(const DecisionTree& tree, const Dataset& data) {
  std::size_t errors = 0;
  for (const auto& ex : data.examples())
    if (classify(tree, ex.instance) != ex.label) ++errors;
  return errors;
}

TreeMetrics metrics(const DecisionTree& tree, const std::vector<Instance>& path_population,
                    const Dataset& test_set) {
  if (path_population.empty()) throw Error(ErrorKind::EmptyInput, "empty path population");
  if (test_set.empty()) throw Error(ErrorKind::EmptyInput, "empty test set");
  TreeMetrics m;
  m.node_cardinality = tree.node_cardinality();
  m.leaf_cardinality = tree.leaf_cardinality();
  std::size_t total = 0;
  for (const auto& x : path_population) total += path_length(tree, x);
  m.avg_path_length = static_cast<double>(total) / static_cast<double>(path_population.size());
  m.error_rate =
      static_cast<double>(error_count(tree, test_set)) / static_cast<double>(test_set.size());
  return m;
}

bool is_consistent(const DecisionTree& tree, const Dataset& train) {
  for (const auto& ex : train.examples())
    if (classify(tree, ex.instance) != ex.label) return false;
  return true;
}

std::optional<StructureViolation> check_structure(const DecisionTree& tree,
                                                  const Dataset& train) {
  std::vector<std::pair<std::size_t, ValueIndex>> path;
  std::optional<StructureViolation> found;
  auto walk = [&](auto&& self, const DecisionTree& t,
                  const std::vector<const LabeledExample*>& here) -> void {
    if (found || t.is_leaf()) return;
    bool pure = true;
    for (const auto* ex : here)
      if (ex->label != here.front()->label) pure = false;
    if (here.empty() || pure) {
      found = StructureViolation{StructureViolation::Kind::C2, path};
      return;
    }
    std::vector<std::vector<const LabeledExample*>> parts(t.children().size());
    for (const auto* ex : here) parts[ex->instance[t.feature()]].push_back(ex);
    std::size_t nonempty = 0;
    for (const auto& p : parts) nonempty += !p.empty();
    if (nonempty < 2) {
      found = StructureViolation{StructureViolation::Kind::C1, path};
      return;
    }
    for (std::size_t v = 0; v < parts.size() && !found; ++v) {
      path.emplace_back(t.feature(), static_cast<ValueIndex>(v));
      self(self, t.children()[v], parts[v]);
      path.pop_back();
    }
  };
  std::vector<const LabeledExample*> all;
  all.reserve(train.size());
  for (const auto& ex : train.examples()) all.push_back(&ex);
  walk(walk, tree, all);
  return found;
}

// ---------------------------------------------------------------------------
// Text form

namespace {

void write(std::ostream& os, const DecisionTree& t, const FeatureSchema& schema) {
  if (t.is_leaf()) {
    os << '[' << schema.classes().at(t.label()) << ']';
    return;
  }
  const auto& f = schema.feature(t.feature());
  os << '(' << f.name;
  for (std::size_t v = 0; v < t.children().size(); ++v) {
    os << ' ' << f.values.at(v) << ':';
    write(os, t.children()[v], schema);
  }
  os << ')';
}

class TreeParser {
 public:
  TreeParser(std::string_view text, const FeatureSchema& schema) : s_(text), schema_(schema) {}

  DecisionTree parse() {
    DecisionTree t = node();
    skip_ws();
    if (pos_ != s_.size()) error("trailing characters");
    return t;
  }

 private:
  static bool is_delim(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '[' ||
           c == ']' || c == ':';
  }

  [[noreturn]] void error(const std::string& msg) const {
    throw Error(ErrorKind::TreeParse, "offset " + std::to_string(pos_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) error(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string token() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !is_delim(s_[pos_])) ++pos_;
    if (pos_ == start) error("expected a token");
    return std::string(s_.substr(start, pos_ - start));
  }

  DecisionTree node() {
    skip_ws();
    if (pos_ >= s_.size()) error("unexpected end of input");
    if (s_[pos_] == '[') {
      ++pos_;
      const auto name = token();
      auto c = schema_.find_class(name);
      if (!c) error("unknown class '" + name + "'");
      expect(']');
      return DecisionTree::leaf(*c);
    }
    expect('(');
    const auto fname = token();
    auto f = schema_.find_feature(fname);
    if (!f) error("unknown feature '" + fname + "'");
    const std::size_t arity = schema_.arity(*f);
    std::vector<std::optional<DecisionTree>> slots(arity);
    for (std::size_t i = 0; i < arity; ++i) {
      const auto vname = token();
      auto v = schema_.find_value(*f, vname);
      if (!v) error("unknown value '" + vname + "' for feature '" + fname + "'");
      if (*v != i) error("values of '" + fname + "' must appear in declared order");
      expect(':');
      slots[i] = node();
    }
    expect(')');
    std::vector<DecisionTree> children;
    for (auto& s : slots) children.push_back(std::move(*s));
    return DecisionTree::test(*f, std::move(children));
  }

  std::string_view s_;
  const FeatureSchema& schema_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string to_string(const DecisionTree& tree, const FeatureSchema& schema) {
  std::ostringstream os;
  write(os, tree, schema);
  return os.str();
}

DecisionTree parse_tree(std::string_view text, const FeatureSchema& schema) {
  DecisionTree t = TreeParser(text, schema).parse();
  try {
    validate(t, schema);
  } catch (const Error& e) {
    throw Error(ErrorKind::TreeParse, e.what());
  }
  return t;
}

}  // namespace forestscope
