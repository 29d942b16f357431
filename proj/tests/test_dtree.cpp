#include <map>
#include <random>

#include "doctest.h"
#include "fishid/dtree.hpp"
#include "fishid/error.hpp"

using namespace fishid;

namespace {

// Independent gini over labels.
double gini_oracle(const std::vector<std::size_t>& labels) {
  std::map<std::size_t, double> counts;
  for (auto l : labels) counts[l] += 1;
  double s = 0;
  for (const auto& [k, c] : counts) s += (c / labels.size()) * (c / labels.size());
  return 1 - s;
}

std::vector<TreeRow> random_rows(std::uint64_t seed, std::size_t n, std::size_t dim, std::size_t classes) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TreeRow> rows(n);
  for (TreeRow& r : rows) {
    r.x.resize(dim);
    for (double& v : r.x) v = u(gen);
    r.label = gen() % classes;
  }
  return rows;
}

// Collects the labels of the rows reaching each node.
void route(const DecisionTree& t, std::size_t node, const std::vector<const TreeRow*>& rows,
           std::map<std::size_t, std::vector<std::size_t>>& reached) {
  auto& here = reached[node];
  for (const TreeRow* r : rows) here.push_back(r->label);
  const TreeNode& n = t.nodes[node];
  if (n.leaf) return;
  std::vector<const TreeRow*> left, right;
  for (const TreeRow* r : rows) (r->x[n.feature] <= n.threshold ? left : right).push_back(r);
  route(t, n.left, left, reached);
  route(t, n.right, right, reached);
}

LabelRegistry registry() {
  return {{{"Poison fish", "poison", true}, {"Scombridae", "mackerel", false}}};
}

}  // namespace

TEST_CASE("gini values") {
  CHECK(gini(std::vector<std::size_t>{0, 0, 0}) == 0.0);
  CHECK(gini(std::vector<std::size_t>{0, 0, 1, 1}) == 0.5);
  CHECK(gini(std::vector<std::size_t>{0, 0, 0, 1}) == 0.375);
  try {
    gini(std::vector<std::size_t>{});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptySet);
  }
}

TEST_CASE("gini bounds against an oracle") {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t c = 1 + gen() % 7;
    std::vector<std::size_t> labels(1 + gen() % 40);
    for (auto& l : labels) l = gen() % c;
    const double g = gini(labels);
    CHECK(g == doctest::Approx(gini_oracle(labels)).epsilon(1e-12));
    CHECK(g >= 0.0);
    CHECK(g <= 1.0 - 1.0 / double(c) + 1e-12);
    const bool pure = std::all_of(labels.begin(), labels.end(), [&](auto l) { return l == labels[0]; });
    CHECK((g == 0.0) == pure);
  }
}

TEST_CASE("separable two-class rows give a depth-one tree") {
  std::vector<TreeRow> rows;
  for (int i = 0; i < 5; ++i) rows.push_back({{0.9, 0.1}, 0});
  for (int i = 0; i < 5; ++i) rows.push_back({{0.1, 0.9}, 1});
  const DecisionTree t = fit_tree(rows, TreeParams{});
  REQUIRE(t.nodes.size() == 3);
  CHECK_FALSE(t.nodes[0].leaf);
  CHECK(t.nodes[0].feature == 0);
  CHECK(t.nodes[0].threshold == 0.5);
  for (const TreeRow& r : rows) CHECK(predict_class(t, r.x) == r.label);
}

TEST_CASE("one class gives a single leaf") {
  const std::vector<TreeRow> rows{{{1, 2}, 3}, {{4, 5}, 3}, {{0, 0}, 3}};
  const DecisionTree t = fit_tree(rows, TreeParams{});
  REQUIRE(t.nodes.size() == 1);
  CHECK(t.nodes[0].leaf);
  CHECK(t.nodes[0].label == 3);
  CHECK(predict_class(t, std::vector<double>{-7, 99}) == 3);
}

TEST_CASE("majority ties pick the lowest class") {
  const std::vector<TreeRow> rows{{{1.0}, 2}, {{1.0}, 1}};
  const DecisionTree t = fit_tree(rows, TreeParams{});
  REQUIRE(t.nodes.size() == 1);
  CHECK(t.nodes[0].label == 1);
}

TEST_CASE("split ties prefer the lower feature") {
  // Both features separate the classes perfectly.
  const std::vector<TreeRow> rows{{{0.0, 0.0}, 0}, {{1.0, 1.0}, 1}};
  const DecisionTree t = fit_tree(rows, TreeParams{});
  CHECK(t.nodes[0].feature == 0);
}

TEST_CASE("predict follows the <= rule") {
  DecisionTree t;
  t.input_size = 2;
  t.nodes = {{false, 0, 0.5, 1, 2, 0}, {true, 0, 0, 0, 0, 4}, {true, 0, 0, 0, 0, 6}};
  validate(t);
  CHECK(predict_class(t, std::vector<double>{0.4, 0.0}) == 4);
  CHECK(predict_class(t, std::vector<double>{0.5, 0.0}) == 4);
  CHECK(predict_class(t, std::vector<double>{0.6, 0.0}) == 6);
  CHECK(predict_class(t, std::vector<double>{0.1}) == 4);
  DecisionTree second = t;
  second.nodes[0].feature = 1;
  try {
    predict_class(second, std::vector<double>{0.1});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("fit errors") {
  const auto kind = [](const std::vector<TreeRow>& rows, TreeParams p) {
    try {
      fit_tree(rows, p);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoFailure;
  };
  CHECK(kind({}, TreeParams{}) == ErrorKind::EmptyTrainingSet);
  CHECK(kind({{{1, 2}, 0}, {{1}, 1}}, TreeParams{}) == ErrorKind::RaggedRows);
  CHECK(kind({{{1}, 0}}, TreeParams{0, 1}) == ErrorKind::InvalidArgument);
  CHECK(kind({{{1}, 0}}, TreeParams{3, 0}) == ErrorKind::InvalidArgument);
}

TEST_CASE("validate catches broken trees") {
  DecisionTree t;
  t.input_size = 1;
  CHECK_THROWS_AS(validate(t), Error);
  t.nodes = {{false, 0, 0.5, 1, 5, 0}, {true, 0, 0, 0, 0, 0}};
  CHECK_THROWS_AS(validate(t), Error);
  t.nodes = {{false, 3, 0.5, 1, 2, 0}, {true, 0, 0, 0, 0, 0}, {true, 0, 0, 0, 0, 1}};
  CHECK_THROWS_AS(validate(t), Error);
  t.nodes = {{false, 0, 0.5, 0, 0, 0}};
  CHECK_THROWS_AS(validate(t), Error);
}

TEST_CASE("fully grown trees fit random rows exactly and never raise impurity") {
  TreeParams full{kUnlimitedDepth, 1};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto rows = random_rows(seed, 200, 7, 7);
    const DecisionTree t = fit_tree(rows, full);
    validate(t);
    std::size_t hits = 0;
    for (const TreeRow& r : rows) hits += predict_class(t, r.x) == r.label ? 1 : 0;
    CHECK(hits == rows.size());

    std::vector<const TreeRow*> ptrs;
    for (const TreeRow& r : rows) ptrs.push_back(&r);
    std::map<std::size_t, std::vector<std::size_t>> reached;
    route(t, 0, ptrs, reached);
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      const TreeNode& n = t.nodes[i];
      if (n.leaf) continue;
      const auto& p = reached[i];
      const auto& l = reached[n.left];
      const auto& r = reached[n.right];
      REQUIRE_FALSE(l.empty());
      REQUIRE_FALSE(r.empty());
      const double child = (l.size() * gini_oracle(l) + r.size() * gini_oracle(r)) / double(p.size());
      REQUIRE(child <= gini_oracle(p) + 1e-12);
    }
  }
}

TEST_CASE("depth and leaf limits hold") {
  const auto rows = random_rows(77, 150, 4, 5);
  const DecisionTree t = fit_tree(rows, TreeParams{3, 10});
  std::vector<const TreeRow*> ptrs;
  for (const TreeRow& r : rows) ptrs.push_back(&r);
  std::map<std::size_t, std::vector<std::size_t>> reached;
  route(t, 0, ptrs, reached);
  // Depth via parent links.
  std::vector<int> depth(t.nodes.size(), 0);
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    if (t.nodes[i].leaf) {
      CHECK(reached[i].size() >= 10);
      CHECK(depth[i] <= 3);
    } else {
      depth[t.nodes[i].left] = depth[i] + 1;
      depth[t.nodes[i].right] = depth[i] + 1;
    }
  }
}

TEST_CASE("fit is deterministic") {
  const auto rows = random_rows(5, 120, 7, 7);
  CHECK(fit_tree(rows, TreeParams{}) == fit_tree(rows, TreeParams{}));
}

TEST_CASE("hierarchical expansion") {
  const LabelRegistry reg = registry();
  CHECK(expand_label(reg, 1) == HierarchicalLabel{"mackerel", false, "Scombridae"});
  CHECK(expand_label(reg, 0) == HierarchicalLabel{"poison", true, ""});
  try {
    expand_label(reg, 2);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownClass);
  }
  CHECK(reg.find("Scombridae") == 1);
  CHECK(reg.find("nope") == reg.size());

  const std::vector<TreeRow> rows{{{0.1}, 0}, {{0.9}, 1}};
  const DecisionTree t = fit_tree(rows, TreeParams{});
  CHECK(predict_hierarchical(t, reg, std::vector<double>{0.95}).family == "Scombridae");
  CHECK(predict_hierarchical(t, reg, std::vector<double>{0.0}).poison);
}
