#include "fishid/dtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "fishid/error.hpp"

namespace fishid {

namespace {

constexpr const char* kStage = "dtree";

double gini_counts(const std::vector<std::size_t>& counts, std::size_t n) {
  if (n == 0) return 0.0;
  double sum_sq = 0;
  for (const std::size_t c : counts) {
    const double p = double(c) / double(n);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

class TreeBuilder {
 public:
  TreeBuilder(std::span<const TreeRow> rows, const TreeParams& params, std::size_t classes)
      : rows_(rows), params_(params), classes_(classes) {}

  DecisionTree build() {
    std::vector<std::size_t> all(rows_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    tree_.input_size = rows_.front().x.size();
    grow(all, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0;
    double impurity = std::numeric_limits<double>::infinity();
  };

  std::size_t majority(const std::vector<std::size_t>& counts) const {
    return std::size_t(std::max_element(counts.begin(), counts.end()) - counts.begin());
  }

  std::vector<std::size_t> count(const std::vector<std::size_t>& idx) const {
    std::vector<std::size_t> counts(classes_, 0);
    for (const std::size_t i : idx) ++counts[rows_[i].label];
    return counts;
  }

  Split best_split(const std::vector<std::size_t>& idx) const {
    Split best;
    const std::size_t n = idx.size();
    std::vector<std::size_t> order(idx);
    for (std::size_t f = 0; f < tree_.input_size; ++f) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return rows_[a].x[f] < rows_[b].x[f]; });
      std::vector<std::size_t> left(classes_, 0);
      std::vector<std::size_t> right = count(order);
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const std::size_t label = rows_[order[k]].label;
        ++left[label];
        --right[label];
        const double lo = rows_[order[k]].x[f];
        const double hi = rows_[order[k + 1]].x[f];
        if (!(lo < hi)) continue;
        const std::size_t n_left = k + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < params_.min_leaf || n_right < params_.min_leaf) continue;
        const double impurity =
            (double(n_left) * gini_counts(left, n_left) + double(n_right) * gini_counts(right, n_right)) / double(n);
        if (impurity < best.impurity) {
          double threshold = lo + (hi - lo) / 2.0;
          if (!(threshold < hi)) threshold = lo;
          best = {true, f, threshold, impurity};
        }
      }
    }
    return best;
  }

  std::size_t grow(const std::vector<std::size_t>& idx, int depth) {
    const std::size_t at = tree_.nodes.size();
    tree_.nodes.emplace_back();
    const auto counts = count(idx);
    const bool pure = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;
    Split split;
    if (!pure && depth < params_.max_depth && idx.size() >= 2 * params_.min_leaf) split = best_split(idx);
    if (!split.found) {
      tree_.nodes[at].leaf = true;
      tree_.nodes[at].label = majority(counts);
      return at;
    }

    std::vector<std::size_t> left, right;
    for (const std::size_t i : idx) (rows_[i].x[split.feature] <= split.threshold ? left : right).push_back(i);
    const std::size_t l = grow(left, depth + 1);
    const std::size_t r = grow(right, depth + 1);
    TreeNode& node = tree_.nodes[at];
    node.leaf = false;
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return at;
  }

  std::span<const TreeRow> rows_;
  TreeParams params_;
  std::size_t classes_;
  DecisionTree tree_;
};

}  // namespace

double gini(std::span<const std::size_t> labels) {
  if (labels.empty()) throw Error(ErrorKind::EmptySet, kStage, "gini of an empty set");
  const std::size_t classes = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> counts(classes, 0);
  for (const std::size_t c : labels) ++counts[c];
  return gini_counts(counts, labels.size());
}

DecisionTree fit_tree(std::span<const TreeRow> rows, const TreeParams& params) {
  if (rows.empty()) throw Error(ErrorKind::EmptyTrainingSet, kStage, "no rows to fit");
  if (params.max_depth < 1 || params.min_leaf < 1) {
    throw Error(ErrorKind::InvalidArgument, kStage, "max_depth and min_leaf must be >= 1");
  }
  const std::size_t dim = rows.front().x.size();
  std::size_t classes = 0;
  for (const TreeRow& r : rows) {
    if (r.x.size() != dim) throw Error(ErrorKind::RaggedRows, kStage, "rows have different lengths");
    classes = std::max(classes, r.label + 1);
  }
  return TreeBuilder(rows, params, classes).build();
}

std::size_t predict_class(const DecisionTree& tree, std::span<const double> x) {
  if (tree.nodes.empty()) throw Error(ErrorKind::CorruptModel, kStage, "tree has no nodes");
  std::size_t at = 0;
  while (!tree.nodes[at].leaf) {
    const TreeNode& node = tree.nodes[at];
    if (node.feature >= x.size()) {
      throw Error(ErrorKind::DimensionMismatch, kStage,
                  "input has " + std::to_string(x.size()) + " values, tree reads index " + std::to_string(node.feature));
    }
    at = x[node.feature] <= node.threshold ? node.left : node.right;
  }
  return tree.nodes[at].label;
}

void validate(const DecisionTree& tree) {
  const auto corrupt = [](const std::string& why) { throw Error(ErrorKind::CorruptModel, kStage, why); };
  if (tree.nodes.empty()) corrupt("tree has no nodes");
  // Children always sit after their parent, which rules out cycles.
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& n = tree.nodes[i];
    if (n.leaf) continue;
    if (n.left <= i || n.right <= i || n.left >= tree.nodes.size() || n.right >= tree.nodes.size()) {
      corrupt("node " + std::to_string(i) + " has invalid children");
    }
    if (n.feature >= tree.input_size) corrupt("node " + std::to_string(i) + " reads a feature out of range");
  }
}

std::size_t LabelRegistry::find(std::string_view name) const {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i].name == name) return i;
  }
  return classes.size();
}

HierarchicalLabel expand_label(const LabelRegistry& registry, std::size_t class_index) {
  if (class_index >= registry.size()) {
    throw Error(ErrorKind::UnknownClass, kStage, "class index " + std::to_string(class_index) + " is not registered");
  }
  const ClassInfo& c = registry.classes[class_index];
  return {c.cluster, c.poison, c.poison ? std::string() : c.name};
}

HierarchicalLabel predict_hierarchical(const DecisionTree& tree, const LabelRegistry& registry, std::span<const double> x) {
  return expand_label(registry, predict_class(tree, x));
}

}  // namespace fishid
