#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fishid {

double gini(std::span<const std::size_t> labels);

struct TreeNode {
  bool leaf = true;
  std::size_t feature = 0;
  double threshold = 0;
  std::size_t left = 0;
  std::size_t right = 0;
  std::size_t label = 0;  // class index for leaves

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// CART tree with axis-aligned thresholds; nodes[0] is the root. x[f] <= t
// descends left.
struct DecisionTree {
  std::vector<TreeNode> nodes;
  std::size_t input_size = 0;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct TreeRow {
  std::vector<double> x;
  std::size_t label = 0;
};

struct TreeParams {
  int max_depth = 8;
  std::size_t min_leaf = 1;
};

inline constexpr int kUnlimitedDepth = 1 << 30;

// Greedy splitting on weighted child Gini. Candidate thresholds are midpoints
// between consecutive distinct values; ties prefer the lower feature index,
// then the lower threshold. Leaves take the majority class (lowest index on ties).
DecisionTree fit_tree(std::span<const TreeRow> rows, const TreeParams& params);

std::size_t predict_class(const DecisionTree& tree, std::span<const double> x);

// Checks structure: children exist, paths terminate, features in range.
void validate(const DecisionTree& tree);

struct ClassInfo {
  std::string name;
  std::string cluster;
  bool poison = false;

  friend bool operator==(const ClassInfo&, const ClassInfo&) = default;
};

// Terminal classes in output-neuron order.
struct LabelRegistry {
  std::vector<ClassInfo> classes;

  std::size_t size() const { return classes.size(); }
  // Index of the class with this name, or size() when absent.
  std::size_t find(std::string_view name) const;

  friend bool operator==(const LabelRegistry&, const LabelRegistry&) = default;
};

struct HierarchicalLabel {
  std::string cluster;
  bool poison = false;
  std::string family;  // empty for the poison class

  friend bool operator==(const HierarchicalLabel&, const HierarchicalLabel&) = default;
};

HierarchicalLabel expand_label(const LabelRegistry& registry, std::size_t class_index);
HierarchicalLabel predict_hierarchical(const DecisionTree& tree, const LabelRegistry& registry, std::span<const double> x);

}  // namespace fishid
