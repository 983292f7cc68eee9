#pragma once

#include <span>
#include <vector>

#include "eitvent/classifiers/common.hpp"
#include "eitvent/rng.hpp"

namespace eitvent {

/// Column-major copy of a training set for cache-friendly split scans.
struct ColumnMatrix {
  int n = 0;
  int d = 0;
  std::vector<double> columns;  // d * n, feature-major
  std::vector<std::uint8_t> y;

  static ColumnMatrix from(const TrainingSet& data);
  double value(int row, int col) const {
    return columns[static_cast<std::size_t>(col) * static_cast<std::size_t>(n) +
                   static_cast<std::size_t>(row)];
  }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::uint8_t leaf_label = 1;
  double nh_fraction = 0.0;
  /// Branch nodes only: parent risk minus child risks, with risk =
  /// (node weight / root weight) * Gini impurity.
  double risk_reduction = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;
  int branch_count = 0;

  const TreeNode& leaf_for(std::span<const double> x) const;
  /// Per-feature summed risk reduction divided by branch count.
  std::vector<double> importance(int n_features) const;
};

struct TreeBuildConfig {
  int max_depth = 64;
  int min_leaf = 1;
  int mtry = 0;  // 0 or >= d: consider every feature
};

/// CART with Gini impurity and midpoint thresholds. `samples` may carry
/// repeated indices (bootstrap); `weights` aligns with `samples`.
/// Split ties break toward the lowest feature index, then the lowest
/// threshold. Leaf ties label non-healthy. `rng` drives per-split
/// feature subsampling and may be null when mtry covers all features.
Tree build_tree(const ColumnMatrix& data, std::span<const int> samples,
                std::span<const double> weights, const TreeBuildConfig& config,
                Rng* rng);

class DecisionTreeModel final : public Model {
 public:
  DecisionTreeModel(Tree tree, int dimension, TreeParams params,
                    std::uint64_t seed)
      : tree_(std::move(tree)), dimension_(dimension), params_(params),
        seed_(seed) {}

  static std::unique_ptr<DecisionTreeModel> train(const TrainingSet& data,
                                                  const TreeParams& params,
                                                  std::uint64_t seed);

  ClassifierKind kind() const override { return ClassifierKind::kDecisionTree; }
  int dimension() const override { return dimension_; }
  Prediction predict(std::span<const double> features) const override;
  Hyperparams hyperparams() const override { return params_; }
  std::uint64_t seed() const override { return seed_; }
  nlohmann::json params_to_json() const override;
  static std::unique_ptr<DecisionTreeModel> from_json(const nlohmann::json& j);

  const Tree& tree() const { return tree_; }

 private:
  Tree tree_;
  int dimension_;
  TreeParams params_;
  std::uint64_t seed_;
};

nlohmann::json tree_to_json(const Tree& tree);
Tree tree_from_json(const nlohmann::json& j);

}  // namespace eitvent
