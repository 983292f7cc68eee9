#pragma once

#include <vector>

#include "eitvent/classifiers/decision_tree.hpp"

namespace eitvent {

/// Bagged CART ensemble: per-tree bootstrap resampling plus uniform
/// feature subsampling at every split. Majority vote; vote ties label
/// non-healthy.
class RandomForestModel final : public Model {
 public:
  RandomForestModel(std::vector<Tree> trees, int dimension, ForestParams params,
                    std::uint64_t seed)
      : trees_(std::move(trees)), dimension_(dimension), params_(params),
        seed_(seed) {}

  /// jobs <= 0 uses the OpenMP default; trees are seeded per index so
  /// the forest is identical for any thread count.
  static std::unique_ptr<RandomForestModel> train(const TrainingSet& data,
                                                  const ForestParams& params,
                                                  std::uint64_t seed,
                                                  int jobs = 1);

  ClassifierKind kind() const override { return ClassifierKind::kRandomForest; }
  int dimension() const override { return dimension_; }
  Prediction predict(std::span<const double> features) const override;
  Hyperparams hyperparams() const override { return params_; }
  std::uint64_t seed() const override { return seed_; }
  nlohmann::json params_to_json() const override;
  static std::unique_ptr<RandomForestModel> from_json(const nlohmann::json& j);

  const std::vector<Tree>& trees() const { return trees_; }

 private:
  std::vector<Tree> trees_;
  int dimension_;
  ForestParams params_;
  std::uint64_t seed_;
};

int forest_mtry(const ForestParams& params, int n_features);

}  // namespace eitvent
