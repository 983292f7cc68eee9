#pragma once

#include <vector>

#include "eitvent/classifiers/decision_tree.hpp"

namespace eitvent {

/// Boosted shallow trees where every round trains on a class-balanced
/// subset: all minority-class samples plus an equal-sized random
/// undersample of the majority class. Boosting weights live on the full
/// training set and follow the usual exponential update.
class RusBoostModel final : public Model {
 public:
  struct Round {
    Tree tree;
    double alpha = 0.0;
  };

  RusBoostModel(std::vector<Round> rounds, int dimension, RusBoostParams params,
                std::uint64_t seed)
      : rounds_(std::move(rounds)), dimension_(dimension), params_(params),
        seed_(seed) {}

  static std::unique_ptr<RusBoostModel> train(const TrainingSet& data,
                                              const RusBoostParams& params,
                                              std::uint64_t seed);

  ClassifierKind kind() const override { return ClassifierKind::kRusBoost; }
  int dimension() const override { return dimension_; }
  Prediction predict(std::span<const double> features) const override;
  Hyperparams hyperparams() const override { return params_; }
  std::uint64_t seed() const override { return seed_; }
  nlohmann::json params_to_json() const override;
  static std::unique_ptr<RusBoostModel> from_json(const nlohmann::json& j);

  const std::vector<Round>& rounds() const { return rounds_; }

  /// The balanced subset drawn for one round (sorted sample indices).
  /// Exposed so the equal-class-count construction is testable.
  static std::vector<int> round_subset(const TrainingSet& data,
                                       std::uint64_t seed, int round);

 private:
  std::vector<Round> rounds_;
  int dimension_;
  RusBoostParams params_;
  std::uint64_t seed_;
};

}  // namespace eitvent
