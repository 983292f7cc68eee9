#pragma once

#include <vector>

#include "eitvent/classifiers/common.hpp"
#include "eitvent/rng.hpp"

namespace eitvent {

/// Draws one configuration from the per-kind search space:
///   LDA        shrinkage in [0, 1]
///   DecisionTree  depth 2..20, min-leaf 1..32
///   RndForest  trees 50..300, mtry in {ceil(sqrt(d)), d/3, d/2}, min-leaf 1..16
///   RUSBoost   rounds 20..200, learning rate 0.05..1 (log), depth 1..5
///   SVMrbf     C in [1e-2, 1e3] (log), gamma in [1e-4, 10] (log)
Hyperparams sample_hyperparams(ClassifierKind kind, int n_features, Rng& rng);

/// Tie-break preference on equal validation accuracy: fewer trees or
/// rounds, smaller depth, larger shrinkage, smaller C then gamma.
bool prefer_simpler(const Hyperparams& candidate, const Hyperparams& incumbent);

struct SearchTrial {
  Hyperparams params;
  double validation_accuracy = 0.0;
};

struct SearchOutcome {
  Hyperparams best;
  int best_trial = -1;
  std::vector<SearchTrial> trials;
};

double accuracy_on(const Model& model, const TrainingSet& data);

/// Seeded uniform random search: `budget` independent draws, each
/// trained on `train` and scored on `validation` accuracy. Stands in
/// for the hyperparameter optimizer with a documented, reproducible
/// strategy.
SearchOutcome random_search(ClassifierKind kind, const TrainingSet& train,
                            const TrainingSet& validation, int budget,
                            std::uint64_t seed);

}  // namespace eitvent
