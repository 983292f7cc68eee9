#include "eitvent/classifiers/search.hpp"

#include <cmath>

#include "eitvent/errors.hpp"

namespace eitvent {

Hyperparams sample_hyperparams(ClassifierKind kind, int n_features, Rng& rng) {
  switch (kind) {
    case ClassifierKind::kLda: {
      LdaParams p;
      p.shrinkage = rng.uniform(0.0, 1.0);
      return p;
    }
    case ClassifierKind::kDecisionTree: {
      TreeParams p;
      p.max_depth = rng.uniform_int(2, 20);
      p.min_leaf = rng.uniform_int(1, 32);
      return p;
    }
    case ClassifierKind::kRandomForest: {
      ForestParams p;
      p.n_trees = rng.uniform_int(50, 300);
      const int choice = rng.uniform_int(0, 2);
      const int root = std::max(1, static_cast<int>(std::ceil(std::sqrt(n_features))));
      const int third = std::max(1, n_features / 3);
      const int half = std::max(1, n_features / 2);
      p.mtry = choice == 0 ? root : (choice == 1 ? third : half);
      p.min_leaf = rng.uniform_int(1, 16);
      return p;
    }
    case ClassifierKind::kRusBoost: {
      RusBoostParams p;
      p.rounds = rng.uniform_int(20, 200);
      p.learning_rate = rng.log_uniform(0.05, 1.0);
      p.max_depth = rng.uniform_int(1, 5);
      return p;
    }
    case ClassifierKind::kSvmRbf: {
      SvmParams p;
      p.c = rng.log_uniform(1e-2, 1e3);
      p.gamma = rng.log_uniform(1e-4, 10.0);
      return p;
    }
  }
  throw DataError("unknown classifier kind");
}

bool prefer_simpler(const Hyperparams& candidate, const Hyperparams& incumbent) {
  if (candidate.index() != incumbent.index()) return false;
  if (const auto* a = std::get_if<ForestParams>(&candidate)) {
    return a->n_trees < std::get<ForestParams>(incumbent).n_trees;
  }
  if (const auto* a = std::get_if<RusBoostParams>(&candidate)) {
    return a->rounds < std::get<RusBoostParams>(incumbent).rounds;
  }
  if (const auto* a = std::get_if<TreeParams>(&candidate)) {
    return a->max_depth < std::get<TreeParams>(incumbent).max_depth;
  }
  if (const auto* a = std::get_if<LdaParams>(&candidate)) {
    return a->shrinkage > std::get<LdaParams>(incumbent).shrinkage;
  }
  if (const auto* a = std::get_if<SvmParams>(&candidate)) {
    const auto& b = std::get<SvmParams>(incumbent);
    if (a->c != b.c) return a->c < b.c;
    return a->gamma < b.gamma;
  }
  return false;
}

double accuracy_on(const Model& model, const TrainingSet& data) {
  int correct = 0;
  for (int i = 0; i < data.n; ++i) {
    if (static_cast<std::uint8_t>(model.predict_label(data.row(i))) ==
        data.y[static_cast<std::size_t>(i)]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.n);
}

SearchOutcome random_search(ClassifierKind kind, const TrainingSet& train,
                            const TrainingSet& validation, int budget,
                            std::uint64_t seed) {
  if (budget < 1) throw DataError("search budget must be at least 1");
  SearchOutcome outcome;
  outcome.best = default_hyperparams(kind);
  double best_accuracy = -1.0;
  for (int trial = 0; trial < budget; ++trial) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(trial), 0x7121u));
    const Hyperparams params = sample_hyperparams(kind, train.d, rng);
    const auto model =
        eitvent::train(train, params, mix_seed(seed, static_cast<std::uint64_t>(trial)));
    const double acc = accuracy_on(*model, validation);
    outcome.trials.push_back({params, acc});
    const bool better =
        acc > best_accuracy ||
        (acc == best_accuracy && prefer_simpler(params, outcome.best));
    if (better) {
      best_accuracy = acc;
      outcome.best = params;
      outcome.best_trial = trial;
    }
  }
  return outcome;
}

}  // namespace eitvent
