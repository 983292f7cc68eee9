#include "eitvent/classifiers/random_forest.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "eitvent/errors.hpp"
#include "eitvent/rng.hpp"

namespace eitvent {

int forest_mtry(const ForestParams& params, int n_features) {
  if (params.mtry > 0) return std::min(params.mtry, n_features);
  return std::max(1, static_cast<int>(std::ceil(std::sqrt(n_features))));
}

std::unique_ptr<RandomForestModel> RandomForestModel::train(
    const TrainingSet& data, const ForestParams& params, std::uint64_t seed,
    int jobs) {
  data.validate();
  if (params.n_trees < 1) throw DataError("forest needs at least one tree");
  const ColumnMatrix columns = ColumnMatrix::from(data);
  TreeBuildConfig config;
  config.max_depth = 64;
  config.min_leaf = params.min_leaf;
  config.mtry = forest_mtry(params, data.d);

  std::vector<Tree> trees(static_cast<std::size_t>(params.n_trees));
  const std::vector<double> weights(static_cast<std::size_t>(data.n), 1.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : omp_get_max_threads())
#endif
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t), 0xF0E57u));
    std::vector<int> bootstrap(static_cast<std::size_t>(data.n));
    for (int i = 0; i < data.n; ++i) {
      bootstrap[static_cast<std::size_t>(i)] =
          static_cast<int>(rng.below(static_cast<std::uint64_t>(data.n)));
    }
    trees[static_cast<std::size_t>(t)] =
        build_tree(columns, bootstrap, weights, config, &rng);
  }
  return std::make_unique<RandomForestModel>(std::move(trees), data.d, params,
                                             seed);
}

Prediction RandomForestModel::predict(std::span<const double> features) const {
  if (static_cast<int>(features.size()) != dimension_) {
    throw DataError("feature dimension mismatch: got " +
                    std::to_string(features.size()) + ", expected " +
                    std::to_string(dimension_));
  }
  int nh_votes = 0;
  for (const Tree& tree : trees_) {
    if (tree.leaf_for(features).leaf_label == 1) ++nh_votes;
  }
  const double fraction =
      static_cast<double>(nh_votes) / static_cast<double>(trees_.size());
  const Label label = fraction >= 0.5 ? Label::kNonHealthy : Label::kHealthy;
  return {label, fraction};
}

nlohmann::json RandomForestModel::params_to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& t : trees_) trees.push_back(tree_to_json(t));
  return {{"dimension", dimension_}, {"trees", std::move(trees)}};
}

std::unique_ptr<RandomForestModel> RandomForestModel::from_json(
    const nlohmann::json& j) {
  const auto& p = j.at("hyperparameters");
  ForestParams params;
  params.n_trees = p.at("n_trees").get<int>();
  params.mtry = p.at("mtry").get<int>();
  params.min_leaf = p.at("min_leaf").get<int>();
  std::vector<Tree> trees;
  for (const auto& t : j.at("parameters").at("trees")) {
    trees.push_back(tree_from_json(t));
  }
  return std::make_unique<RandomForestModel>(
      std::move(trees), j.at("parameters").at("dimension").get<int>(), params,
      j.at("seed").get<std::uint64_t>());
}

}  // namespace eitvent
