#include "eitvent/classifiers/rusboost.hpp"

#include <algorithm>
#include <cmath>

#include "eitvent/errors.hpp"
#include "eitvent/rng.hpp"

namespace eitvent {

namespace {

constexpr double kEpsFloor = 1e-10;

void class_indices(const TrainingSet& data, std::vector<int>& class0,
                   std::vector<int>& class1) {
  for (int i = 0; i < data.n; ++i) {
    (data.y[static_cast<std::size_t>(i)] == 0 ? class0 : class1).push_back(i);
  }
}

}  // namespace

std::vector<int> RusBoostModel::round_subset(const TrainingSet& data,
                                             std::uint64_t seed, int round) {
  std::vector<int> class0;
  std::vector<int> class1;
  class_indices(data, class0, class1);
  const bool zero_is_minority = class0.size() <= class1.size();
  const std::vector<int>& minority = zero_is_minority ? class0 : class1;
  const std::vector<int>& majority = zero_is_minority ? class1 : class0;

  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(round), 0x505Bu));
  const std::vector<int> picks = rng.sample_without_replacement(
      static_cast<int>(majority.size()), static_cast<int>(minority.size()));

  std::vector<int> subset = minority;
  for (const int p : picks) subset.push_back(majority[static_cast<std::size_t>(p)]);
  std::sort(subset.begin(), subset.end());
  return subset;
}

std::unique_ptr<RusBoostModel> RusBoostModel::train(const TrainingSet& data,
                                                    const RusBoostParams& params,
                                                    std::uint64_t seed) {
  data.validate();
  if (params.rounds < 1) throw DataError("rusboost needs at least one round");
  const ColumnMatrix columns = ColumnMatrix::from(data);

  std::vector<double> w(static_cast<std::size_t>(data.n),
                        1.0 / static_cast<double>(data.n));
  std::vector<Round> rounds;
  rounds.reserve(static_cast<std::size_t>(params.rounds));

  TreeBuildConfig config;
  config.max_depth = params.max_depth;
  config.min_leaf = 1;
  config.mtry = 0;

  std::vector<std::uint8_t> h(static_cast<std::size_t>(data.n));
  for (int t = 0; t < params.rounds; ++t) {
    const std::vector<int> subset = round_subset(data, seed, t);
    std::vector<double> subset_w;
    subset_w.reserve(subset.size());
    double wsum = 0.0;
    for (const int i : subset) wsum += w[static_cast<std::size_t>(i)];
    if (wsum <= 0.0) wsum = 1.0;
    for (const int i : subset) {
      subset_w.push_back(w[static_cast<std::size_t>(i)] / wsum);
    }

    Round round;
    round.tree = build_tree(columns, subset, subset_w, config, nullptr);

    // Weighted error over the full training set.
    double eps = 0.0;
    for (int i = 0; i < data.n; ++i) {
      h[static_cast<std::size_t>(i)] =
          round.tree.leaf_for(data.row(i)).leaf_label;
      if (h[static_cast<std::size_t>(i)] != data.y[static_cast<std::size_t>(i)]) {
        eps += w[static_cast<std::size_t>(i)];
      }
    }

    if (eps >= 0.5) {
      // A hypothesis no better than chance contributes nothing; keep
      // the round with zero vote so training stays deterministic.
      round.alpha = 0.0;
      rounds.push_back(std::move(round));
      continue;
    }
    const double bounded = std::max(eps, kEpsFloor);
    round.alpha =
        params.learning_rate * 0.5 * std::log((1.0 - bounded) / bounded);
    const double alpha = round.alpha;
    rounds.push_back(std::move(round));

    if (eps <= kEpsFloor) break;  // already perfect on the weighted set

    double total = 0.0;
    for (int i = 0; i < data.n; ++i) {
      const double agree =
          h[static_cast<std::size_t>(i)] == data.y[static_cast<std::size_t>(i)]
              ? 1.0
              : -1.0;
      w[static_cast<std::size_t>(i)] *= std::exp(-alpha * agree);
      total += w[static_cast<std::size_t>(i)];
    }
    for (double& v : w) v /= total;
  }

  return std::make_unique<RusBoostModel>(std::move(rounds), data.d, params, seed);
}

Prediction RusBoostModel::predict(std::span<const double> features) const {
  if (static_cast<int>(features.size()) != dimension_) {
    throw DataError("feature dimension mismatch: got " +
                    std::to_string(features.size()) + ", expected " +
                    std::to_string(dimension_));
  }
  double vote = 0.0;
  double total = 0.0;
  for (const Round& round : rounds_) {
    const double h = round.tree.leaf_for(features).leaf_label == 1 ? 1.0 : -1.0;
    vote += round.alpha * h;
    total += round.alpha;
  }
  const double raw = total > 0.0 ? vote / total : 0.0;
  const Label label = raw >= 0.0 ? Label::kNonHealthy : Label::kHealthy;
  return {label, (raw + 1.0) / 2.0};
}

nlohmann::json RusBoostModel::params_to_json() const {
  nlohmann::json rounds = nlohmann::json::array();
  for (const Round& r : rounds_) {
    rounds.push_back({{"alpha", r.alpha}, {"tree", tree_to_json(r.tree)}});
  }
  return {{"dimension", dimension_}, {"rounds", std::move(rounds)}};
}

std::unique_ptr<RusBoostModel> RusBoostModel::from_json(const nlohmann::json& j) {
  const auto& p = j.at("hyperparameters");
  RusBoostParams params;
  params.rounds = p.at("rounds").get<int>();
  params.learning_rate = p.at("learning_rate").get<double>();
  params.max_depth = p.at("max_depth").get<int>();
  std::vector<Round> rounds;
  for (const auto& r : j.at("parameters").at("rounds")) {
    rounds.push_back({tree_from_json(r.at("tree")), r.at("alpha").get<double>()});
  }
  return std::make_unique<RusBoostModel>(
      std::move(rounds), j.at("parameters").at("dimension").get<int>(), params,
      j.at("seed").get<std::uint64_t>());
}

}  // namespace eitvent
