#pragma once

#include <vector>

#include "eitvent/classifiers/common.hpp"

namespace eitvent {

/// Linear discriminant analysis: class-conditional Gaussians with a
/// shared covariance shrunk toward a scaled identity. The decision
/// function reduces to an affine score.
class LdaModel final : public Model {
 public:
  LdaModel(std::vector<double> weights, double bias, double shrinkage_used,
           LdaParams params, std::uint64_t seed)
      : weights_(std::move(weights)), bias_(bias),
        shrinkage_used_(shrinkage_used), params_(params), seed_(seed) {}

  static std::unique_ptr<LdaModel> train(const TrainingSet& data,
                                         const LdaParams& params,
                                         std::uint64_t seed);

  ClassifierKind kind() const override { return ClassifierKind::kLda; }
  int dimension() const override { return static_cast<int>(weights_.size()); }
  Prediction predict(std::span<const double> features) const override;
  Hyperparams hyperparams() const override { return params_; }
  std::uint64_t seed() const override { return seed_; }
  nlohmann::json params_to_json() const override;
  static std::unique_ptr<LdaModel> from_json(const nlohmann::json& j);

  double shrinkage_used() const { return shrinkage_used_; }

 private:
  std::vector<double> weights_;  // discriminant difference (NH minus H)
  double bias_;
  double shrinkage_used_;
  LdaParams params_;
  std::uint64_t seed_;
};

}  // namespace eitvent
