#pragma once

#include <vector>

#include "eitvent/classifiers/common.hpp"

namespace eitvent {

/// Soft-margin RBF-kernel classifier trained by sequential pairwise
/// optimization (SMO) to KKT tolerance 1e-3. Features are standardized
/// with training-split statistics before the kernel is applied.
class SvmRbfModel final : public Model {
 public:
  struct TrainInfo {
    int passes = 0;
    bool converged = false;
    /// Largest margin-condition violation over all training points at
    /// the returned solution.
    double max_kkt_violation = 0.0;
    /// Final multipliers for every training row, box order preserved.
    std::vector<double> alphas;
  };

  SvmRbfModel(std::vector<double> feat_mean, std::vector<double> feat_scale,
              std::vector<std::vector<double>> support_vectors,
              std::vector<double> coefficients, double bias, SvmParams params,
              std::uint64_t seed)
      : feat_mean_(std::move(feat_mean)), feat_scale_(std::move(feat_scale)),
        support_vectors_(std::move(support_vectors)),
        coefficients_(std::move(coefficients)), bias_(bias), params_(params),
        seed_(seed) {}

  static std::unique_ptr<SvmRbfModel> train(const TrainingSet& data,
                                            const SvmParams& params,
                                            std::uint64_t seed,
                                            TrainInfo* info = nullptr);

  ClassifierKind kind() const override { return ClassifierKind::kSvmRbf; }
  int dimension() const override { return static_cast<int>(feat_mean_.size()); }
  Prediction predict(std::span<const double> features) const override;
  Hyperparams hyperparams() const override { return params_; }
  std::uint64_t seed() const override { return seed_; }
  nlohmann::json params_to_json() const override;
  static std::unique_ptr<SvmRbfModel> from_json(const nlohmann::json& j);

  std::size_t support_vector_count() const { return support_vectors_.size(); }

 private:
  std::vector<double> feat_mean_;
  std::vector<double> feat_scale_;
  std::vector<std::vector<double>> support_vectors_;  // standardized
  std::vector<double> coefficients_;                  // alpha_i * y_i
  double bias_;
  SvmParams params_;
  std::uint64_t seed_;
};

}  // namespace eitvent
