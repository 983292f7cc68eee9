#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "eitvent/manifest.hpp"

namespace eitvent {

/// Dense, fully-imputed training data. Row-major.
struct TrainingSet {
  int n = 0;
  int d = 0;
  std::vector<double> x;        // n * d
  std::vector<std::uint8_t> y;  // 0 healthy, 1 non-healthy
  std::vector<std::string> feature_names;  // size d, or empty

  double at(int i, int j) const {
    return x[static_cast<std::size_t>(i) * static_cast<std::size_t>(d) +
             static_cast<std::size_t>(j)];
  }
  std::span<const double> row(int i) const {
    return {x.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(d),
            static_cast<std::size_t>(d)};
  }
  int count(Label label) const;

  /// Throws DataError on shape mismatches, non-finite values or a
  /// single-class label vector.
  void validate() const;
};

enum class ClassifierKind : std::uint8_t {
  kLda = 0,
  kDecisionTree,
  kRandomForest,
  kRusBoost,
  kSvmRbf,
};

inline constexpr std::array<ClassifierKind, 5> kAllClassifierKinds = {
    ClassifierKind::kLda, ClassifierKind::kDecisionTree,
    ClassifierKind::kRandomForest, ClassifierKind::kRusBoost,
    ClassifierKind::kSvmRbf};

const char* kind_name(ClassifierKind kind);  // LDA, DecisionTree, RndForest, ...
ClassifierKind parse_kind(std::string_view token);

struct LdaParams {
  double shrinkage = 0.1;  // covariance shrinkage toward scaled identity
};
struct TreeParams {
  int max_depth = 10;
  int min_leaf = 1;
};
struct ForestParams {
  int n_trees = 100;
  int mtry = 0;  // features per split; 0 selects ceil(sqrt(d))
  int min_leaf = 1;
};
struct RusBoostParams {
  int rounds = 60;
  double learning_rate = 0.3;
  int max_depth = 3;
};
struct SvmParams {
  double c = 1.0;
  double gamma = 0.1;
};

using Hyperparams =
    std::variant<LdaParams, TreeParams, ForestParams, RusBoostParams, SvmParams>;

ClassifierKind kind_of(const Hyperparams& params);
Hyperparams default_hyperparams(ClassifierKind kind);
nlohmann::json hyperparams_to_json(const Hyperparams& params);
Hyperparams hyperparams_from_json(ClassifierKind kind, const nlohmann::json& j);

struct Prediction {
  Label label = Label::kHealthy;
  double score = 0.0;  // larger means more non-healthy
};

/// A trained classifier. Immutable; predict is pure.
class Model {
 public:
  virtual ~Model() = default;
  virtual ClassifierKind kind() const = 0;
  virtual int dimension() const = 0;
  virtual Prediction predict(std::span<const double> features) const = 0;
  virtual Hyperparams hyperparams() const = 0;
  virtual std::uint64_t seed() const = 0;
  virtual nlohmann::json params_to_json() const = 0;

  Label predict_label(std::span<const double> features) const {
    return predict(features).label;
  }
};

/// Deterministic training: (kind via params, data, params, seed) fully
/// determine the model.
std::unique_ptr<Model> train(const TrainingSet& data, const Hyperparams& params,
                             std::uint64_t seed);

/// Split-based importance for tree-backed models: per tree, the summed
/// risk reduction of every split on each feature divided by the tree's
/// branch-node count; ensemble value is the mean over trees. Throws
/// DataError for non-tree models.
std::vector<double> predictor_importance(const Model& model);

inline constexpr int kModelSchemaVersion = 1;

void save_model(const Model& model, const std::filesystem::path& path,
                std::uint64_t catalog_hash);
std::unique_ptr<Model> load_model(const std::filesystem::path& path,
                                  std::uint64_t* catalog_hash = nullptr);

}  // namespace eitvent
