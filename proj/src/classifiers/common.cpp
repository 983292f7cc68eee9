#include "eitvent/classifiers/common.hpp"

#include <cmath>

#include "eitvent/classifiers/decision_tree.hpp"
#include "eitvent/classifiers/lda.hpp"
#include "eitvent/classifiers/random_forest.hpp"
#include "eitvent/classifiers/rusboost.hpp"
#include "eitvent/classifiers/svm_rbf.hpp"
#include "eitvent/errors.hpp"
#include "eitvent/util.hpp"

namespace eitvent {

int TrainingSet::count(Label label) const {
  int c = 0;
  for (const auto v : y) {
    if (v == static_cast<std::uint8_t>(label)) ++c;
  }
  return c;
}

void TrainingSet::validate() const {
  if (n < 2 || d < 1) {
    throw DataError("training set needs at least 2 samples and 1 feature");
  }
  if (x.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(d) ||
      y.size() != static_cast<std::size_t>(n)) {
    throw DataError("training set shape mismatch");
  }
  for (const double v : x) {
    if (!std::isfinite(v)) {
      throw DataError("training set contains non-finite values; impute first");
    }
  }
  const int n1 = count(Label::kNonHealthy);
  if (n1 == 0 || n1 == n) {
    throw DataError("training set is single-class; both classes are required");
  }
}

const char* kind_name(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kLda: return "LDA";
    case ClassifierKind::kDecisionTree: return "DecisionTree";
    case ClassifierKind::kRandomForest: return "RndForest";
    case ClassifierKind::kRusBoost: return "RUSBoost";
    case ClassifierKind::kSvmRbf: return "SVMrbf";
  }
  return "?";
}

ClassifierKind parse_kind(std::string_view token) {
  const std::string t = to_lower(token);
  if (t == "lda") return ClassifierKind::kLda;
  if (t == "decisiontree" || t == "dectree") return ClassifierKind::kDecisionTree;
  if (t == "rndforest" || t == "randomforest") return ClassifierKind::kRandomForest;
  if (t == "rusboost") return ClassifierKind::kRusBoost;
  if (t == "svmrbf" || t == "svm") return ClassifierKind::kSvmRbf;
  throw DataError("unknown classifier '" + std::string(token) + "'");
}

ClassifierKind kind_of(const Hyperparams& params) {
  return std::visit(
      [](const auto& p) -> ClassifierKind {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LdaParams>) return ClassifierKind::kLda;
        if constexpr (std::is_same_v<T, TreeParams>) {
          return ClassifierKind::kDecisionTree;
        }
        if constexpr (std::is_same_v<T, ForestParams>) {
          return ClassifierKind::kRandomForest;
        }
        if constexpr (std::is_same_v<T, RusBoostParams>) {
          return ClassifierKind::kRusBoost;
        }
        if constexpr (std::is_same_v<T, SvmParams>) return ClassifierKind::kSvmRbf;
      },
      params);
}

Hyperparams default_hyperparams(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kLda: return LdaParams{};
    case ClassifierKind::kDecisionTree: return TreeParams{};
    case ClassifierKind::kRandomForest: return ForestParams{};
    case ClassifierKind::kRusBoost: return RusBoostParams{};
    case ClassifierKind::kSvmRbf: return SvmParams{};
  }
  throw DataError("unknown classifier kind");
}

nlohmann::json hyperparams_to_json(const Hyperparams& params) {
  return std::visit(
      [](const auto& p) -> nlohmann::json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LdaParams>) {
          return {{"shrinkage", p.shrinkage}};
        }
        if constexpr (std::is_same_v<T, TreeParams>) {
          return {{"max_depth", p.max_depth}, {"min_leaf", p.min_leaf}};
        }
        if constexpr (std::is_same_v<T, ForestParams>) {
          return {{"n_trees", p.n_trees},
                  {"mtry", p.mtry},
                  {"min_leaf", p.min_leaf}};
        }
        if constexpr (std::is_same_v<T, RusBoostParams>) {
          return {{"rounds", p.rounds},
                  {"learning_rate", p.learning_rate},
                  {"max_depth", p.max_depth}};
        }
        if constexpr (std::is_same_v<T, SvmParams>) {
          return {{"C", p.c}, {"gamma", p.gamma}};
        }
      },
      params);
}

Hyperparams hyperparams_from_json(ClassifierKind kind, const nlohmann::json& j) {
  switch (kind) {
    case ClassifierKind::kLda: {
      LdaParams p;
      p.shrinkage = j.at("shrinkage").get<double>();
      return p;
    }
    case ClassifierKind::kDecisionTree: {
      TreeParams p;
      p.max_depth = j.at("max_depth").get<int>();
      p.min_leaf = j.at("min_leaf").get<int>();
      return p;
    }
    case ClassifierKind::kRandomForest: {
      ForestParams p;
      p.n_trees = j.at("n_trees").get<int>();
      p.mtry = j.at("mtry").get<int>();
      p.min_leaf = j.at("min_leaf").get<int>();
      return p;
    }
    case ClassifierKind::kRusBoost: {
      RusBoostParams p;
      p.rounds = j.at("rounds").get<int>();
      p.learning_rate = j.at("learning_rate").get<double>();
      p.max_depth = j.at("max_depth").get<int>();
      return p;
    }
    case ClassifierKind::kSvmRbf: {
      SvmParams p;
      p.c = j.at("C").get<double>();
      p.gamma = j.at("gamma").get<double>();
      return p;
    }
  }
  throw DataError("unknown classifier kind");
}

std::unique_ptr<Model> train(const TrainingSet& data, const Hyperparams& params,
                             std::uint64_t seed) {
  switch (kind_of(params)) {
    case ClassifierKind::kLda:
      return LdaModel::train(data, std::get<LdaParams>(params), seed);
    case ClassifierKind::kDecisionTree:
      return DecisionTreeModel::train(data, std::get<TreeParams>(params), seed);
    case ClassifierKind::kRandomForest:
      return RandomForestModel::train(data, std::get<ForestParams>(params), seed);
    case ClassifierKind::kRusBoost:
      return RusBoostModel::train(data, std::get<RusBoostParams>(params), seed);
    case ClassifierKind::kSvmRbf:
      return SvmRbfModel::train(data, std::get<SvmParams>(params), seed);
  }
  throw DataError("unknown classifier kind");
}

std::vector<double> predictor_importance(const Model& model) {
  const int d = model.dimension();
  std::vector<const Tree*> trees;
  if (const auto* m = dynamic_cast<const DecisionTreeModel*>(&model)) {
    trees.push_back(&m->tree());
  } else if (const auto* m = dynamic_cast<const RandomForestModel*>(&model)) {
    for (const Tree& t : m->trees()) trees.push_back(&t);
  } else if (const auto* m = dynamic_cast<const RusBoostModel*>(&model)) {
    for (const auto& r : m->rounds()) trees.push_back(&r.tree);
  } else {
    throw DataError(std::string("predictor importance requires a tree-based "
                                "model, got ") +
                    kind_name(model.kind()));
  }
  std::vector<double> importance(static_cast<std::size_t>(d), 0.0);
  for (const Tree* tree : trees) {
    const std::vector<double> imp = tree->importance(d);
    for (int j = 0; j < d; ++j) {
      importance[static_cast<std::size_t>(j)] += imp[static_cast<std::size_t>(j)];
    }
  }
  for (double& v : importance) v /= static_cast<double>(trees.size());
  return importance;
}

void save_model(const Model& model, const std::filesystem::path& path,
                std::uint64_t catalog_hash) {
  nlohmann::json doc;
  doc["schema_version"] = kModelSchemaVersion;
  doc["kind"] = kind_name(model.kind());
  doc["seed"] = model.seed();
  doc["catalog_hash"] = catalog_hash;
  doc["hyperparameters"] = hyperparams_to_json(model.hyperparams());
  doc["parameters"] = model.params_to_json();
  atomic_write_file(path, doc.dump(2) + "\n");
}

std::unique_ptr<Model> load_model(const std::filesystem::path& path,
                                  std::uint64_t* catalog_hash) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": invalid model JSON: " + e.what());
  }
  try {
    if (doc.at("schema_version").get<int>() != kModelSchemaVersion) {
      throw FormatError(path.string() + ": unsupported model schema version");
    }
    if (catalog_hash != nullptr) {
      *catalog_hash = doc.at("catalog_hash").get<std::uint64_t>();
    }
    const ClassifierKind kind = parse_kind(doc.at("kind").get<std::string>());
    switch (kind) {
      case ClassifierKind::kLda: return LdaModel::from_json(doc);
      case ClassifierKind::kDecisionTree: return DecisionTreeModel::from_json(doc);
      case ClassifierKind::kRandomForest: return RandomForestModel::from_json(doc);
      case ClassifierKind::kRusBoost: return RusBoostModel::from_json(doc);
      case ClassifierKind::kSvmRbf: return SvmRbfModel::from_json(doc);
    }
    throw FormatError(path.string() + ": unknown model kind");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed model document: " + e.what());
  }
}

}  // namespace eitvent
