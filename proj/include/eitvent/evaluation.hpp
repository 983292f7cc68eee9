#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "eitvent/classifiers/common.hpp"
#include "eitvent/dataset.hpp"

namespace eitvent {

/// A: sample-wise stratified hold-out. B: patient-wise hold-out, where
/// no subject's samples appear on both sides of the split.
enum class Scenario : std::uint8_t { kA = 0, kB = 1 };

const char* scenario_name(Scenario scenario);
Scenario parse_scenario(std::string_view token);

struct SplitPlan {
  Scenario scenario = Scenario::kA;
  std::uint64_t seed = 0;
  std::vector<int> train_idx;
  std::vector<int> validation_idx;
  std::vector<int> test_idx;
};

/// Scenario A: 25% of samples to test, stratified by class; validation
/// is a stratified 25% of the remaining training partition. Scenario B:
/// whole subjects to test (at least a quarter of each class's subjects,
/// and at least 25% of all samples); validation likewise draws whole
/// subjects from the training partition. Throws DataError when the
/// constraints are infeasible.
SplitPlan plan_split(const FeatureDataset& dataset, Scenario scenario,
                     std::uint64_t seed);

struct MetricsRow {
  double accuracy = 0.0;
  double f1_h = 0.0;
  double recall_h = 0.0;
  double precision_h = 0.0;
  double specificity_h = 0.0;
  double f1_nh = 0.0;
  double recall_nh = 0.0;
  double precision_nh = 0.0;
  double specificity_nh = 0.0;
};

/// Standard per-class confusion-matrix metrics; F1 is the harmonic
/// mean of precision and recall. Truths must contain both classes.
MetricsRow compute_metrics(std::span<const Label> predictions,
                           std::span<const Label> truths);

/// Per-feature medians over the given rows, ignoring missing values.
std::vector<double> train_medians(const FeatureDataset& dataset,
                                  std::span<const int> rows);

/// Dense matrix over the given rows with missing entries replaced by
/// the supplied imputation values.
TrainingSet build_training_set(const FeatureDataset& dataset,
                               std::span<const int> rows,
                               std::span<const double> imputation);

struct EvaluationConfig {
  std::vector<Scenario> scenarios = {Scenario::kA, Scenario::kB};
  std::vector<ClassifierKind> classifiers{kAllClassifierKinds.begin(),
                                          kAllClassifierKinds.end()};
  int runs = 50;
  std::uint64_t master_seed = 1;
  int budget = 30;
  int jobs = 1;  // parallel runs; does not influence results
};

struct RunRecord {
  int run = 0;
  std::uint64_t split_seed = 0;
  Hyperparams chosen;
  int best_trial = -1;
  double validation_accuracy = 0.0;
  MetricsRow metrics;
  std::vector<double> importance;  // tree-backed kinds only
};

struct ClassifierScenarioResult {
  ClassifierKind kind = ClassifierKind::kLda;
  Scenario scenario = Scenario::kA;
  std::vector<RunRecord> runs;
  MetricsRow mean;
  MetricsRow stddev;  // sample standard deviation over runs
  std::vector<double> importance_mean;  // empty for non-tree kinds
};

struct DatasetSummary {
  int n_samples = 0;
  int n_features = 0;
  int n_subjects = 0;
  int n_healthy_samples = 0;
  int n_nonhealthy_samples = 0;
};

struct EvaluationReport {
  EvaluationConfig config;
  DatasetSummary dataset;
  std::vector<std::string> feature_names;
  std::vector<std::string> notes;
  std::vector<ClassifierScenarioResult> results;  // scenario-major order
};

inline constexpr int kReportSchemaVersion = 1;

/// Repeated hold-out evaluation: per run, plan a split, impute from the
/// training partition, random-search hyperparameters on the validation
/// split, refit the winner on train+validation and score the test set.
/// Runs are independent seeded tasks merged by index, so the report is
/// identical for any jobs count.
EvaluationReport run_experiment(const FeatureDataset& dataset,
                                const EvaluationConfig& config);

nlohmann::json report_to_json(const EvaluationReport& report);
void write_report_json(const EvaluationReport& report,
                       const std::filesystem::path& path);

/// One row per classifier, metrics as "mean±std" percentages with one
/// decimal, matching the published table layout.
std::string summary_csv(const EvaluationReport& report, Scenario scenario);
void write_summary_csv(const EvaluationReport& report, Scenario scenario,
                       const std::filesystem::path& path);

/// Top-k features per scenario for one tree-backed classifier.
std::string importance_csv_from_report(const nlohmann::json& report_json,
                                       std::string_view classifier, int top_k);

struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::vector<double> outliers;  // outside 1.5 * IQR of the hinges
};

/// Tukey five-number summary (median-of-halves hinges).
BoxStats box_stats(std::vector<double> values);

/// Per-class distribution rows for the named features, for external
/// box plotting.
std::string distributions_csv(const FeatureDataset& dataset,
                              std::span<const std::string> names);
void write_distributions_csv(const FeatureDataset& dataset,
                             std::span<const std::string> names,
                             const std::filesystem::path& path);

}  // namespace eitvent
