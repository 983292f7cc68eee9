#include "eitvent/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "eitvent/classifiers/search.hpp"
#include "eitvent/errors.hpp"
#include "eitvent/rng.hpp"
#include "eitvent/util.hpp"

namespace eitvent {

const char* scenario_name(Scenario scenario) {
  return scenario == Scenario::kA ? "A" : "B";
}

Scenario parse_scenario(std::string_view token) {
  const std::string t = to_lower(token);
  if (t == "a") return Scenario::kA;
  if (t == "b") return Scenario::kB;
  throw DataError("unknown scenario '" + std::string(token) + "' (use A or B)");
}

namespace {

/// Distributes `total` over groups proportionally to `sizes` (largest
/// remainder method). Guarantees |quota_g - sizes_g * total / n| < 1.
std::vector<int> proportional_quota(const std::vector<int>& sizes, int total) {
  const long long n = std::accumulate(sizes.begin(), sizes.end(), 0LL);
  std::vector<int> quota(sizes.size(), 0);
  if (n == 0 || total <= 0) return quota;
  std::vector<std::pair<long long, std::size_t>> remainders;
  long long assigned = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const long long num = static_cast<long long>(sizes[g]) * total;
    quota[g] = static_cast<int>(num / n);
    assigned += quota[g];
    remainders.emplace_back(num % n, g);
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t k = 0; assigned < total && k < remainders.size(); ++k) {
    ++quota[remainders[k].second];
    ++assigned;
  }
  return quota;
}

SplitPlan plan_split_a(const FeatureDataset& dataset, std::uint64_t seed) {
  std::vector<int> by_class[2];
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    by_class[static_cast<int>(dataset.samples[i].label)].push_back(
        static_cast<int>(i));
  }
  if (by_class[0].size() < 8 || by_class[1].size() < 8) {
    throw DataError("scenario A needs at least 8 samples per class");
  }
  Rng rng(mix_seed(seed, 0xA11u));
  rng.shuffle(by_class[0]);
  rng.shuffle(by_class[1]);

  const int n = static_cast<int>(dataset.samples.size());
  const std::vector<int> sizes = {static_cast<int>(by_class[0].size()),
                                  static_cast<int>(by_class[1].size())};
  const std::vector<int> test_quota = proportional_quota(sizes, n / 4);

  SplitPlan plan;
  plan.scenario = Scenario::kA;
  plan.seed = seed;
  std::vector<int> pool[2];
  for (int c = 0; c < 2; ++c) {
    auto& cls = by_class[c];
    plan.test_idx.insert(plan.test_idx.end(), cls.begin(),
                         cls.begin() + test_quota[static_cast<std::size_t>(c)]);
    pool[c].assign(cls.begin() + test_quota[static_cast<std::size_t>(c)],
                   cls.end());
  }
  const int train_partition =
      static_cast<int>(pool[0].size() + pool[1].size());
  const std::vector<int> pool_sizes = {static_cast<int>(pool[0].size()),
                                       static_cast<int>(pool[1].size())};
  const std::vector<int> val_quota =
      proportional_quota(pool_sizes, train_partition / 4);
  for (int c = 0; c < 2; ++c) {
    plan.validation_idx.insert(
        plan.validation_idx.end(), pool[c].begin(),
        pool[c].begin() + val_quota[static_cast<std::size_t>(c)]);
    plan.train_idx.insert(plan.train_idx.end(),
                          pool[c].begin() + val_quota[static_cast<std::size_t>(c)],
                          pool[c].end());
  }
  std::sort(plan.test_idx.begin(), plan.test_idx.end());
  std::sort(plan.validation_idx.begin(), plan.validation_idx.end());
  std::sort(plan.train_idx.begin(), plan.train_idx.end());
  return plan;
}

struct SubjectPool {
  std::vector<std::string> ids;           // shuffled
  std::vector<int> sample_counts;         // aligned with ids
  std::size_t cursor = 0;                 // next subject to hand out
};

SplitPlan plan_split_b(const FeatureDataset& dataset, std::uint64_t seed) {
  std::map<std::string, std::vector<int>> samples_by_subject;
  std::map<std::string, Label> label_by_subject;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const auto& s = dataset.samples[i];
    samples_by_subject[s.subject_id].push_back(static_cast<int>(i));
    label_by_subject[s.subject_id] = s.label;
  }

  SubjectPool pools[2];
  for (const auto& [id, rows] : samples_by_subject) {
    const int c = static_cast<int>(label_by_subject[id]);
    pools[c].ids.push_back(id);
    pools[c].sample_counts.push_back(static_cast<int>(rows.size()));
  }
  if (pools[0].ids.size() < 2 || pools[1].ids.size() < 2) {
    throw DataError("scenario B needs at least 2 subjects per class");
  }
  Rng rng(mix_seed(seed, 0xB22u));
  for (int c = 0; c < 2; ++c) {
    // The map iteration above is id-sorted; shuffle indices and apply.
    std::vector<std::size_t> order(pools[c].ids.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    rng.shuffle(order);
    SubjectPool shuffled;
    for (const std::size_t k : order) {
      shuffled.ids.push_back(pools[c].ids[k]);
      shuffled.sample_counts.push_back(pools[c].sample_counts[k]);
    }
    pools[c] = std::move(shuffled);
  }

  const int total_samples = static_cast<int>(dataset.samples.size());

  std::set<std::string> test_subjects;
  int test_samples = 0;
  int test_subject_count[2] = {0, 0};
  auto take_from = [&](int c) {
    SubjectPool& pool = pools[c];
    test_subjects.insert(pool.ids[pool.cursor]);
    test_samples += pool.sample_counts[pool.cursor];
    ++pool.cursor;
    ++test_subject_count[c];
  };
  // Per-class floor: at least a quarter of each class's subjects, and
  // always at least one so both classes appear in every test set.
  for (int c = 0; c < 2; ++c) {
    const int n_subj = static_cast<int>(pools[c].ids.size());
    const int quota = std::max(1, (n_subj + 3) / 4);
    while (test_subject_count[c] < quota) take_from(c);
  }
  // Sample-count floor: at least 25% of all samples. Keep at least one
  // subject per class for the training side.
  while (static_cast<long long>(test_samples) * 4 < total_samples) {
    int pick = -1;
    double best_fraction = 2.0;
    for (int c = 0; c < 2; ++c) {
      if (pools[c].cursor + 1 >= pools[c].ids.size()) continue;  // keep one
      const double fraction = static_cast<double>(test_subject_count[c]) /
                              static_cast<double>(pools[c].ids.size());
      if (fraction < best_fraction) {
        best_fraction = fraction;
        pick = c;
      }
    }
    if (pick < 0) {
      throw DataError("scenario B split infeasible: test-sample quota cannot "
                      "be met while keeping a training subject per class");
    }
    take_from(pick);
  }

  // Validation: whole subjects from the training partition, about a
  // quarter of its samples, leaving at least one training subject per
  // class. With very small cohorts the validation set may be empty.
  int train_partition_samples = 0;
  for (int c = 0; c < 2; ++c) {
    for (std::size_t k = pools[c].cursor; k < pools[c].ids.size(); ++k) {
      train_partition_samples += pools[c].sample_counts[k];
    }
  }
  std::set<std::string> val_subjects;
  int val_samples = 0;
  int val_subject_count[2] = {0, 0};
  const int val_target = train_partition_samples / 4;
  while (val_samples < val_target) {
    int pick = -1;
    double best_fraction = 2.0;
    for (int c = 0; c < 2; ++c) {
      if (pools[c].cursor + 1 >= pools[c].ids.size()) continue;
      const double fraction =
          static_cast<double>(val_subject_count[c]) /
          static_cast<double>(pools[c].ids.size() - pools[c].cursor +
                              val_subject_count[c]);
      if (fraction < best_fraction) {
        best_fraction = fraction;
        pick = c;
      }
    }
    if (pick < 0) break;
    SubjectPool& pool = pools[pick];
    val_subjects.insert(pool.ids[pool.cursor]);
    val_samples += pool.sample_counts[pool.cursor];
    ++pool.cursor;
    ++val_subject_count[pick];
  }

  SplitPlan plan;
  plan.scenario = Scenario::kB;
  plan.seed = seed;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const std::string& id = dataset.samples[i].subject_id;
    if (test_subjects.count(id) > 0) {
      plan.test_idx.push_back(static_cast<int>(i));
    } else if (val_subjects.count(id) > 0) {
      plan.validation_idx.push_back(static_cast<int>(i));
    } else {
      plan.train_idx.push_back(static_cast<int>(i));
    }
  }
  return plan;
}

}  // namespace

SplitPlan plan_split(const FeatureDataset& dataset, Scenario scenario,
                     std::uint64_t seed) {
  if (dataset.samples.empty()) throw DataError("cannot split an empty dataset");
  return scenario == Scenario::kA ? plan_split_a(dataset, seed)
                                  : plan_split_b(dataset, seed);
}

MetricsRow compute_metrics(std::span<const Label> predictions,
                           std::span<const Label> truths) {
  if (predictions.size() != truths.size() || truths.empty()) {
    throw DataError("predictions and truths must align and be non-empty");
  }
  int tp_h = 0;
  int fp_h = 0;
  int fn_h = 0;
  int tn_h = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const bool truth_h = truths[i] == Label::kHealthy;
    const bool pred_h = predictions[i] == Label::kHealthy;
    if (truth_h && pred_h) ++tp_h;
    if (!truth_h && pred_h) ++fp_h;
    if (truth_h && !pred_h) ++fn_h;
    if (!truth_h && !pred_h) ++tn_h;
  }
  if (tp_h + fn_h == 0 || fp_h + tn_h == 0) {
    throw DataError("metrics need both classes present in the truth vector");
  }
  const auto ratio = [](int num, int den) {
    return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
  };
  const auto f1 = [](double precision, double recall) {
    const double s = precision + recall;
    return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
  };

  MetricsRow row;
  row.accuracy = ratio(tp_h + tn_h, tp_h + tn_h + fp_h + fn_h);
  row.precision_h = ratio(tp_h, tp_h + fp_h);
  row.recall_h = ratio(tp_h, tp_h + fn_h);
  row.specificity_h = ratio(tn_h, tn_h + fp_h);
  row.f1_h = f1(row.precision_h, row.recall_h);
  // Non-healthy as positive: the confusion matrix transposes.
  row.precision_nh = ratio(tn_h, tn_h + fn_h);
  row.recall_nh = ratio(tn_h, tn_h + fp_h);
  row.specificity_nh = ratio(tp_h, tp_h + fn_h);
  row.f1_nh = f1(row.precision_nh, row.recall_nh);
  return row;
}

std::vector<double> train_medians(const FeatureDataset& dataset,
                                  std::span<const int> rows) {
  std::vector<double> medians(dataset.n_features(), 0.0);
  std::vector<double> column;
  for (std::size_t j = 0; j < dataset.n_features(); ++j) {
    column.clear();
    for (const int i : rows) {
      const double v =
          dataset.samples[static_cast<std::size_t>(i)].features.values[j];
      if (!is_missing(v)) column.push_back(v);
    }
    if (column.empty()) {
      medians[j] = 0.0;
      continue;
    }
    std::sort(column.begin(), column.end());
    const std::size_t mid = column.size() / 2;
    medians[j] = column.size() % 2 == 1
                     ? column[mid]
                     : (column[mid - 1] + column[mid]) / 2.0;
  }
  return medians;
}

TrainingSet build_training_set(const FeatureDataset& dataset,
                               std::span<const int> rows,
                               std::span<const double> imputation) {
  TrainingSet set;
  set.n = static_cast<int>(rows.size());
  set.d = static_cast<int>(dataset.n_features());
  set.feature_names = dataset.feature_names;
  set.x.resize(static_cast<std::size_t>(set.n) * static_cast<std::size_t>(set.d));
  set.y.resize(static_cast<std::size_t>(set.n));
  for (int i = 0; i < set.n; ++i) {
    const Sample& s =
        dataset.samples[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])];
    set.y[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(s.label);
    for (int j = 0; j < set.d; ++j) {
      const double v = s.features.values[static_cast<std::size_t>(j)];
      set.x[static_cast<std::size_t>(i) * static_cast<std::size_t>(set.d) +
            static_cast<std::size_t>(j)] =
          is_missing(v) ? imputation[static_cast<std::size_t>(j)] : v;
    }
  }
  return set;
}

namespace {

constexpr std::array<std::pair<const char*, double MetricsRow::*>, 9>
    kMetricFields = {{{"accuracy", &MetricsRow::accuracy},
                      {"f1_h", &MetricsRow::f1_h},
                      {"recall_h", &MetricsRow::recall_h},
                      {"precision_h", &MetricsRow::precision_h},
                      {"specificity_h", &MetricsRow::specificity_h},
                      {"f1_nh", &MetricsRow::f1_nh},
                      {"recall_nh", &MetricsRow::recall_nh},
                      {"precision_nh", &MetricsRow::precision_nh},
                      {"specificity_nh", &MetricsRow::specificity_nh}}};

struct RunOutput {
  std::vector<RunRecord> per_classifier;  // aligned with config.classifiers
  std::string error;
};

RunOutput execute_run(const FeatureDataset& dataset,
                      const EvaluationConfig& config, Scenario scenario,
                      int run) {
  RunOutput out;
  const std::uint64_t split_seed =
      mix_seed(config.master_seed, static_cast<std::uint64_t>(scenario),
               static_cast<std::uint64_t>(run));
  const SplitPlan plan = plan_split(dataset, scenario, split_seed);

  std::vector<int> train_plus_val = plan.train_idx;
  train_plus_val.insert(train_plus_val.end(), plan.validation_idx.begin(),
                        plan.validation_idx.end());
  std::sort(train_plus_val.begin(), train_plus_val.end());

  const std::vector<double> medians = train_medians(dataset, train_plus_val);
  const TrainingSet train_set = build_training_set(dataset, plan.train_idx, medians);
  const TrainingSet val_set =
      build_training_set(dataset, plan.validation_idx, medians);
  const TrainingSet refit_set =
      build_training_set(dataset, train_plus_val, medians);
  const TrainingSet test_set = build_training_set(dataset, plan.test_idx, medians);

  for (const ClassifierKind kind : config.classifiers) {
    RunRecord record;
    record.run = run;
    record.split_seed = split_seed;

    const std::uint64_t search_seed =
        mix_seed(split_seed, static_cast<std::uint64_t>(kind), 0x5EA7u);
    if (val_set.n > 0) {
      const SearchOutcome outcome =
          random_search(kind, train_set, val_set, config.budget, search_seed);
      record.chosen = outcome.best;
      record.best_trial = outcome.best_trial;
      record.validation_accuracy =
          outcome.trials[static_cast<std::size_t>(outcome.best_trial)]
              .validation_accuracy;
    } else {
      // Degenerate split (too few subjects for a validation set): fall
      // back to the default configuration.
      record.chosen = default_hyperparams(kind);
    }

    const std::uint64_t refit_seed =
        mix_seed(split_seed, static_cast<std::uint64_t>(kind), 0x2EF1u);
    const auto model = train(refit_set, record.chosen, refit_seed);

    std::vector<Label> predictions;
    std::vector<Label> truths;
    predictions.reserve(static_cast<std::size_t>(test_set.n));
    truths.reserve(static_cast<std::size_t>(test_set.n));
    for (int i = 0; i < test_set.n; ++i) {
      predictions.push_back(model->predict_label(test_set.row(i)));
      truths.push_back(static_cast<Label>(test_set.y[static_cast<std::size_t>(i)]));
    }
    record.metrics = compute_metrics(predictions, truths);

    if (kind == ClassifierKind::kDecisionTree ||
        kind == ClassifierKind::kRandomForest ||
        kind == ClassifierKind::kRusBoost) {
      record.importance = predictor_importance(*model);
    }
    out.per_classifier.push_back(std::move(record));
  }
  return out;
}

MetricsRow metrics_mean(const std::vector<RunRecord>& runs) {
  MetricsRow mean;
  for (const auto& [name, field] : kMetricFields) {
    (void)name;
    double sum = 0.0;
    for (const RunRecord& r : runs) sum += r.metrics.*field;
    mean.*field = sum / static_cast<double>(runs.size());
  }
  return mean;
}

MetricsRow metrics_stddev(const std::vector<RunRecord>& runs,
                          const MetricsRow& mean) {
  MetricsRow stddev;
  if (runs.size() < 2) return stddev;
  for (const auto& [name, field] : kMetricFields) {
    (void)name;
    double ss = 0.0;
    for (const RunRecord& r : runs) {
      const double d = r.metrics.*field - mean.*field;
      ss += d * d;
    }
    stddev.*field = std::sqrt(ss / static_cast<double>(runs.size() - 1));
  }
  return stddev;
}

}  // namespace

EvaluationReport run_experiment(const FeatureDataset& dataset,
                                const EvaluationConfig& config) {
  dataset.validate();
  if (config.runs < 1) throw DataError("need at least one run");
  if (config.scenarios.empty() || config.classifiers.empty()) {
    throw DataError("need at least one scenario and one classifier");
  }

  EvaluationReport report;
  report.config = config;
  report.feature_names = dataset.feature_names;
  report.dataset.n_samples = static_cast<int>(dataset.n_samples());
  report.dataset.n_features = static_cast<int>(dataset.n_features());
  report.dataset.n_subjects = static_cast<int>(dataset.subject_ids().size());
  report.dataset.n_healthy_samples =
      static_cast<int>(dataset.count_label(Label::kHealthy));
  report.dataset.n_nonhealthy_samples =
      static_cast<int>(dataset.count_label(Label::kNonHealthy));
  report.notes = {
      "hyperparameters selected by seeded uniform random search (budget " +
          std::to_string(config.budget) +
          ") on a validation split of 25% of the training partition",
      "best configuration refit on train+validation before testing",
  };

  struct TaskKey {
    std::size_t scenario_idx;
    int run;
  };
  std::vector<TaskKey> tasks;
  for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
    for (int r = 0; r < config.runs; ++r) tasks.push_back({s, r});
  }
  std::vector<RunOutput> outputs(tasks.size());

  const int n_tasks = static_cast<int>(tasks.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(config.jobs > 0 ? config.jobs : omp_get_max_threads())
#endif
  for (int t = 0; t < n_tasks; ++t) {
    const TaskKey key = tasks[static_cast<std::size_t>(t)];
    try {
      outputs[static_cast<std::size_t>(t)] = execute_run(
          dataset, config, config.scenarios[key.scenario_idx], key.run);
    } catch (const std::exception& e) {
      outputs[static_cast<std::size_t>(t)].error = e.what();
    }
  }
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (!outputs[t].error.empty()) {
      throw DataError("run " + std::to_string(tasks[t].run) + " (scenario " +
                      scenario_name(config.scenarios[tasks[t].scenario_idx]) +
                      ") failed: " + outputs[t].error);
    }
  }

  for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
    for (std::size_t k = 0; k < config.classifiers.size(); ++k) {
      ClassifierScenarioResult result;
      result.kind = config.classifiers[k];
      result.scenario = config.scenarios[s];
      for (int r = 0; r < config.runs; ++r) {
        const std::size_t task_idx = s * static_cast<std::size_t>(config.runs) +
                                     static_cast<std::size_t>(r);
        result.runs.push_back(outputs[task_idx].per_classifier[k]);
      }
      result.mean = metrics_mean(result.runs);
      result.stddev = metrics_stddev(result.runs, result.mean);
      if (!result.runs.front().importance.empty()) {
        result.importance_mean.assign(dataset.n_features(), 0.0);
        for (const RunRecord& r : result.runs) {
          for (std::size_t j = 0; j < result.importance_mean.size(); ++j) {
            result.importance_mean[j] += r.importance[j];
          }
        }
        for (double& v : result.importance_mean) {
          v /= static_cast<double>(result.runs.size());
        }
      }
      report.results.push_back(std::move(result));
    }
  }
  return report;
}

namespace {

nlohmann::json metrics_to_json(const MetricsRow& row) {
  nlohmann::json j;
  for (const auto& [name, field] : kMetricFields) j[name] = row.*field;
  return j;
}

}  // namespace

nlohmann::json report_to_json(const EvaluationReport& report) {
  nlohmann::json doc;
  doc["schema_version"] = kReportSchemaVersion;
  nlohmann::json scenarios = nlohmann::json::array();
  for (const Scenario s : report.config.scenarios) {
    scenarios.push_back(scenario_name(s));
  }
  nlohmann::json classifiers = nlohmann::json::array();
  for (const ClassifierKind k : report.config.classifiers) {
    classifiers.push_back(kind_name(k));
  }
  doc["config"] = {{"master_seed", report.config.master_seed},
                   {"runs", report.config.runs},
                   {"budget", report.config.budget},
                   {"scenarios", std::move(scenarios)},
                   {"classifiers", std::move(classifiers)}};
  doc["dataset"] = {{"n_samples", report.dataset.n_samples},
                    {"n_features", report.dataset.n_features},
                    {"n_subjects", report.dataset.n_subjects},
                    {"n_healthy_samples", report.dataset.n_healthy_samples},
                    {"n_nonhealthy_samples", report.dataset.n_nonhealthy_samples}};
  doc["notes"] = report.notes;

  nlohmann::json results = nlohmann::json::array();
  for (const ClassifierScenarioResult& result : report.results) {
    nlohmann::json entry;
    entry["classifier"] = kind_name(result.kind);
    entry["scenario"] = scenario_name(result.scenario);
    entry["metrics_mean"] = metrics_to_json(result.mean);
    entry["metrics_std"] = metrics_to_json(result.stddev);
    nlohmann::json runs = nlohmann::json::array();
    for (const RunRecord& r : result.runs) {
      runs.push_back({{"run", r.run},
                      {"split_seed", r.split_seed},
                      {"best_trial", r.best_trial},
                      {"validation_accuracy", r.validation_accuracy},
                      {"hyperparameters", hyperparams_to_json(r.chosen)},
                      {"metrics", metrics_to_json(r.metrics)}});
    }
    entry["runs"] = std::move(runs);
    if (!result.importance_mean.empty()) {
      nlohmann::json importance = nlohmann::json::array();
      for (std::size_t j = 0; j < result.importance_mean.size(); ++j) {
        importance.push_back({{"feature", report.feature_names[j]},
                              {"importance", result.importance_mean[j]}});
      }
      entry["importance_mean"] = std::move(importance);
    }
    results.push_back(std::move(entry));
  }
  doc["results"] = std::move(results);
  return doc;
}

void write_report_json(const EvaluationReport& report,
                       const std::filesystem::path& path) {
  atomic_write_file(path, report_to_json(report).dump(2) + "\n");
}

namespace {

std::string percent_pm(double mean, double stddev) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.1f±%.1f", 100.0 * mean, 100.0 * stddev);
  return buf;
}

}  // namespace

std::string summary_csv(const EvaluationReport& report, Scenario scenario) {
  std::string out =
      "Classifier,Acc,F1_H,Rec_H,Prec_H,Spec_H,F1_NH,Rec_NH,Prec_NH,Spec_NH\n";
  for (const ClassifierScenarioResult& result : report.results) {
    if (result.scenario != scenario) continue;
    out += kind_name(result.kind);
    for (const auto& [name, field] : kMetricFields) {
      (void)name;
      out += ',';
      out += percent_pm(result.mean.*field, result.stddev.*field);
    }
    out += '\n';
  }
  return out;
}

void write_summary_csv(const EvaluationReport& report, Scenario scenario,
                       const std::filesystem::path& path) {
  atomic_write_file(path, summary_csv(report, scenario));
}

std::string importance_csv_from_report(const nlohmann::json& report_json,
                                       std::string_view classifier, int top_k) {
  if (top_k < 1) throw DataError("top_k must be positive");
  struct ScenarioRanking {
    std::string scenario;
    std::vector<std::pair<std::string, double>> ranked;
  };
  std::vector<ScenarioRanking> rankings;
  try {
    for (const auto& entry : report_json.at("results")) {
      if (entry.at("classifier").get<std::string>() != classifier) continue;
      if (!entry.contains("importance_mean")) continue;
      ScenarioRanking ranking;
      ranking.scenario = entry.at("scenario").get<std::string>();
      for (const auto& item : entry.at("importance_mean")) {
        ranking.ranked.emplace_back(item.at("feature").get<std::string>(),
                                    item.at("importance").get<double>());
      }
      std::stable_sort(ranking.ranked.begin(), ranking.ranked.end(),
                       [](const auto& a, const auto& b) {
                         return a.second > b.second;
                       });
      rankings.push_back(std::move(ranking));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report JSON: ") + e.what());
  }
  if (rankings.empty()) {
    throw DataError("report contains no importance data for classifier '" +
                    std::string(classifier) + "'");
  }

  std::string out = "rank";
  for (const auto& r : rankings) {
    out += ",scenario" + r.scenario + "_feature,scenario" + r.scenario +
           "_importance";
  }
  out += '\n';
  for (int k = 0; k < top_k; ++k) {
    out += std::to_string(k + 1);
    for (const auto& r : rankings) {
      out += ',';
      if (static_cast<std::size_t>(k) < r.ranked.size()) {
        out += r.ranked[static_cast<std::size_t>(k)].first;
        out += ',';
        out += format_double(r.ranked[static_cast<std::size_t>(k)].second);
      } else {
        out += ',';
      }
    }
    out += '\n';
  }
  return out;
}

BoxStats box_stats(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](double v) { return is_missing(v); }),
               values.end());
  if (values.empty()) throw DataError("box_stats needs at least one value");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  auto median_of_range = [&](std::size_t lo, std::size_t hi) {
    const std::size_t len = hi - lo;
    const std::size_t mid = lo + len / 2;
    return len % 2 == 1 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
  };
  BoxStats stats;
  stats.min = values.front();
  stats.max = values.back();
  stats.median = median_of_range(0, n);
  // Tukey hinges: halves share the middle element when n is odd.
  const std::size_t half = n / 2;
  stats.q1 = median_of_range(0, n % 2 == 1 ? half + 1 : half);
  stats.q3 = median_of_range(half, n);
  const double iqr = stats.q3 - stats.q1;
  const double lo_fence = stats.q1 - 1.5 * iqr;
  const double hi_fence = stats.q3 + 1.5 * iqr;
  for (const double v : values) {
    if (v < lo_fence || v > hi_fence) stats.outliers.push_back(v);
  }
  return stats;
}

std::string distributions_csv(const FeatureDataset& dataset,
                              std::span<const std::string> names) {
  std::string out = "feature,class,min,q1,median,q3,max,outliers\n";
  for (const std::string& name : names) {
    const int j = dataset.feature_index(name);
    if (j < 0) throw DataError("unknown feature name '" + name + "'");
    for (const Label label : {Label::kHealthy, Label::kNonHealthy}) {
      std::vector<double> values;
      for (const Sample& s : dataset.samples) {
        if (s.label == label) {
          values.push_back(s.features.values[static_cast<std::size_t>(j)]);
        }
      }
      const BoxStats stats = box_stats(std::move(values));
      out += name;
      out += ',';
      out += label_token(label);
      for (const double v :
           {stats.min, stats.q1, stats.median, stats.q3, stats.max}) {
        out += ',';
        out += format_double(v);
      }
      out += ',';
      for (std::size_t k = 0; k < stats.outliers.size(); ++k) {
        if (k > 0) out += ';';
        out += format_double(stats.outliers[k]);
      }
      out += '\n';
    }
  }
  return out;
}

void write_distributions_csv(const FeatureDataset& dataset,
                             std::span<const std::string> names,
                             const std::filesystem::path& path) {
  atomic_write_file(path, distributions_csv(dataset, names));
}

}  // namespace eitvent
