// Compares the serial reference implementations against the
// OpenMP-parallel kernels on identical inputs and checks that the
// outputs match bit-for-bit before reporting timings.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "eitvent/classifiers/random_forest.hpp"
#include "eitvent/evaluation.hpp"
#include "eitvent/features.hpp"
#include "eitvent/pipeline.hpp"
#include "eitvent/rng.hpp"
#include "eitvent/synth.hpp"

using namespace eitvent;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

int hardware_jobs() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void report(const char* name, double serial_s, double parallel_s, int jobs,
            bool identical) {
  std::printf("%-28s serial %8.3fs  parallel(%d) %8.3fs  speedup %5.2fx  %s\n",
              name, serial_s, jobs, parallel_s,
              parallel_s > 0.0 ? serial_s / parallel_s : 0.0,
              identical ? "outputs identical" : "OUTPUTS DIFFER");
}

FeatureDataset synthetic_dataset(int n_samples, int n_features,
                                 std::uint64_t seed) {
  FeatureDataset ds;
  for (int j = 0; j < n_features; ++j) {
    ds.feature_names.push_back("f" + std::to_string(j));
  }
  Rng rng(seed);
  for (int i = 0; i < n_samples; ++i) {
    Sample s;
    s.subject_id = "s" + std::to_string(i % 24);
    s.recording_id = "r" + std::to_string(i);
    s.breath_index = 0;
    s.label = (i % 24) < 8 ? Label::kHealthy : Label::kNonHealthy;
    const double shift = s.label == Label::kHealthy ? -0.4 : 0.4;
    for (int j = 0; j < n_features; ++j) {
      s.features.values.push_back(rng.normal() + (j < 4 ? shift : 0.0));
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace

int main(int argc, char** argv) {
  const int jobs = argc > 1 ? std::atoi(argv[1]) : hardware_jobs();
  std::printf("eitvent benchmark, %d parallel job(s)\n\n", jobs);
  bool all_identical = true;

  {
    PhantomSpec spec;
    spec.tidal_cycles = 120;
    spec.deep_cycles = 120;
    spec.inhomogeneity = 0.1;
    spec.noise_level = 0.01;
    spec.seed = 7;
    const PhantomRecording recording = generate_recording(spec);
    const RoiAtlas atlas = RoiAtlas::build(spec.width, spec.height);
    const FeatureCatalog catalog = FeatureCatalog::default_catalog(atlas);

    auto t0 = std::chrono::steady_clock::now();
    const ExtractResult serial = extract_features_serial(
        recording.frames, atlas, recording.cycles, catalog);
    const double serial_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const ExtractResult parallel = extract_features(
        recording.frames, atlas, recording.cycles, catalog, {}, jobs);
    const double parallel_s = seconds_since(t0);

    bool identical = serial.vectors.size() == parallel.vectors.size();
    for (std::size_t i = 0; identical && i < serial.vectors.size(); ++i) {
      identical = serial.vectors[i].values == parallel.vectors[i].values;
    }
    all_identical = all_identical && identical;
    report("feature extraction", serial_s, parallel_s, jobs, identical);
  }

  {
    const FeatureDataset ds = synthetic_dataset(1200, 64, 11);
    const std::vector<double> medians =
        train_medians(ds, plan_split(ds, Scenario::kA, 1).train_idx);
    std::vector<int> all(ds.samples.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    const TrainingSet set = build_training_set(ds, all, medians);

    ForestParams params;
    params.n_trees = 200;

    auto t0 = std::chrono::steady_clock::now();
    const auto serial_model = RandomForestModel::train(set, params, 42, 1);
    const double serial_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const auto parallel_model = RandomForestModel::train(set, params, 42, jobs);
    const double parallel_s = seconds_since(t0);

    const bool identical = serial_model->params_to_json().dump() ==
                           parallel_model->params_to_json().dump();
    all_identical = all_identical && identical;
    report("random forest training", serial_s, parallel_s, jobs, identical);
  }

  {
    const FeatureDataset ds = synthetic_dataset(600, 32, 23);
    EvaluationConfig config;
    config.scenarios = {Scenario::kA, Scenario::kB};
    config.classifiers = {ClassifierKind::kDecisionTree,
                          ClassifierKind::kRandomForest};
    config.runs = 8;
    config.budget = 4;
    config.master_seed = 99;

    config.jobs = 1;
    auto t0 = std::chrono::steady_clock::now();
    const EvaluationReport serial_report = run_experiment(ds, config);
    const double serial_s = seconds_since(t0);

    config.jobs = jobs;
    t0 = std::chrono::steady_clock::now();
    const EvaluationReport parallel_report = run_experiment(ds, config);
    const double parallel_s = seconds_since(t0);

    const bool identical = report_to_json(serial_report).dump() ==
                           report_to_json(parallel_report).dump();
    all_identical = all_identical && identical;
    report("evaluation harness", serial_s, parallel_s, jobs, identical);
  }

  std::printf("\n%s\n", all_identical
                            ? "all parallel kernels match their serial reference"
                            : "MISMATCH between serial and parallel outputs");
  return all_identical ? 0 : 1;
}
