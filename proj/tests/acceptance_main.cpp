// Acceptance suite: runs every acceptance criterion at its stated
// tolerance and prints one pass/fail line per criterion.
//
// Usage: eitvent_acceptance <path-to-eitvent-cli> [gap-budget]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "eitvent/classifiers/common.hpp"
#include "eitvent/classifiers/decision_tree.hpp"
#include "eitvent/classifiers/lda.hpp"
#include "eitvent/classifiers/random_forest.hpp"
#include "eitvent/classifiers/rusboost.hpp"
#include "eitvent/classifiers/search.hpp"
#include "eitvent/classifiers/svm_rbf.hpp"
#include "eitvent/curves.hpp"
#include "eitvent/dataset.hpp"
#include "eitvent/evaluation.hpp"
#include "eitvent/features.hpp"
#include "eitvent/pipeline.hpp"
#include "eitvent/rng.hpp"
#include "eitvent/synth.hpp"
#include "eitvent/util.hpp"
#include "oracle.hpp"

using namespace eitvent;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int id, const char* name, bool pass, const std::string& detail,
            double seconds) {
  std::printf("[%s] %d. %-22s %s (%.1fs)\n", pass ? "PASS" : "FAIL", id, name,
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::vector<Pixel> full_grid(int width, int height) {
  std::vector<Pixel> mask;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) mask.push_back({r, c});
  }
  return mask;
}

FrameSequence random_toy(Rng& rng, int frames) {
  std::vector<double> data;
  for (int i = 0; i < frames * 16; ++i) data.push_back(rng.uniform(-1.0, 2.0));
  return FrameSequence(4, 4, 33.0, std::move(data));
}

std::vector<BreathCycle> random_cycles(Rng& rng, int frames) {
  std::vector<BreathCycle> cycles;
  int t = 0;
  while (t + 5 < frames) {
    const int len = 4 + static_cast<int>(rng.below(6));
    if (t + len >= frames) break;
    cycles.push_back({t, t + len});
    t += len + 1;
  }
  return cycles;
}

// ---------------------------------------------------------------- 1

void criterion_feature_oracle(const RoiAtlas& toy_atlas,
                              const FeatureCatalog& catalog) {
  Timer timer;
  Rng rng(0xACCE01);
  int toys = 0;
  int comparisons = 0;
  double worst = 0.0;
  bool pass = true;
  for (int trial = 0; trial < 24; ++trial) {
    const int frames = 12 + static_cast<int>(rng.below(24));
    const FrameSequence seq = random_toy(rng, frames);
    const std::vector<BreathCycle> cycles = random_cycles(rng, frames);
    if (cycles.empty()) continue;
    ++toys;
    const ExtractResult result =
        extract_features_serial(seq, toy_atlas, cycles, catalog);
    for (std::size_t c = 0; c < cycles.size(); ++c) {
      for (std::size_t j = 0; j < catalog.size(); ++j) {
        const double expected =
            oracle::feature_value(seq, cycles[c], toy_atlas, catalog.at(j));
        const double got = result.vectors[c].values[j];
        ++comparisons;
        if (!oracle::close_rel(got, expected, 1e-9)) pass = false;
        if (!std::isnan(got) && !std::isnan(expected)) {
          const double rel = std::abs(got - expected) /
                             std::max({1.0, std::abs(got), std::abs(expected)});
          worst = std::max(worst, rel);
        }
      }
    }
  }
  const double elapsed = timer.seconds();
  pass = pass && toys >= 20 && elapsed < 10.0;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "%d toys, %d feature comparisons vs brute force, max rel err "
                "%.2e (limit 1e-9)",
                toys, comparisons, worst);
  report(1, "feature oracle", pass, detail, elapsed);
}

// ---------------------------------------------------------------- 2

const std::map<std::string, std::string>& mirror_map() {
  static const std::map<std::string, std::string> m = {
      {"global", "global"},         {"right", "left"},
      {"left", "right"},            {"anterior", "anterior"},
      {"posterior", "posterior"},   {"quadrant1", "quadrant2"},
      {"quadrant2", "quadrant1"},   {"quadrant3", "quadrant4"},
      {"quadrant4", "quadrant3"},   {"horizontalA", "horizontalA"},
      {"horizontalMA", "horizontalMA"}, {"horizontalMP", "horizontalMP"},
      {"horizontalP", "horizontalP"},   {"verticalR", "verticalL"},
      {"verticalMR", "verticalML"}, {"verticalML", "verticalMR"},
      {"verticalL", "verticalR"}};
  return m;
}

bool check_mirror(const FrameSequence& seq, const RoiAtlas& atlas,
                  const FeatureCatalog& catalog,
                  const std::vector<BreathCycle>& cycles) {
  std::vector<double> mirrored_data(seq.data().size());
  const int w = seq.width();
  for (int t = 0; t < seq.frame_count(); ++t) {
    for (int r = 0; r < seq.height(); ++r) {
      for (int c = 0; c < w; ++c) {
        mirrored_data[static_cast<std::size_t>(t) * seq.pixels_per_frame() +
                      static_cast<std::size_t>(r) * w + c] =
            seq.at(t, r, w - 1 - c);
      }
    }
  }
  const FrameSequence mirrored(seq.width(), seq.height(), seq.fps(),
                               std::move(mirrored_data));
  const auto base = extract_features_serial(seq, atlas, cycles, catalog);
  const auto flip = extract_features_serial(mirrored, atlas, cycles, catalog);
  if (base.vectors.size() != flip.vectors.size()) return false;

  for (std::size_t v = 0; v < base.vectors.size(); ++v) {
    for (std::size_t j = 0; j < catalog.size(); ++j) {
      const FeatureDescriptor& f = catalog.at(j);
      const std::string ma = mirror_map().at(f.operand_a);
      const std::string mb =
          f.operand_b.empty() ? "" : mirror_map().at(f.operand_b);
      const double got = flip.vectors[v].values[j];
      double expected = 0.0;
      if (f.family == FeatureFamily::kRatio) {
        int k = catalog.index_of("ratio_" + ma + "_" + mb);
        if (k >= 0) {
          expected = base.vectors[v].values[static_cast<std::size_t>(k)];
        } else {
          k = catalog.index_of("ratio_" + mb + "_" + ma);
          if (k < 0) return false;
          expected = 1.0 / base.vectors[v].values[static_cast<std::size_t>(k)];
        }
      } else if (f.family == FeatureFamily::kCorr) {
        int k = catalog.index_of("corr_" + ma + "_" + mb);
        if (k < 0) k = catalog.index_of("corr_" + mb + "_" + ma);
        if (k < 0) return false;
        expected = base.vectors[v].values[static_cast<std::size_t>(k)];
      } else {
        const std::string prefix = f.family == FeatureFamily::kCv   ? "CV_"
                                   : f.family == FeatureFamily::kGi ? "GI_"
                                                                    : "RVD_";
        const int k = catalog.index_of(prefix + ma);
        if (k < 0) return false;
        expected = base.vectors[v].values[static_cast<std::size_t>(k)];
      }
      if (!oracle::close_rel(got, expected, 1e-9)) return false;
    }
  }
  return true;
}

void criterion_invariance(const RoiAtlas& toy_atlas,
                          const FeatureCatalog& catalog) {
  Timer timer;
  Rng rng(0xACCE02);
  bool scale_ok = true;
  bool mirror_ok = true;
  bool additivity_ok = true;

  for (int trial = 0; trial < 6; ++trial) {
    const FrameSequence seq = random_toy(rng, 30);
    const std::vector<BreathCycle> cycles = random_cycles(rng, 30);
    if (cycles.empty()) continue;

    const auto base = extract_features_serial(seq, toy_atlas, cycles, catalog);
    for (const double c : {0.1, 3.0, 100.0}) {
      std::vector<double> scaled_data;
      for (const double v : seq.data()) scaled_data.push_back(c * v);
      const FrameSequence scaled(4, 4, 33.0, std::move(scaled_data));
      const auto got =
          extract_features_serial(scaled, toy_atlas, cycles, catalog);
      for (std::size_t i = 0; i < base.vectors.size(); ++i) {
        for (std::size_t j = 0; j < catalog.size(); ++j) {
          if (!oracle::close_rel(got.vectors[i].values[j],
                                 base.vectors[i].values[j], 1e-9)) {
            scale_ok = false;
          }
        }
      }
    }
    mirror_ok = mirror_ok && check_mirror(seq, toy_atlas, catalog, cycles);

    const ImpedanceCurve gic = global_curve(seq, toy_atlas);
    for (const auto& family : RoiAtlas::partition_families()) {
      std::vector<double> sum(gic.values.size(), 0.0);
      for (const auto name : family) {
        const ImpedanceCurve ric = regional_curve(seq, toy_atlas, name);
        for (std::size_t t = 0; t < sum.size(); ++t) sum[t] += ric.values[t];
      }
      for (std::size_t t = 0; t < sum.size(); ++t) {
        if (!oracle::close_rel(sum[t], gic.values[t], 1e-9)) additivity_ok = false;
      }
    }
  }

  // Additivity also on a realistic 32x32 phantom recording.
  {
    PhantomSpec spec;
    spec.noise_level = 0.01;
    spec.inhomogeneity = 0.15;
    spec.seed = 0xACCE02;
    const PhantomRecording recording = generate_recording(spec);
    const RoiAtlas atlas = RoiAtlas::build(spec.width, spec.height);
    const ImpedanceCurve gic = global_curve(recording.frames, atlas);
    for (const auto& family : RoiAtlas::partition_families()) {
      std::vector<double> sum(gic.values.size(), 0.0);
      for (const auto name : family) {
        const ImpedanceCurve ric = regional_curve(recording.frames, atlas, name);
        for (std::size_t t = 0; t < sum.size(); ++t) sum[t] += ric.values[t];
      }
      for (std::size_t t = 0; t < sum.size(); ++t) {
        if (!oracle::close_rel(sum[t], gic.values[t], 1e-9)) additivity_ok = false;
      }
    }
  }

  const bool pass = scale_ok && mirror_ok && additivity_ok;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "scale x{0.1,3,100} %s, mirror map %s, GIC additivity %s (all "
                "at 1e-9 rel)",
                scale_ok ? "ok" : "FAIL", mirror_ok ? "ok" : "FAIL",
                additivity_ok ? "ok" : "FAIL");
  report(2, "invariance suite", pass, detail, timer.seconds());
}

// ---------------------------------------------------------------- 3

void criterion_closed_forms() {
  Timer timer;
  bool pass = true;
  std::string failed;

  {  // Linear ramp: RVD 40 within quantization (here exact).
    ImpedanceCurve ric;
    ric.fps = 10.0;
    for (int i = 0; i <= 10; ++i) ric.values.push_back(i);
    const double v = regional_ventilation_delay(ric, {0, 10});
    if (std::abs(v - 40.0) > 100.0 * 0.5 / 10.0) {
      pass = false;
      failed += " ramp-RVD";
    }
  }
  {  // Raised cosine: 100*acos(0.2)/pi = 43.59, within one frame.
    ImpedanceCurve ric;
    ric.fps = 100.0;
    const int t_frames = 100;
    for (int i = 0; i <= t_frames; ++i) {
      ric.values.push_back((1.0 - std::cos(std::numbers::pi * i / t_frames)) / 2.0);
    }
    const double v = regional_ventilation_delay(ric, {0, t_frames});
    if (std::abs(v - 43.59) > 100.0 / t_frames + 0.01) {
      pass = false;
      failed += " cosine-RVD";
    }
  }
  {  // GI of {1,1,1,3} = 1/3 to 1e-9.
    const RoiAtlas atlas = RoiAtlas::build(4, 4, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    FeitImage img{4, 4, std::vector<double>(16, 0.0)};
    img.values[0] = 1.0;
    img.values[1] = 1.0;
    img.values[4] = 1.0;
    img.values[5] = 3.0;
    if (std::abs(global_inhomogeneity(img, atlas, "global") - 1.0 / 3.0) > 1e-9) {
      pass = false;
      failed += " GI";
    }
  }
  {  // CV of {2,4} = sqrt(2)/3 = 0.4714 to 1e-4.
    const RoiAtlas atlas = RoiAtlas::build(4, 4, {{0, 0}, {0, 1}});
    FeitImage img{4, 4, std::vector<double>(16, 0.0)};
    img.values[0] = 2.0;
    img.values[1] = 4.0;
    if (std::abs(coefficient_of_variation(img, atlas, "global") - 0.4714) > 1e-4) {
      pass = false;
      failed += " CV";
    }
  }
  {  // Pearson of [0,1,2] vs [0,1,4] = 0.9608 to 1e-4.
    ImpedanceCurve a;
    a.fps = 33.0;
    a.values = {0.0, 1.0, 2.0};
    ImpedanceCurve b;
    b.fps = 33.0;
    b.values = {0.0, 1.0, 4.0};
    if (std::abs(curve_correlation(a, b, {0, 2}) - 0.9608) > 1e-4) {
      pass = false;
      failed += " Pearson";
    }
  }
  report(3, "closed-form checks", pass,
         pass ? "ramp RVD 40.0, cosine RVD 43.59, GI 0.3333, CV 0.4714, "
                "Pearson 0.9608"
              : "failed:" + failed,
         timer.seconds());
}

// ---------------------------------------------------------------- 4

void criterion_split_integrity(const FeatureDataset& cohort) {
  Timer timer;
  bool disjoint = true;
  bool quota = true;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SplitPlan plan = plan_split(cohort, Scenario::kB, seed);
    std::set<std::string> train_side;
    for (const int i : plan.train_idx) {
      train_side.insert(cohort.samples[static_cast<std::size_t>(i)].subject_id);
    }
    for (const int i : plan.validation_idx) {
      train_side.insert(cohort.samples[static_cast<std::size_t>(i)].subject_id);
    }
    for (const int i : plan.test_idx) {
      if (train_side.count(
              cohort.samples[static_cast<std::size_t>(i)].subject_id) > 0) {
        disjoint = false;
      }
    }
    if (plan.test_idx.size() * 4 < cohort.samples.size()) quota = false;
  }
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "50 scenario-B plans on %zu samples: subject overlap %s, test "
                ">= 25%% %s",
                cohort.samples.size(), disjoint ? "zero" : "FOUND",
                quota ? "always" : "VIOLATED");
  report(4, "split integrity", disjoint && quota, detail, timer.seconds());
}

// ---------------------------------------------------------------- 5

void criterion_scenario_gap(const FeatureDataset& cohort, int budget) {
  Timer timer;
  EvaluationConfig config;
  config.scenarios = {Scenario::kA, Scenario::kB};
  config.classifiers = {ClassifierKind::kRandomForest};
  config.runs = 50;
  config.budget = budget;
  config.master_seed = 2026;
  config.jobs = 0;  // all available cores
  const EvaluationReport report_data = run_experiment(cohort, config);

  double mean_a = 0.0;
  double mean_b = 0.0;
  for (const auto& result : report_data.results) {
    if (result.scenario == Scenario::kA) mean_a = result.mean.accuracy;
    if (result.scenario == Scenario::kB) mean_b = result.mean.accuracy;
  }
  const double elapsed = timer.seconds();
  const bool pass = mean_a >= 0.90 && (mean_a - mean_b) >= 0.10 && elapsed < 600.0;
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "RndForest over 50 runs (search budget %d): scenario A %.3f "
                "(need >= 0.90), B %.3f, gap %.1f points (need >= 10)",
                budget, mean_a, mean_b, 100.0 * (mean_a - mean_b));
  report(5, "scenario gap", pass, detail, elapsed);
}

// ---------------------------------------------------------------- 6

void criterion_importance_recovery(const fs::path& tmp) {
  Timer timer;
  const int n = 400;
  const int d = 30;
  const int planted = 7;
  FeatureDataset ds;
  for (int j = 0; j < d; ++j) {
    ds.feature_names.push_back(j == planted ? "planted_signal"
                                            : "noise" + std::to_string(j));
  }
  Rng rng(0xACCE06);
  for (int i = 0; i < n; ++i) {
    Sample s;
    s.subject_id = "s" + std::to_string(i % 16);
    s.recording_id = "r" + std::to_string(i);
    s.breath_index = 0;
    s.label = (i % 16) < 5 ? Label::kHealthy : Label::kNonHealthy;
    for (int j = 0; j < d; ++j) {
      const double signal = s.label == Label::kNonHealthy ? 2.0 : 0.0;
      s.features.values.push_back(j == planted ? signal + 0.3 * rng.normal()
                                               : rng.normal());
    }
    ds.samples.push_back(std::move(s));
  }

  std::vector<int> all_rows(ds.samples.size());
  for (std::size_t i = 0; i < all_rows.size(); ++i) {
    all_rows[i] = static_cast<int>(i);
  }
  const std::vector<double> medians = train_medians(ds, all_rows);
  const TrainingSet set = build_training_set(ds, all_rows, medians);

  int top3 = 0;
  ForestParams params;
  params.n_trees = 150;
  for (int run = 0; run < 50; ++run) {
    const auto model = RandomForestModel::train(
        set, params, mix_seed(0xACCE06, static_cast<std::uint64_t>(run)), 0);
    const std::vector<double> importance = predictor_importance(*model);
    int better = 0;
    for (int j = 0; j < d; ++j) {
      if (j != planted &&
          importance[static_cast<std::size_t>(j)] >
              importance[static_cast<std::size_t>(planted)]) {
        ++better;
      }
    }
    if (better < 3) ++top3;
  }

  // Table-3-shaped CSV out of a real (small) experiment report.
  EvaluationConfig config;
  config.scenarios = {Scenario::kA, Scenario::kB};
  config.classifiers = {ClassifierKind::kRandomForest};
  config.runs = 3;
  config.budget = 2;
  config.master_seed = 3;
  config.jobs = 0;
  const EvaluationReport rep = run_experiment(ds, config);
  const std::string csv =
      importance_csv_from_report(report_to_json(rep), "RndForest", 10);
  int lines = 0;
  for (const char c : csv) {
    if (c == '\n') ++lines;
  }
  const bool shape_ok =
      lines == 11 &&
      csv.rfind("rank,scenarioA_feature,scenarioA_importance,"
                "scenarioB_feature,scenarioB_importance",
                0) == 0 &&
      csv.find("planted_signal") != std::string::npos;
  atomic_write_file(tmp / "importance_top10.csv", csv);

  const bool pass = top3 >= 45 && shape_ok;
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "planted feature in importance top-3 in %d/50 runs (need >= "
                "45); top-10 CSV shape %s",
                top3, shape_ok ? "ok" : "FAIL");
  report(6, "importance recovery", pass, detail, timer.seconds());
}

// ---------------------------------------------------------------- 7

void criterion_metrics_bruteforce() {
  Timer timer;
  Rng rng(0xACCE07);
  bool exact = true;
  bool symmetric = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 8 + static_cast<int>(rng.below(60));
    std::vector<Label> truths;
    std::vector<Label> predictions;
    for (int i = 0; i < n; ++i) {
      truths.push_back(static_cast<Label>(rng.below(2)));
      predictions.push_back(static_cast<Label>(rng.below(2)));
    }
    truths[0] = Label::kHealthy;  // both classes present
    truths[1] = Label::kNonHealthy;
    const MetricsRow row = compute_metrics(predictions, truths);

    // Independent recount with separate passes per cell.
    int tp = 0;
    int fp = 0;
    int fn = 0;
    int tn = 0;
    for (int i = 0; i < n; ++i) {
      if (truths[static_cast<std::size_t>(i)] == Label::kHealthy &&
          predictions[static_cast<std::size_t>(i)] == Label::kHealthy) {
        ++tp;
      }
    }
    for (int i = 0; i < n; ++i) {
      if (truths[static_cast<std::size_t>(i)] != Label::kHealthy &&
          predictions[static_cast<std::size_t>(i)] == Label::kHealthy) {
        ++fp;
      }
    }
    for (int i = 0; i < n; ++i) {
      if (truths[static_cast<std::size_t>(i)] == Label::kHealthy &&
          predictions[static_cast<std::size_t>(i)] != Label::kHealthy) {
        ++fn;
      }
    }
    for (int i = 0; i < n; ++i) {
      if (truths[static_cast<std::size_t>(i)] != Label::kHealthy &&
          predictions[static_cast<std::size_t>(i)] != Label::kHealthy) {
        ++tn;
      }
    }
    auto div = [](int a, int b) {
      return b > 0 ? static_cast<double>(a) / static_cast<double>(b) : 0.0;
    };
    auto f1 = [](double p, double r) {
      return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    };
    const double acc = div(tp + tn, n);
    const double prec_h = div(tp, tp + fp);
    const double rec_h = div(tp, tp + fn);
    const double spec_h = div(tn, tn + fp);
    const double prec_nh = div(tn, tn + fn);
    const double rec_nh = div(tn, tn + fp);
    const double spec_nh = div(tp, tp + fn);
    if (row.accuracy != acc || row.precision_h != prec_h ||
        row.recall_h != rec_h || row.specificity_h != spec_h ||
        row.f1_h != f1(prec_h, rec_h) || row.precision_nh != prec_nh ||
        row.recall_nh != rec_nh || row.specificity_nh != spec_nh ||
        row.f1_nh != f1(prec_nh, rec_nh)) {
      exact = false;
    }
    if (row.recall_h != row.specificity_nh || row.recall_nh != row.specificity_h) {
      symmetric = false;
    }
  }
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "1000 random vectors: brute-force equality %s, recall/"
                "specificity symmetry %s",
                exact ? "exact" : "FAIL", symmetric ? "holds" : "FAIL");
  report(7, "metrics correctness", exact && symmetric, detail, timer.seconds());
}

// ---------------------------------------------------------------- 8

int run_command(const std::string& command) {
  const int status = std::system(command.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion_determinism(const std::string& cli, const fs::path& tmp) {
  Timer timer;
  if (cli.empty()) {
    report(8, "determinism", false, "eitvent CLI path not supplied", 0.0);
    return;
  }
  const fs::path dir = tmp / "determinism";
  fs::create_directories(dir);
  const std::string log = " >> " + (dir / "cli.log").string() + " 2>&1";

  bool ok = true;
  std::string detail = "";
  const std::string synth_cmd =
      cli + " synth --subjects-healthy 3 --subjects-nonhealthy 5 " +
      "--recordings-healthy 2 --recordings-nonhealthy 2 --seed 11 --out " +
      (dir / "cohort").string() + log;
  const std::string extract_cmd =
      cli + " extract --manifest " + (dir / "cohort" / "manifest.csv").string() +
      " --out " + (dir / "features.csv").string() + log;
  ok = ok && run_command(synth_cmd) == 0;
  ok = ok && run_command(extract_cmd) == 0;

  auto evaluate = [&](const std::string& out, int jobs) {
    const std::string cmd =
        cli + " evaluate --features " + (dir / "features.csv").string() +
        " --out " + (dir / out).string() +
        " --scenario both --runs 4 --budget 3 --seed 77 --classifiers all "
        "--jobs " +
        std::to_string(jobs) + log;
    return run_command(cmd) == 0;
  };
  ok = ok && evaluate("report_j8_a.json", 8);
  ok = ok && evaluate("report_j8_b.json", 8);
  ok = ok && evaluate("report_j1.json", 1);

  if (ok) {
    const std::string a = read_file(dir / "report_j8_a.json");
    const std::string b = read_file(dir / "report_j8_b.json");
    const std::string c = read_file(dir / "report_j1.json");
    const bool repeat_ok = a == b;
    const bool jobs_ok = a == c;
    ok = repeat_ok && jobs_ok;
    detail = std::string("repeat invocations byte-identical: ") +
             (repeat_ok ? "yes" : "NO") +
             ", jobs 1 vs 8 byte-identical: " + (jobs_ok ? "yes" : "NO");
  } else {
    detail = "CLI pipeline failed (see " + (dir / "cli.log").string() + ")";
  }
  report(8, "determinism", ok, detail, timer.seconds());
}

// ---------------------------------------------------------------- 9

void criterion_classifier_sanity() {
  Timer timer;
  bool lda_ok = false;
  bool xor_ok = false;
  bool kkt_ok = true;
  bool rus_ok = true;

  {  // LDA on separable Gaussians.
    Rng rng(0xACCE09);
    TrainingSet train;
    train.n = 100;
    train.d = 2;
    TrainingSet test;
    test.n = 50;
    test.d = 2;
    for (TrainingSet* set : {&train, &test}) {
      for (int i = 0; i < set->n; ++i) {
        const int label = i % 2;
        set->x.push_back(label * 10.0 + rng.normal());
        set->x.push_back(label * 10.0 + rng.normal());
        set->y.push_back(static_cast<std::uint8_t>(label));
      }
    }
    const auto model = LdaModel::train(train, LdaParams{0.01}, 1);
    lda_ok = accuracy_on(*model, test) == 1.0;
  }

  {  // Depth-2 tree on XOR.
    TrainingSet xor_data;
    xor_data.n = 8;
    xor_data.d = 2;
    const double points[8][2] = {{0, 0}, {1, 1}, {0, 1}, {1, 0},
                                 {0, 0}, {1, 1}, {0, 1}, {1, 0}};
    const int labels[8] = {0, 0, 1, 1, 0, 0, 1, 1};
    for (int i = 0; i < 8; ++i) {
      xor_data.x.push_back(points[i][0]);
      xor_data.x.push_back(points[i][1]);
      xor_data.y.push_back(static_cast<std::uint8_t>(labels[i]));
    }
    const auto tree = DecisionTreeModel::train(xor_data, TreeParams{2, 1}, 1);
    xor_ok = accuracy_on(*tree, xor_data) == 1.0;
  }

  double worst_kkt = 0.0;
  {  // SMO KKT residuals, independently recomputed via predict().
    Rng rng(0xACCE0A);
    TrainingSet data;
    data.n = 90;
    data.d = 4;
    for (int i = 0; i < data.n; ++i) {
      const int label = i % 3 == 0 ? 0 : 1;
      for (int j = 0; j < data.d; ++j) {
        data.x.push_back(label * 1.5 + rng.normal());
      }
      data.y.push_back(static_cast<std::uint8_t>(label));
    }
    for (const SvmParams params :
         {SvmParams{1.0, 0.1}, SvmParams{30.0, 0.5}, SvmParams{0.3, 2.0}}) {
      SvmRbfModel::TrainInfo info;
      const auto model = SvmRbfModel::train(data, params, 5, &info);
      for (int i = 0; i < data.n; ++i) {
        const double y = data.y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
        const double yf = y * model->predict(data.row(i)).score;
        const double alpha = info.alphas[static_cast<std::size_t>(i)];
        double violation = 0.0;
        if (alpha <= 1e-9) {
          violation = std::max(0.0, 1.0 - yf);
        } else if (alpha >= params.c - 1e-9) {
          violation = std::max(0.0, yf - 1.0);
        } else {
          violation = std::abs(yf - 1.0);
        }
        worst_kkt = std::max(worst_kkt, violation);
      }
    }
    kkt_ok = worst_kkt <= 1e-3;
  }

  {  // RUSBoost subsets exactly balanced across datasets and rounds.
    Rng rng(0xACCE0B);
    for (int t = 0; t < 5; ++t) {
      TrainingSet data;
      data.d = 2;
      const int n0 = 10 + static_cast<int>(rng.below(30));
      const int n1 = 40 + static_cast<int>(rng.below(60));
      data.n = n0 + n1;
      for (int i = 0; i < data.n; ++i) {
        data.x.push_back(rng.normal());
        data.x.push_back(rng.normal());
        data.y.push_back(static_cast<std::uint8_t>(i >= n0));
      }
      for (int round = 0; round < 4; ++round) {
        const auto subset = RusBoostModel::round_subset(
            data, static_cast<std::uint64_t>(t), round);
        int c0 = 0;
        int c1 = 0;
        for (const int i : subset) {
          (data.y[static_cast<std::size_t>(i)] == 0 ? c0 : c1)++;
        }
        if (c0 != std::min(n0, n1) || c1 != std::min(n0, n1)) rus_ok = false;
      }
    }
  }

  const bool pass = lda_ok && xor_ok && kkt_ok && rus_ok;
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "LDA separable acc %s, XOR depth-2 %s, SVM max KKT violation "
                "%.1e (limit 1e-3), RUSBoost balance %s",
                lda_ok ? "1.0" : "FAIL", xor_ok ? "1.0" : "FAIL", worst_kkt,
                rus_ok ? "exact" : "FAIL");
  report(9, "classifier sanity", pass, detail, timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const int gap_budget = argc > 2 ? std::atoi(argv[2]) : 6;

  const fs::path tmp =
      fs::temp_directory_path() /
      ("eitvent_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(tmp);

  const RoiAtlas toy_atlas = RoiAtlas::build(4, 4, full_grid(4, 4));
  const FeatureCatalog toy_catalog = FeatureCatalog::default_catalog(toy_atlas);

  criterion_feature_oracle(toy_atlas, toy_catalog);
  criterion_invariance(toy_atlas, toy_catalog);
  criterion_closed_forms();

  // Criteria 4 and 5 use the default confounded cohort (16 subjects,
  // about 1500 breaths), generated once and pushed through the full
  // manifest -> recordings -> features pipeline.
  {
    Timer timer;
    std::fprintf(stderr, "generating default synthetic cohort...\n");
    CohortParams params;
    params.seed = 1;
    const GeneratedCohort cohort =
        generate_cohort(params, tmp / "default_cohort", 0);
    PipelineOptions options;
    options.jobs = 0;
    const PipelineResult extracted = extract_dataset(cohort.manifest, options);
    std::fprintf(stderr, "cohort ready: %zu samples from %d recordings (%.1fs)\n",
                 extracted.dataset.samples.size(), extracted.recordings_processed,
                 timer.seconds());
    const std::size_t n = extracted.dataset.samples.size();
    if (extracted.dataset.subject_ids().size() != 16 || n < 1425 || n > 1575) {
      report(4, "split integrity", false,
             "default cohort out of shape: " + std::to_string(n) + " samples",
             timer.seconds());
      report(5, "scenario gap", false, "default cohort out of shape", 0.0);
    } else {
      criterion_split_integrity(extracted.dataset);
      criterion_scenario_gap(extracted.dataset, gap_budget);
    }
  }

  criterion_importance_recovery(tmp);
  criterion_metrics_bruteforce();
  criterion_determinism(cli, tmp);
  criterion_classifier_sanity();

  std::error_code ec;
  fs::remove_all(tmp, ec);

  if (g_failures > 0) {
    std::printf("\n%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("\nall acceptance criteria passed\n");
  return 0;
}
