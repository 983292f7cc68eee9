#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eitvent/classifiers/common.hpp"
#include "eitvent/curves.hpp"
#include "eitvent/dataset.hpp"
#include "eitvent/errors.hpp"
#include "eitvent/evaluation.hpp"
#include "eitvent/features.hpp"
#include "eitvent/frame_sequence.hpp"
#include "eitvent/manifest.hpp"
#include "eitvent/pipeline.hpp"
#include "eitvent/synth.hpp"
#include "eitvent/util.hpp"

namespace {

constexpr const char* kVersionLine =
    "eitvent 1.0.0 (eitf format v1, report schema v1, model schema v1)";

std::vector<eitvent::ClassifierKind> parse_classifier_list(
    const std::string& spec) {
  std::vector<eitvent::ClassifierKind> kinds;
  if (eitvent::to_lower(spec) == "all") {
    kinds.assign(eitvent::kAllClassifierKinds.begin(),
                 eitvent::kAllClassifierKinds.end());
    return kinds;
  }
  for (const auto& token : eitvent::split_csv_line(spec)) {
    kinds.push_back(eitvent::parse_kind(token));
  }
  if (kinds.empty()) throw eitvent::DataError("empty classifier list");
  return kinds;
}

std::vector<eitvent::Scenario> parse_scenario_list(const std::string& spec) {
  if (eitvent::to_lower(spec) == "both") {
    return {eitvent::Scenario::kA, eitvent::Scenario::kB};
  }
  return {eitvent::parse_scenario(spec)};
}

int run_cli(int argc, char** argv) {
  CLI::App app{"EIT ventilation feature analysis toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersionLine);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic phantom cohort");
  eitvent::CohortParams cohort_params;
  std::string synth_out;
  int synth_jobs = 1;
  synth->add_option("--subjects-healthy", cohort_params.healthy_subjects,
                    "healthy subjects")->capture_default_str();
  synth->add_option("--subjects-nonhealthy", cohort_params.nonhealthy_subjects,
                    "non-healthy subjects")->capture_default_str();
  synth->add_option("--recordings-healthy", cohort_params.recordings_per_healthy,
                    "recordings per healthy subject")->capture_default_str();
  synth->add_option("--recordings-nonhealthy",
                    cohort_params.recordings_per_nonhealthy,
                    "recordings per non-healthy subject")->capture_default_str();
  synth->add_option("--noise", cohort_params.base.noise_level,
                    "sensor noise level (fraction of peak amplitude)")
      ->capture_default_str();
  synth->add_option("--seed", cohort_params.seed, "cohort seed")
      ->capture_default_str();
  synth->add_option("--jobs", synth_jobs, "parallel recording generation")
      ->capture_default_str();
  synth->add_option("--out", synth_out, "output directory")->required();

  // detect
  auto* detect = app.add_subcommand("detect", "segment breaths in a recording");
  std::string detect_recording;
  std::string detect_out;
  eitvent::DetectOptions detect_options;
  detect->add_option("--recording", detect_recording, "EITF or CSV recording")
      ->required();
  detect->add_option("--out", detect_out, "annotation CSV to write")->required();
  detect->add_option("--prominence", detect_options.min_prominence_frac,
                     "peak prominence as a fraction of the curve range")
      ->capture_default_str();
  detect->add_option("--min-duration", detect_options.min_duration_s,
                     "minimum breath duration in seconds")->capture_default_str();
  detect->add_flag("--smooth", detect_options.smooth,
                   "apply the fps/10 moving-average pre-filter");

  // extract
  auto* extract = app.add_subcommand("extract",
                                     "extract per-breath features for a cohort");
  std::string extract_manifest;
  std::string extract_out;
  std::string extract_catalog;
  std::string extract_mask;
  bool extract_auto = false;
  int extract_jobs = 1;
  eitvent::PipelineOptions pipeline_options;
  extract->add_option("--manifest", extract_manifest, "cohort manifest CSV")
      ->required();
  extract->add_option("--out", extract_out, "feature matrix CSV")->required();
  extract->add_flag("--auto-detect", extract_auto,
                    "ignore annotation files and always auto-detect breaths");
  extract->add_option("--catalog", extract_catalog,
                      "feature catalog CSV override");
  extract->add_option("--mask", extract_mask, "lung-field mask CSV (row,col)");
  extract->add_option("--prominence", pipeline_options.detect.min_prominence_frac,
                      "detector prominence fraction")->capture_default_str();
  extract->add_option("--min-duration", pipeline_options.detect.min_duration_s,
                      "detector minimum breath duration (s)")
      ->capture_default_str();
  extract->add_option("--jobs", extract_jobs, "parallel recordings")
      ->capture_default_str();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate",
                                      "train and evaluate classifiers");
  std::string eval_features;
  std::string eval_out;
  std::string eval_scenario = "both";
  std::string eval_classifiers = "all";
  eitvent::EvaluationConfig eval_config;
  evaluate->add_option("--features", eval_features, "feature matrix CSV")
      ->required();
  evaluate->add_option("--out", eval_out, "report JSON path")->required();
  evaluate->add_option("--scenario", eval_scenario, "A, B or both")
      ->capture_default_str();
  evaluate->add_option("--runs", eval_config.runs, "seeded repetitions")
      ->capture_default_str();
  evaluate->add_option("--seed", eval_config.master_seed, "master seed")
      ->capture_default_str();
  evaluate->add_option("--budget", eval_config.budget,
                       "random-search trials per run")->capture_default_str();
  evaluate->add_option("--classifiers", eval_classifiers,
                       "comma list or 'all'")->capture_default_str();
  evaluate->add_option("--jobs", eval_config.jobs, "parallel runs")
      ->capture_default_str();

  // importance
  auto* importance = app.add_subcommand("importance",
                                        "rank features from a report");
  std::string imp_report;
  std::string imp_out;
  std::string imp_classifier = "RndForest";
  int imp_top = 10;
  importance->add_option("--report", imp_report, "report JSON")->required();
  importance->add_option("--top", imp_top, "rows to emit")->capture_default_str();
  importance->add_option("--classifier", imp_classifier,
                         "tree-backed classifier to rank")->capture_default_str();
  importance->add_option("--out", imp_out, "output CSV (stdout when omitted)");

  // distributions
  auto* distributions = app.add_subcommand(
      "distributions", "per-class box statistics for chosen features");
  std::string dist_features;
  std::string dist_names;
  std::string dist_out;
  distributions->add_option("--features", dist_features, "feature matrix CSV")
      ->required();
  distributions->add_option("--names", dist_names,
                            "comma-separated feature names")->required();
  distributions->add_option("--out", dist_out, "output CSV")->required();

  // report
  auto* report_cmd = app.add_subcommand(
      "report", "write summary tables from a report JSON");
  std::string report_in;
  std::string report_prefix;
  report_cmd->add_option("--report", report_in, "report JSON")->required();
  report_cmd->add_option("--out-prefix", report_prefix,
                         "prefix for <prefix>_scenarioX.csv files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  if (synth->parsed()) {
    const eitvent::GeneratedCohort cohort =
        eitvent::generate_cohort(cohort_params, synth_out, synth_jobs);
    std::cout << "wrote " << cohort.manifest.entries.size() << " recordings ("
              << cohort.total_cycles << " breath cycles) under " << synth_out
              << "\n";
    std::cout << "manifest: " << cohort.manifest_path.string() << "\n";
    return 0;
  }

  if (detect->parsed()) {
    const eitvent::FrameSequence seq = eitvent::read_recording(detect_recording);
    const eitvent::RoiAtlas atlas =
        eitvent::RoiAtlas::build(seq.width(), seq.height());
    const auto cycles =
        eitvent::detect_breaths(eitvent::global_curve(seq, atlas), detect_options);
    eitvent::write_annotations(cycles, detect_out);
    std::cout << "detected " << cycles.size() << " cycles -> " << detect_out
              << "\n";
    return 0;
  }

  if (extract->parsed()) {
    pipeline_options.force_auto_detect = extract_auto;
    pipeline_options.jobs = extract_jobs;
    if (!extract_catalog.empty()) {
      pipeline_options.catalog = eitvent::FeatureCatalog::read_csv(extract_catalog);
      pipeline_options.has_catalog = true;
    }
    if (!extract_mask.empty()) {
      pipeline_options.lung_field = eitvent::read_mask_csv(extract_mask);
    }
    const eitvent::CohortManifest manifest =
        eitvent::read_manifest(extract_manifest);
    const eitvent::PipelineResult result =
        eitvent::extract_dataset(manifest, pipeline_options);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    eitvent::write_feature_csv(result.dataset, extract_out);
    std::cout << "extracted " << result.dataset.samples.size() << " samples ("
              << result.cycles_dropped << " dropped) from "
              << result.recordings_processed << " recordings -> " << extract_out
              << "\n";
    return 0;
  }

  if (evaluate->parsed()) {
    eval_config.scenarios = parse_scenario_list(eval_scenario);
    eval_config.classifiers = parse_classifier_list(eval_classifiers);
    const eitvent::FeatureDataset dataset =
        eitvent::read_feature_csv(eval_features);
    const eitvent::EvaluationReport report =
        eitvent::run_experiment(dataset, eval_config);
    eitvent::write_report_json(report, eval_out);
    const std::filesystem::path out_path(eval_out);
    const std::filesystem::path prefix =
        out_path.parent_path() / out_path.stem();
    for (const eitvent::Scenario scenario : eval_config.scenarios) {
      const auto csv_path =
          prefix.string() + "_scenario" + eitvent::scenario_name(scenario) +
          ".csv";
      eitvent::write_summary_csv(report, scenario, csv_path);
      std::cout << "summary: " << csv_path << "\n";
    }
    std::cout << "report: " << eval_out << "\n";
    return 0;
  }

  if (importance->parsed()) {
    const nlohmann::json report_json =
        nlohmann::json::parse(eitvent::read_file(imp_report));
    const std::string csv = eitvent::importance_csv_from_report(
        report_json, eitvent::kind_name(eitvent::parse_kind(imp_classifier)),
        imp_top);
    if (imp_out.empty()) {
      std::cout << csv;
    } else {
      eitvent::atomic_write_file(imp_out, csv);
      std::cout << "importance: " << imp_out << "\n";
    }
    return 0;
  }

  if (distributions->parsed()) {
    const eitvent::FeatureDataset dataset =
        eitvent::read_feature_csv(dist_features);
    const auto names = eitvent::split_csv_line(dist_names);
    eitvent::write_distributions_csv(dataset, names, dist_out);
    std::cout << "distributions: " << dist_out << "\n";
    return 0;
  }

  if (report_cmd->parsed()) {
    const nlohmann::json doc =
        nlohmann::json::parse(eitvent::read_file(report_in));
    // Rebuild the summary tables from the stored per-classifier results.
    for (const std::string scenario : {"A", "B"}) {
      std::string out =
          "Classifier,Acc,F1_H,Rec_H,Prec_H,Spec_H,F1_NH,Rec_NH,Prec_NH,"
          "Spec_NH\n";
      bool any = false;
      for (const auto& entry : doc.at("results")) {
        if (entry.at("scenario").get<std::string>() != scenario) continue;
        any = true;
        out += entry.at("classifier").get<std::string>();
        const auto& mean = entry.at("metrics_mean");
        const auto& std_ = entry.at("metrics_std");
        for (const char* key :
             {"accuracy", "f1_h", "recall_h", "precision_h", "specificity_h",
              "f1_nh", "recall_nh", "precision_nh", "specificity_nh"}) {
          char buf[48];
          std::snprintf(buf, sizeof(buf), ",%.1f±%.1f",
                        100.0 * mean.at(key).get<double>(),
                        100.0 * std_.at(key).get<double>());
          out += buf;
        }
        out += '\n';
      }
      if (any) {
        const std::string path =
            report_prefix + "_scenario" + scenario + ".csv";
        eitvent::atomic_write_file(path, out);
        std::cout << "summary: " << path << "\n";
      }
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: invalid JSON input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
