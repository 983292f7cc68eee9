#pragma once

#include <string>
#include <vector>

#include "eitvent/curves.hpp"
#include "eitvent/dataset.hpp"
#include "eitvent/features.hpp"
#include "eitvent/manifest.hpp"
#include "eitvent/roi_atlas.hpp"

namespace eitvent {

struct PipelineOptions {
  /// Ignore annotation files and always run automatic detection.
  bool force_auto_detect = false;
  DetectOptions detect;
  ExtractOptions extract;
  /// Empty: default catalog on the recording grid.
  FeatureCatalog catalog;
  bool has_catalog = false;
  /// Empty: inscribed-disc lung field.
  std::vector<Pixel> lung_field;
  int jobs = 1;
};

struct PipelineResult {
  FeatureDataset dataset;
  std::vector<std::string> warnings;
  int recordings_processed = 0;
  int cycles_total = 0;
  int cycles_dropped = 0;
};

/// Runs every manifest entry through the per-recording pipeline:
/// read frames, segment breaths (annotations when available, detection
/// otherwise), extract the catalog features. The recording id is the
/// file stem. Recordings are processed in parallel; sample order is
/// the manifest order regardless of thread count.
PipelineResult extract_dataset(const CohortManifest& manifest,
                               const PipelineOptions& options = {});

}  // namespace eitvent
