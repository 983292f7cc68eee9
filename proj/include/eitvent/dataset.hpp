#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eitvent/features.hpp"
#include "eitvent/manifest.hpp"

namespace eitvent {

/// One breath with provenance. (subject_id, recording_id, breath_index)
/// is unique within a dataset.
struct Sample {
  std::string subject_id;
  std::string recording_id;
  int breath_index = 0;
  Label label = Label::kHealthy;
  FeatureVector features;
};

struct FeatureDataset {
  std::vector<std::string> feature_names;
  std::vector<Sample> samples;

  std::size_t n_features() const { return feature_names.size(); }
  std::size_t n_samples() const { return samples.size(); }
  int feature_index(std::string_view name) const;  // -1 when absent
  std::vector<std::string> subject_ids() const;    // distinct, first-seen order
  std::size_t count_label(Label label) const;

  /// Throws DataError on duplicate keys, length mismatches or a subject
  /// carrying two labels.
  void validate() const;
};

/// Feature matrix CSV: subject_id,recording_id,breath_index,label then
/// the features in catalog order; missing values are empty cells.
FeatureDataset read_feature_csv(const std::filesystem::path& path);
void write_feature_csv(const FeatureDataset& dataset,
                       const std::filesystem::path& path);

}  // namespace eitvent
