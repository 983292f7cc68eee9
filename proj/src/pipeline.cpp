#include "eitvent/pipeline.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include "eitvent/errors.hpp"

namespace eitvent {

namespace {

struct EntryOutput {
  std::vector<Sample> samples;
  std::vector<std::string> warnings;
  int cycles_total = 0;
  int cycles_dropped = 0;
  std::string error;
};

EntryOutput process_entry(const ManifestEntry& entry,
                          const PipelineOptions& options) {
  EntryOutput out;
  const FrameSequence seq = read_recording(entry.recording_path);
  const RoiAtlas atlas =
      options.lung_field.empty()
          ? RoiAtlas::build(seq.width(), seq.height())
          : RoiAtlas::build(seq.width(), seq.height(), options.lung_field);
  const FeatureCatalog catalog = options.has_catalog
                                     ? options.catalog
                                     : FeatureCatalog::default_catalog(atlas);

  std::vector<BreathCycle> cycles;
  if (!options.force_auto_detect && !entry.annotation_path.empty()) {
    cycles = read_annotations(entry.annotation_path, seq.frame_count());
  } else {
    cycles = detect_breaths(global_curve(seq, atlas), options.detect);
  }
  out.cycles_total = static_cast<int>(cycles.size());

  const std::string recording_id = entry.recording_path.stem().string();
  if (cycles.empty()) {
    out.warnings.push_back(recording_id + ": no breath cycles found");
    return out;
  }

  // The per-recording cycle loop runs serially here; parallelism is
  // across recordings.
  const ExtractResult extracted =
      extract_features_serial(seq, atlas, cycles, catalog, options.extract);
  out.cycles_dropped = extracted.dropped;
  for (const std::string& w : extracted.warnings) {
    out.warnings.push_back(recording_id + ": " + w);
  }
  for (std::size_t k = 0; k < extracted.vectors.size(); ++k) {
    Sample sample;
    sample.subject_id = entry.subject_id;
    sample.recording_id = recording_id;
    sample.breath_index = extracted.cycle_index[k];
    sample.label = entry.label;
    sample.features = extracted.vectors[k];
    out.samples.push_back(std::move(sample));
  }
  return out;
}

}  // namespace

PipelineResult extract_dataset(const CohortManifest& manifest,
                               const PipelineOptions& options) {
  if (manifest.entries.empty()) throw DataError("manifest has no entries");

  std::vector<EntryOutput> outputs(manifest.entries.size());
  const int n = static_cast<int>(manifest.entries.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(options.jobs > 0 ? options.jobs : omp_get_max_threads())
#endif
  for (int i = 0; i < n; ++i) {
    try {
      outputs[static_cast<std::size_t>(i)] =
          process_entry(manifest.entries[static_cast<std::size_t>(i)], options);
    } catch (const std::exception& e) {
      outputs[static_cast<std::size_t>(i)].error =
          manifest.entries[static_cast<std::size_t>(i)].recording_path.string() +
          ": " + e.what();
    }
  }

  PipelineResult result;
  for (const EntryOutput& out : outputs) {
    if (!out.error.empty()) throw DataError(out.error);
  }

  // Feature names come from the catalog actually used; derive once.
  {
    const auto& first = manifest.entries.front();
    if (options.has_catalog) {
      result.dataset.feature_names = options.catalog.names();
    } else {
      const FrameSequence seq = read_recording(first.recording_path);
      const RoiAtlas atlas = RoiAtlas::build(seq.width(), seq.height());
      result.dataset.feature_names =
          FeatureCatalog::default_catalog(atlas).names();
    }
  }

  for (EntryOutput& out : outputs) {
    ++result.recordings_processed;
    result.cycles_total += out.cycles_total;
    result.cycles_dropped += out.cycles_dropped;
    for (auto& w : out.warnings) result.warnings.push_back(std::move(w));
    for (auto& s : out.samples) result.dataset.samples.push_back(std::move(s));
  }
  result.dataset.validate();
  return result;
}

}  // namespace eitvent
