#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eitvent/frame_sequence.hpp"
#include "eitvent/roi_atlas.hpp"

namespace eitvent {

/// Per-frame sum of impedance change over one ROI.
struct ImpedanceCurve {
  std::vector<double> values;
  double fps = 0.0;
  std::string roi_name;
};

/// One breath: begin-inspiration (end-expiration) and end-inspiration
/// frame indices, begin < end, both inside the recording.
struct BreathCycle {
  int begin_insp = 0;
  int end_insp = 0;
  friend bool operator==(const BreathCycle&, const BreathCycle&) = default;
};

/// Global Impedance Curve: value[t] = sum over the global mask of frame t.
ImpedanceCurve global_curve(const FrameSequence& seq, const RoiAtlas& atlas);

/// Regional impedance curve for one named region.
ImpedanceCurve regional_curve(const FrameSequence& seq, const RoiAtlas& atlas,
                              std::string_view roi_name);

struct DetectOptions {
  double min_duration_s = 1.0;
  /// Peak prominence threshold as a fraction of the curve's full range.
  double min_prominence_frac = 0.15;
  /// Optional moving-average pre-filter (window fps/10 frames). Off by
  /// default so the detector stays analyzable.
  bool smooth = false;
};

/// Automatic breath segmentation of a global impedance curve. Returns
/// non-overlapping cycles in time order; an empty list is a valid
/// result (flat curve).
std::vector<BreathCycle> detect_breaths(const ImpedanceCurve& gic,
                                        const DetectOptions& options = {});

std::vector<double> moving_average(const std::vector<double>& values, int window);

/// Annotation CSV: header `begin_insp_frame,end_insp_frame`. Rows are
/// sorted by begin frame; overlaps, inverted rows and out-of-bounds
/// indices are rejected. Pass frame_count <= 0 to skip bounds checks.
std::vector<BreathCycle> read_annotations(const std::filesystem::path& path,
                                          int frame_count);

void write_annotations(std::span<const BreathCycle> cycles,
                       const std::filesystem::path& path);

}  // namespace eitvent
