#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eitvent/curves.hpp"
#include "eitvent/frame_sequence.hpp"
#include "eitvent/roi_atlas.hpp"

namespace eitvent {

/// Pixelwise difference between the end-inspiration and
/// begin-inspiration frames of one breath.
struct FeitImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major

  double at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(col)];
  }
};

FeitImage feit_image(const FrameSequence& seq, BreathCycle cycle);

/// Features that cannot be computed for a breath (zero denominators,
/// flat curves, degenerate windows) carry this marker and surface as
/// empty CSV cells.
inline double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_missing(double v) { return std::isnan(v); }

double region_sum(const FeitImage& img, const RoiAtlas& atlas,
                  std::string_view region);

/// (sum over regionA) / (sum over regionB); missing when the
/// denominator is zero.
double ventilation_ratio(const FeitImage& img, const RoiAtlas& atlas,
                         std::string_view region_a, std::string_view region_b);

/// Sample standard deviation (N-1) of the region pixels divided by the
/// region mean; missing for zero mean or single-pixel regions.
double coefficient_of_variation(const FeitImage& img, const RoiAtlas& atlas,
                                std::string_view region);

/// Global Inhomogeneity index: sum of absolute deviations from the
/// region median, divided by the region sum; missing for zero sum.
double global_inhomogeneity(const FeitImage& img, const RoiAtlas& atlas,
                            std::string_view region);

/// Regional Ventilation Delay, in percent of the inspiration window:
/// time from the window start to the first crossing of
/// min + threshold * (max - min) of the windowed regional curve.
/// Missing for flat windows.
double regional_ventilation_delay(const ImpedanceCurve& ric, BreathCycle cycle,
                                  double threshold = 0.4);

/// Pearson correlation of two curves over the closed inspiration
/// window. Missing when either windowed curve has zero variance or the
/// window has fewer than 3 frames.
double curve_correlation(const ImpedanceCurve& a, const ImpedanceCurve& b,
                         BreathCycle cycle);

enum class FeatureFamily : std::uint8_t { kRatio, kCv, kGi, kRvd, kCorr };

const char* family_token(FeatureFamily family);
FeatureFamily parse_family(std::string_view token);

struct FeatureDescriptor {
  std::string name;
  FeatureFamily family = FeatureFamily::kRatio;
  std::string operand_a;
  std::string operand_b;  // empty for unary features
};

/// Ordered, named feature definitions. Names are unique and the order
/// is canonical: it defines CSV column order and vector layout.
class FeatureCatalog {
 public:
  FeatureCatalog() = default;
  explicit FeatureCatalog(std::vector<FeatureDescriptor> features);

  /// The standard 106-feature catalog over the 17-region atlas:
  /// 20 ratios, 17 CV, 17 GI, 16 RVD and 36 curve correlations.
  static FeatureCatalog default_catalog(const RoiAtlas& atlas);

  std::size_t size() const { return features_.size(); }
  const FeatureDescriptor& at(std::size_t i) const { return features_[i]; }
  const std::vector<FeatureDescriptor>& features() const { return features_; }
  int index_of(std::string_view name) const;  // -1 when absent
  std::vector<std::string> names() const;

  /// FNV-1a over the descriptor list; stored with saved models so a
  /// model is never applied to a differently-shaped vector.
  std::uint64_t hash() const;

  /// Catalog file: CSV header `name,family,operand_a,operand_b`.
  static FeatureCatalog read_csv(const std::filesystem::path& path);
  void write_csv(const std::filesystem::path& path) const;

 private:
  std::vector<FeatureDescriptor> features_;
};

/// One breath's feature values, aligned to a catalog.
struct FeatureVector {
  std::vector<double> values;
};

struct ExtractOptions {
  /// Vectors with more than this fraction of missing features are
  /// dropped (with a warning).
  double max_missing_frac = 0.25;
  double rvd_threshold = 0.4;
};

struct ExtractResult {
  /// Ordinal of the source cycle for each kept vector.
  std::vector<int> cycle_index;
  std::vector<FeatureVector> vectors;
  int dropped = 0;
  std::vector<std::string> warnings;
};

/// Serial reference implementation (plain loop over cycles).
ExtractResult extract_features_serial(const FrameSequence& seq,
                                      const RoiAtlas& atlas,
                                      std::span<const BreathCycle> cycles,
                                      const FeatureCatalog& catalog,
                                      const ExtractOptions& options = {});

/// OpenMP-parallel extraction over cycles. Results are identical to the
/// serial reference for any thread count (per-cycle work is independent
/// and merged by index). jobs <= 0 uses the runtime default.
ExtractResult extract_features(const FrameSequence& seq, const RoiAtlas& atlas,
                               std::span<const BreathCycle> cycles,
                               const FeatureCatalog& catalog,
                               const ExtractOptions& options = {}, int jobs = 1);

}  // namespace eitvent
