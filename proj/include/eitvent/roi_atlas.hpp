#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace eitvent {

struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Named pixel masks over one grid: a global lung field plus the 16
/// standard analysis regions (halves, quadrants, four horizontal and
/// four vertical bands), every one intersected with the lung field.
///
/// Orientation convention: row 0 is anterior (image top), column 0 is
/// the patient's right (image left). Quadrants are numbered
/// 1=anterior-right, 2=anterior-left, 3=posterior-right,
/// 4=posterior-left. Feature names inherit these meanings.
class RoiAtlas {
 public:
  static constexpr int kRegionCount = 17;
  /// Canonical region order used everywhere (feature catalogs, reports).
  static const std::array<std::string_view, kRegionCount>& region_names();

  /// Default lung field: pixels whose centers lie in the disc inscribed
  /// in the grid (radius min(width,height)/2, grid center).
  static RoiAtlas build(int width, int height);
  static RoiAtlas build(int width, int height, std::vector<Pixel> lung_field);

  int width() const { return width_; }
  int height() const { return height_; }

  bool has_region(std::string_view name) const;
  /// Sorted linear pixel indices (row*width + col). Throws DataError on
  /// unknown names.
  const std::vector<int>& region(std::string_view name) const;
  const std::vector<int>& region(int canonical_index) const;
  const std::vector<int>& global() const { return region(0); }

  /// The four disjoint covers of the global region, by region name:
  /// right/left, anterior/posterior, quadrants, horizontal and vertical
  /// bands. Useful for additivity checks.
  static const std::vector<std::vector<std::string_view>>& partition_families();

 private:
  RoiAtlas() = default;
  int width_ = 0;
  int height_ = 0;
  std::array<std::vector<int>, kRegionCount> regions_;
};

/// Reads an optional mask file: CSV lines of `row,col` coordinates.
std::vector<Pixel> read_mask_csv(const std::filesystem::path& path);

/// Pixels whose centers fall inside the inscribed disc of the grid.
std::vector<Pixel> inscribed_disc_mask(int width, int height);

}  // namespace eitvent
