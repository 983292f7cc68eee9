#include "eitvent/roi_atlas.hpp"

#include <algorithm>
#include <sstream>

#include "eitvent/errors.hpp"
#include "eitvent/util.hpp"

namespace eitvent {

namespace {

enum RegionIndex : int {
  kGlobal = 0,
  kRight,
  kLeft,
  kAnterior,
  kPosterior,
  kQuadrant1,
  kQuadrant2,
  kQuadrant3,
  kQuadrant4,
  kHorizontalA,
  kHorizontalMA,
  kHorizontalMP,
  kHorizontalP,
  kVerticalR,
  kVerticalMR,
  kVerticalML,
  kVerticalL,
};

constexpr std::array<std::string_view, RoiAtlas::kRegionCount> kNames = {
    "global",       "right",        "left",         "anterior",
    "posterior",    "quadrant1",    "quadrant2",    "quadrant3",
    "quadrant4",    "horizontalA",  "horizontalMA", "horizontalMP",
    "horizontalP",  "verticalR",    "verticalMR",   "verticalML",
    "verticalL"};

}  // namespace

const std::array<std::string_view, RoiAtlas::kRegionCount>&
RoiAtlas::region_names() {
  return kNames;
}

std::vector<Pixel> inscribed_disc_mask(int width, int height) {
  const double cx = width / 2.0;
  const double cy = height / 2.0;
  const double radius = std::min(width, height) / 2.0;
  const double r2 = radius * radius;
  std::vector<Pixel> mask;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double dy = (r + 0.5) - cy;
      const double dx = (c + 0.5) - cx;
      if (dx * dx + dy * dy <= r2) mask.push_back({r, c});
    }
  }
  return mask;
}

RoiAtlas RoiAtlas::build(int width, int height) {
  return build(width, height, inscribed_disc_mask(width, height));
}

RoiAtlas RoiAtlas::build(int width, int height, std::vector<Pixel> lung_field) {
  if (width < 4 || height < 4 || width % 4 != 0 || height % 4 != 0) {
    throw DataError("atlas grid dimensions must be positive multiples of 4, got " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
  if (lung_field.empty()) {
    throw DataError("lung field mask is empty");
  }
  for (const Pixel& p : lung_field) {
    if (p.row < 0 || p.row >= height || p.col < 0 || p.col >= width) {
      throw DataError("lung field pixel (" + std::to_string(p.row) + "," +
                      std::to_string(p.col) + ") outside " +
                      std::to_string(width) + "x" + std::to_string(height) +
                      " grid");
    }
  }

  RoiAtlas atlas;
  atlas.width_ = width;
  atlas.height_ = height;

  std::vector<int> linear;
  linear.reserve(lung_field.size());
  for (const Pixel& p : lung_field) linear.push_back(p.row * width + p.col);
  std::sort(linear.begin(), linear.end());
  linear.erase(std::unique(linear.begin(), linear.end()), linear.end());

  const int row_quarter = height / 4;
  const int col_quarter = width / 4;
  for (const int idx : linear) {
    const int row = idx / width;
    const int col = idx % width;
    atlas.regions_[kGlobal].push_back(idx);
    atlas.regions_[col < width / 2 ? kRight : kLeft].push_back(idx);
    atlas.regions_[row < height / 2 ? kAnterior : kPosterior].push_back(idx);
    const int quadrant =
        (row < height / 2 ? 0 : 2) + (col < width / 2 ? 0 : 1);
    atlas.regions_[kQuadrant1 + quadrant].push_back(idx);
    atlas.regions_[kHorizontalA + std::min(row / row_quarter, 3)].push_back(idx);
    atlas.regions_[kVerticalR + std::min(col / col_quarter, 3)].push_back(idx);
  }
  return atlas;
}

bool RoiAtlas::has_region(std::string_view name) const {
  return std::find(kNames.begin(), kNames.end(), name) != kNames.end();
}

const std::vector<int>& RoiAtlas::region(std::string_view name) const {
  const auto it = std::find(kNames.begin(), kNames.end(), name);
  if (it == kNames.end()) {
    throw DataError("unknown region name '" + std::string(name) + "'");
  }
  return regions_[static_cast<std::size_t>(it - kNames.begin())];
}

const std::vector<int>& RoiAtlas::region(int canonical_index) const {
  return regions_[static_cast<std::size_t>(canonical_index)];
}

const std::vector<std::vector<std::string_view>>& RoiAtlas::partition_families() {
  static const std::vector<std::vector<std::string_view>> families = {
      {"right", "left"},
      {"anterior", "posterior"},
      {"quadrant1", "quadrant2", "quadrant3", "quadrant4"},
      {"horizontalA", "horizontalMA", "horizontalMP", "horizontalP"},
      {"verticalR", "verticalMR", "verticalML", "verticalL"},
  };
  return families;
}

std::vector<Pixel> read_mask_csv(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  std::vector<Pixel> mask;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    const std::string where = path.string() + ": line " + std::to_string(line_no);
    if (fields.size() != 2) {
      throw FormatError(where + ": expected row,col");
    }
    // Skip a header line if present.
    if (line_no == 1 && to_lower(fields[0]) == "row") continue;
    mask.push_back({parse_int(fields[0], where), parse_int(fields[1], where)});
  }
  if (mask.empty()) {
    throw FormatError(path.string() + ": mask file has no pixels");
  }
  return mask;
}

}  // namespace eitvent
