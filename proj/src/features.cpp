#include "eitvent/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "eitvent/errors.hpp"
#include "eitvent/util.hpp"

namespace eitvent {

FeitImage feit_image(const FrameSequence& seq, BreathCycle cycle) {
  if (cycle.begin_insp < 0 || cycle.end_insp >= seq.frame_count() ||
      cycle.begin_insp >= cycle.end_insp) {
    throw DataError("breath cycle [" + std::to_string(cycle.begin_insp) + "," +
                    std::to_string(cycle.end_insp) +
                    "] out of bounds for recording of " +
                    std::to_string(seq.frame_count()) + " frames");
  }
  FeitImage img;
  img.width = seq.width();
  img.height = seq.height();
  const auto end = seq.frame(cycle.end_insp);
  const auto begin = seq.frame(cycle.begin_insp);
  img.values.resize(end.size());
  for (std::size_t i = 0; i < end.size(); ++i) img.values[i] = end[i] - begin[i];
  return img;
}

namespace {

double sum_over(const FeitImage& img, const std::vector<int>& pixels) {
  double sum = 0.0;
  for (const int idx : pixels) sum += img.values[static_cast<std::size_t>(idx)];
  return sum;
}

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (n % 2 == 1) return hi;
  const double lo =
      *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lo + hi) / 2.0;
}

}  // namespace

double region_sum(const FeitImage& img, const RoiAtlas& atlas,
                  std::string_view region) {
  return sum_over(img, atlas.region(region));
}

double ventilation_ratio(const FeitImage& img, const RoiAtlas& atlas,
                         std::string_view region_a, std::string_view region_b) {
  const double denom = sum_over(img, atlas.region(region_b));
  if (denom == 0.0) return missing_value();
  return sum_over(img, atlas.region(region_a)) / denom;
}

double coefficient_of_variation(const FeitImage& img, const RoiAtlas& atlas,
                                std::string_view region) {
  const std::vector<int>& pixels = atlas.region(region);
  if (pixels.size() < 2) return missing_value();
  const double n = static_cast<double>(pixels.size());
  const double mean = sum_over(img, pixels) / n;
  if (mean == 0.0) return missing_value();
  double ss = 0.0;
  for (const int idx : pixels) {
    const double d = img.values[static_cast<std::size_t>(idx)] - mean;
    ss += d * d;
  }
  return std::sqrt(ss / (n - 1.0)) / mean;
}

double global_inhomogeneity(const FeitImage& img, const RoiAtlas& atlas,
                            std::string_view region) {
  const std::vector<int>& pixels = atlas.region(region);
  if (pixels.empty()) return missing_value();
  std::vector<double> values;
  values.reserve(pixels.size());
  double total = 0.0;
  for (const int idx : pixels) {
    const double v = img.values[static_cast<std::size_t>(idx)];
    values.push_back(v);
    total += v;
  }
  if (total == 0.0) return missing_value();
  const double median = median_of(values);
  double deviation = 0.0;
  for (const double v : values) deviation += std::abs(v - median);
  return deviation / total;
}

double regional_ventilation_delay(const ImpedanceCurve& ric, BreathCycle cycle,
                                  double threshold) {
  const int n = static_cast<int>(ric.values.size());
  if (cycle.begin_insp < 0 || cycle.end_insp >= n ||
      cycle.begin_insp >= cycle.end_insp) {
    throw DataError("cycle outside regional curve of length " + std::to_string(n));
  }
  // The threshold is relative to the regional swing over the window
  // (window minimum to maximum), so a region that leads the global
  // inspiration start reports zero delay.
  double base = ric.values[static_cast<std::size_t>(cycle.begin_insp)];
  double peak = base;
  for (int t = cycle.begin_insp; t <= cycle.end_insp; ++t) {
    base = std::min(base, ric.values[static_cast<std::size_t>(t)]);
    peak = std::max(peak, ric.values[static_cast<std::size_t>(t)]);
  }
  if (peak == base) return missing_value();
  const double target = base + threshold * (peak - base);
  int crossing = cycle.end_insp;
  for (int t = cycle.begin_insp; t <= cycle.end_insp; ++t) {
    if (ric.values[static_cast<std::size_t>(t)] >= target) {
      crossing = t;
      break;
    }
  }
  return 100.0 * (crossing - cycle.begin_insp) / (cycle.end_insp - cycle.begin_insp);
}

double curve_correlation(const ImpedanceCurve& a, const ImpedanceCurve& b,
                         BreathCycle cycle) {
  const int n = static_cast<int>(std::min(a.values.size(), b.values.size()));
  if (cycle.begin_insp < 0 || cycle.end_insp >= n ||
      cycle.begin_insp >= cycle.end_insp) {
    throw DataError("cycle outside curves of length " + std::to_string(n));
  }
  const int len = cycle.end_insp - cycle.begin_insp + 1;
  if (len < 3) return missing_value();
  double mean_a = 0.0;
  double mean_b = 0.0;
  for (int t = cycle.begin_insp; t <= cycle.end_insp; ++t) {
    mean_a += a.values[static_cast<std::size_t>(t)];
    mean_b += b.values[static_cast<std::size_t>(t)];
  }
  mean_a /= len;
  mean_b /= len;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (int t = cycle.begin_insp; t <= cycle.end_insp; ++t) {
    const double da = a.values[static_cast<std::size_t>(t)] - mean_a;
    const double db = b.values[static_cast<std::size_t>(t)] - mean_b;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return missing_value();
  return sab / std::sqrt(saa * sbb);
}

const char* family_token(FeatureFamily family) {
  switch (family) {
    case FeatureFamily::kRatio: return "ratio";
    case FeatureFamily::kCv: return "CV";
    case FeatureFamily::kGi: return "GI";
    case FeatureFamily::kRvd: return "RVD";
    case FeatureFamily::kCorr: return "corr";
  }
  return "?";
}

FeatureFamily parse_family(std::string_view token) {
  const std::string t = to_lower(token);
  if (t == "ratio") return FeatureFamily::kRatio;
  if (t == "cv") return FeatureFamily::kCv;
  if (t == "gi") return FeatureFamily::kGi;
  if (t == "rvd") return FeatureFamily::kRvd;
  if (t == "corr") return FeatureFamily::kCorr;
  throw DataError("unknown feature family '" + std::string(token) + "'");
}

FeatureCatalog::FeatureCatalog(std::vector<FeatureDescriptor> features)
    : features_(std::move(features)) {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const auto& f = features_[i];
    if (f.name.empty()) throw DataError("feature with empty name");
    if (f.operand_a.empty()) {
      throw DataError("feature '" + f.name + "' has no operand");
    }
    const bool binary = f.family == FeatureFamily::kRatio ||
                        f.family == FeatureFamily::kCorr;
    if (binary == f.operand_b.empty()) {
      throw DataError("feature '" + f.name + "': " +
                      std::string(binary ? "missing" : "unexpected") +
                      " second operand");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (features_[j].name == f.name) {
        throw DataError("duplicate feature name '" + f.name + "'");
      }
    }
  }
}

namespace {

/// Unordered pairs of family members, in canonical member order.
std::vector<std::pair<std::string, std::string>> family_pairs(
    const std::vector<std::string_view>& members) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      pairs.emplace_back(std::string(members[i]), std::string(members[j]));
    }
  }
  return pairs;
}

}  // namespace

FeatureCatalog FeatureCatalog::default_catalog(const RoiAtlas& atlas) {
  for (const auto name : RoiAtlas::region_names()) {
    if (!atlas.has_region(name)) {
      throw DataError("atlas is missing standard region '" + std::string(name) +
                      "'");
    }
  }
  const auto& names = RoiAtlas::region_names();
  std::vector<std::string_view> non_global(names.begin() + 1, names.end());

  std::vector<std::pair<std::string, std::string>> pairings;
  pairings.emplace_back("right", "left");
  pairings.emplace_back("anterior", "posterior");
  for (const auto& family : {std::vector<std::string_view>{"quadrant1", "quadrant2",
                                                           "quadrant3", "quadrant4"},
                             std::vector<std::string_view>{"horizontalA", "horizontalMA",
                                                           "horizontalMP", "horizontalP"},
                             std::vector<std::string_view>{"verticalR", "verticalMR",
                                                           "verticalML", "verticalL"}}) {
    for (auto& p : family_pairs(family)) pairings.push_back(std::move(p));
  }

  std::vector<FeatureDescriptor> features;
  features.reserve(106);
  for (const auto& [a, b] : pairings) {
    features.push_back({"ratio_" + a + "_" + b, FeatureFamily::kRatio, a, b});
  }
  for (const auto region : names) {
    features.push_back({"CV_" + std::string(region), FeatureFamily::kCv,
                        std::string(region), ""});
  }
  for (const auto region : names) {
    features.push_back({"GI_" + std::string(region), FeatureFamily::kGi,
                        std::string(region), ""});
  }
  for (const auto region : non_global) {
    features.push_back({"RVD_" + std::string(region), FeatureFamily::kRvd,
                        std::string(region), ""});
  }
  for (const auto region : non_global) {
    features.push_back({"corr_global_" + std::string(region), FeatureFamily::kCorr,
                        "global", std::string(region)});
  }
  for (const auto& [a, b] : pairings) {
    features.push_back({"corr_" + a + "_" + b, FeatureFamily::kCorr, a, b});
  }
  return FeatureCatalog(std::move(features));
}

int FeatureCatalog::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> FeatureCatalog::names() const {
  std::vector<std::string> out;
  out.reserve(features_.size());
  for (const auto& f : features_) out.push_back(f.name);
  return out;
}

std::uint64_t FeatureCatalog::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&h](std::string_view s) {
    for (const char c : s) {
      h ^= static_cast<std::uint8_t>(c);
      h *= 0x100000001b3ull;
    }
    h ^= 0x1F;
    h *= 0x100000001b3ull;
  };
  for (const auto& f : features_) {
    feed(f.name);
    feed(family_token(f.family));
    feed(f.operand_a);
    feed(f.operand_b);
  }
  return h;
}

FeatureCatalog FeatureCatalog::read_csv(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(path.string() + ": empty catalog file");
  }
  const auto header = split_csv_line(line);
  if (header.size() != 4 || to_lower(header[0]) != "name" ||
      to_lower(header[1]) != "family" || to_lower(header[2]) != "operand_a" ||
      to_lower(header[3]) != "operand_b") {
    throw FormatError(path.string() +
                      ": line 1: expected header name,family,operand_a,operand_b");
  }
  std::vector<FeatureDescriptor> features;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    const std::string where = path.string() + ": line " + std::to_string(line_no);
    if (fields.size() != 4) {
      throw FormatError(where + ": expected 4 columns");
    }
    FeatureDescriptor f;
    f.name = fields[0];
    try {
      f.family = parse_family(fields[1]);
    } catch (const DataError& e) {
      throw FormatError(where + ": " + e.what());
    }
    f.operand_a = fields[2];
    f.operand_b = fields[3];
    features.push_back(std::move(f));
  }
  try {
    return FeatureCatalog(std::move(features));
  } catch (const DataError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void FeatureCatalog::write_csv(const std::filesystem::path& path) const {
  std::string out = "name,family,operand_a,operand_b\n";
  for (const auto& f : features_) {
    out += f.name;
    out += ',';
    out += family_token(f.family);
    out += ',';
    out += f.operand_a;
    out += ',';
    out += f.operand_b;
    out += '\n';
  }
  atomic_write_file(path, out);
}

namespace {

struct CycleContext {
  FeitImage image;
  // Windowed curves for all 17 regions, window-relative (index 0 is
  // begin-inspiration), in canonical region order.
  std::array<ImpedanceCurve, RoiAtlas::kRegionCount> curves;
  BreathCycle window;  // window-relative cycle {0, end - begin}
};

CycleContext build_cycle_context(const FrameSequence& seq, const RoiAtlas& atlas,
                                 BreathCycle cycle) {
  CycleContext ctx;
  ctx.image = feit_image(seq, cycle);
  ctx.window = {0, cycle.end_insp - cycle.begin_insp};
  const auto& names = RoiAtlas::region_names();
  const int len = cycle.end_insp - cycle.begin_insp + 1;
  for (int r = 0; r < RoiAtlas::kRegionCount; ++r) {
    ctx.curves[static_cast<std::size_t>(r)].values.assign(
        static_cast<std::size_t>(len), 0.0);
    ctx.curves[static_cast<std::size_t>(r)].fps = seq.fps();
    ctx.curves[static_cast<std::size_t>(r)].roi_name = std::string(names[r]);
  }
  for (int t = cycle.begin_insp; t <= cycle.end_insp; ++t) {
    const auto frame = seq.frame(t);
    for (int r = 0; r < RoiAtlas::kRegionCount; ++r) {
      double sum = 0.0;
      for (const int idx : atlas.region(r)) {
        sum += frame[static_cast<std::size_t>(idx)];
      }
      ctx.curves[static_cast<std::size_t>(r)]
          .values[static_cast<std::size_t>(t - cycle.begin_insp)] = sum;
    }
  }
  return ctx;
}

int region_index(std::string_view name) {
  const auto& names = RoiAtlas::region_names();
  for (int i = 0; i < RoiAtlas::kRegionCount; ++i) {
    if (names[static_cast<std::size_t>(i)] == name) return i;
  }
  throw DataError("catalog references region '" + std::string(name) +
                  "' which is not a standard atlas region");
}

FeatureVector compute_cycle_features(const FrameSequence& seq,
                                     const RoiAtlas& atlas, BreathCycle cycle,
                                     const FeatureCatalog& catalog,
                                     const ExtractOptions& options) {
  const CycleContext ctx = build_cycle_context(seq, atlas, cycle);
  FeatureVector vec;
  vec.values.resize(catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const FeatureDescriptor& f = catalog.at(i);
    double value = missing_value();
    switch (f.family) {
      case FeatureFamily::kRatio:
        value = ventilation_ratio(ctx.image, atlas, f.operand_a, f.operand_b);
        break;
      case FeatureFamily::kCv:
        value = coefficient_of_variation(ctx.image, atlas, f.operand_a);
        break;
      case FeatureFamily::kGi:
        value = global_inhomogeneity(ctx.image, atlas, f.operand_a);
        break;
      case FeatureFamily::kRvd:
        value = regional_ventilation_delay(
            ctx.curves[static_cast<std::size_t>(region_index(f.operand_a))],
            ctx.window, options.rvd_threshold);
        break;
      case FeatureFamily::kCorr:
        value = curve_correlation(
            ctx.curves[static_cast<std::size_t>(region_index(f.operand_a))],
            ctx.curves[static_cast<std::size_t>(region_index(f.operand_b))],
            ctx.window);
        break;
    }
    vec.values[i] = value;
  }
  return vec;
}

ExtractResult assemble_result(std::vector<FeatureVector> raw,
                              const FeatureCatalog& catalog,
                              const ExtractOptions& options) {
  ExtractResult result;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::size_t missing = 0;
    for (const double v : raw[i].values) {
      if (is_missing(v)) ++missing;
    }
    const double frac =
        catalog.size() == 0 ? 0.0
                            : static_cast<double>(missing) /
                                  static_cast<double>(catalog.size());
    if (frac > options.max_missing_frac) {
      ++result.dropped;
      result.warnings.push_back(
          "cycle " + std::to_string(i) + " dropped: " + std::to_string(missing) +
          "/" + std::to_string(catalog.size()) + " features missing");
      continue;
    }
    result.cycle_index.push_back(static_cast<int>(i));
    result.vectors.push_back(std::move(raw[i]));
  }
  return result;
}

}  // namespace

ExtractResult extract_features_serial(const FrameSequence& seq,
                                      const RoiAtlas& atlas,
                                      std::span<const BreathCycle> cycles,
                                      const FeatureCatalog& catalog,
                                      const ExtractOptions& options) {
  std::vector<FeatureVector> raw(cycles.size());
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    raw[i] = compute_cycle_features(seq, atlas, cycles[i], catalog, options);
  }
  return assemble_result(std::move(raw), catalog, options);
}

ExtractResult extract_features(const FrameSequence& seq, const RoiAtlas& atlas,
                               std::span<const BreathCycle> cycles,
                               const FeatureCatalog& catalog,
                               const ExtractOptions& options, int jobs) {
  // Validate cycles up front so parallel workers cannot throw.
  for (const BreathCycle& c : cycles) {
    if (c.begin_insp < 0 || c.end_insp >= seq.frame_count() ||
        c.begin_insp >= c.end_insp) {
      throw DataError("breath cycle [" + std::to_string(c.begin_insp) + "," +
                      std::to_string(c.end_insp) + "] out of bounds");
    }
  }
  std::vector<FeatureVector> raw(cycles.size());
  const int n = static_cast<int>(cycles.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : omp_get_max_threads())
#endif
  for (int i = 0; i < n; ++i) {
    raw[static_cast<std::size_t>(i)] = compute_cycle_features(
        seq, atlas, cycles[static_cast<std::size_t>(i)], catalog, options);
  }
  return assemble_result(std::move(raw), catalog, options);
}

}  // namespace eitvent
