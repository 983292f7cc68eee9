#include "eitvent/curves.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eitvent/errors.hpp"
#include "eitvent/util.hpp"

namespace eitvent {

namespace {

ImpedanceCurve sum_curve(const FrameSequence& seq, const std::vector<int>& pixels,
                         std::string roi_name) {
  const int n = seq.frame_count();
  ImpedanceCurve curve;
  curve.values.resize(static_cast<std::size_t>(n));
  curve.fps = seq.fps();
  curve.roi_name = std::move(roi_name);
  for (int t = 0; t < n; ++t) {
    const auto frame = seq.frame(t);
    double sum = 0.0;
    for (const int idx : pixels) sum += frame[static_cast<std::size_t>(idx)];
    curve.values[static_cast<std::size_t>(t)] = sum;
  }
  return curve;
}

void check_grid(const FrameSequence& seq, const RoiAtlas& atlas) {
  if (seq.width() != atlas.width() || seq.height() != atlas.height()) {
    throw DataError("atlas grid " + std::to_string(atlas.width()) + "x" +
                    std::to_string(atlas.height()) + " does not match recording " +
                    std::to_string(seq.width()) + "x" +
                    std::to_string(seq.height()));
  }
}

}  // namespace

ImpedanceCurve global_curve(const FrameSequence& seq, const RoiAtlas& atlas) {
  check_grid(seq, atlas);
  return sum_curve(seq, atlas.global(), "global");
}

ImpedanceCurve regional_curve(const FrameSequence& seq, const RoiAtlas& atlas,
                              std::string_view roi_name) {
  check_grid(seq, atlas);
  return sum_curve(seq, atlas.region(roi_name), std::string(roi_name));
}

std::vector<double> moving_average(const std::vector<double>& values, int window) {
  if (window <= 1) return values;
  std::vector<double> out(values.size());
  const int n = static_cast<int>(values.size());
  const int half = window / 2;
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += values[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = sum / (hi - lo + 1);
  }
  return out;
}

namespace {

/// Local maxima with plateau support; a plateau peak reports its last
/// index (the instant just before the descent, i.e. end-inspiration).
std::vector<int> local_maxima(const std::vector<double>& v) {
  std::vector<int> peaks;
  const int n = static_cast<int>(v.size());
  int i = 1;
  while (i < n - 1) {
    if (v[i] > v[i - 1]) {
      int j = i;
      while (j + 1 < n && v[j + 1] == v[j]) ++j;
      if (j + 1 < n && v[j + 1] < v[j]) peaks.push_back(j);
      i = j + 1;
    } else {
      ++i;
    }
  }
  return peaks;
}

double prominence(const std::vector<double>& v, int peak) {
  const double h = v[static_cast<std::size_t>(peak)];
  double left_min = h;
  for (int i = peak - 1; i >= 0; --i) {
    const double x = v[static_cast<std::size_t>(i)];
    if (x > h) break;
    left_min = std::min(left_min, x);
  }
  double right_min = h;
  for (int i = peak + 1; i < static_cast<int>(v.size()); ++i) {
    const double x = v[static_cast<std::size_t>(i)];
    if (x > h) break;
    right_min = std::min(right_min, x);
  }
  return h - std::max(left_min, right_min);
}

}  // namespace

std::vector<BreathCycle> detect_breaths(const ImpedanceCurve& gic,
                                        const DetectOptions& options) {
  const std::vector<double>& raw = gic.values;
  if (raw.size() < 3) return {};
  std::vector<double> v = raw;
  if (options.smooth) {
    const int window = std::max(1, static_cast<int>(std::lround(gic.fps / 10.0)));
    v = moving_average(raw, window);
  }

  const auto [min_it, max_it] = std::minmax_element(v.begin(), v.end());
  const double range = *max_it - *min_it;
  if (range <= 0.0) return {};
  const double min_prominence = options.min_prominence_frac * range;

  std::vector<int> peaks;
  for (const int p : local_maxima(v)) {
    if (prominence(v, p) >= min_prominence) peaks.push_back(p);
  }

  std::vector<BreathCycle> cycles;
  int previous_peak = 0;
  bool have_previous = false;
  for (const int peak : peaks) {
    const int lo = have_previous ? previous_peak : 0;
    // Late argmin: with a flat valley, inspiration starts where the
    // rise begins.
    int begin = lo;
    double best = v[static_cast<std::size_t>(lo)];
    for (int t = lo; t <= peak; ++t) {
      if (v[static_cast<std::size_t>(t)] <= best) {
        best = v[static_cast<std::size_t>(t)];
        begin = t;
      }
    }
    previous_peak = peak;
    have_previous = true;
    if (begin >= peak) continue;
    const double duration_s = (peak - begin) / gic.fps;
    if (duration_s < options.min_duration_s) continue;
    cycles.push_back({begin, peak});
  }
  return cycles;
}

std::vector<BreathCycle> read_annotations(const std::filesystem::path& path,
                                          int frame_count) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(path.string() + ": empty annotation file");
  }
  const auto header = split_csv_line(line);
  if (header.size() != 2 || to_lower(header[0]) != "begin_insp_frame" ||
      to_lower(header[1]) != "end_insp_frame") {
    throw FormatError(path.string() +
                      ": line 1: expected header begin_insp_frame,end_insp_frame");
  }

  std::vector<BreathCycle> cycles;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    const std::string where = path.string() + ": line " + std::to_string(line_no);
    if (fields.size() != 2) {
      throw FormatError(where + ": expected two columns");
    }
    BreathCycle cycle{parse_int(fields[0], where), parse_int(fields[1], where)};
    if (cycle.begin_insp >= cycle.end_insp) {
      throw FormatError(where + ": begin frame " +
                        std::to_string(cycle.begin_insp) +
                        " must precede end frame " +
                        std::to_string(cycle.end_insp));
    }
    if (cycle.begin_insp < 0 ||
        (frame_count > 0 && cycle.end_insp >= frame_count)) {
      throw FormatError(where + ": cycle [" + std::to_string(cycle.begin_insp) +
                        "," + std::to_string(cycle.end_insp) +
                        "] outside recording of " + std::to_string(frame_count) +
                        " frames");
    }
    cycles.push_back(cycle);
  }

  std::sort(cycles.begin(), cycles.end(),
            [](const BreathCycle& a, const BreathCycle& b) {
              return a.begin_insp < b.begin_insp;
            });
  for (std::size_t i = 1; i < cycles.size(); ++i) {
    if (cycles[i].begin_insp < cycles[i - 1].end_insp) {
      throw FormatError(path.string() + ": cycles [" +
                        std::to_string(cycles[i - 1].begin_insp) + "," +
                        std::to_string(cycles[i - 1].end_insp) + "] and [" +
                        std::to_string(cycles[i].begin_insp) + "," +
                        std::to_string(cycles[i].end_insp) + "] overlap");
    }
  }
  return cycles;
}

void write_annotations(std::span<const BreathCycle> cycles,
                       const std::filesystem::path& path) {
  std::string out = "begin_insp_frame,end_insp_frame\n";
  for (const BreathCycle& c : cycles) {
    out += std::to_string(c.begin_insp);
    out += ',';
    out += std::to_string(c.end_insp);
    out += '\n';
  }
  atomic_write_file(path, out);
}

}  // namespace eitvent
