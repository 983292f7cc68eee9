#include "eitvent/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "eitvent/errors.hpp"
#include "eitvent/features.hpp"
#include "eitvent/rng.hpp"
#include "eitvent/roi_atlas.hpp"
#include "eitvent/util.hpp"

namespace eitvent {

namespace {

Ellipse default_right_lung(int width, int height) {
  return {0.52 * height, 0.31 * width, 0.30 * height, 0.17 * width};
}

Ellipse default_left_lung(int width, int height) {
  return {0.52 * height, 0.69 * width, 0.30 * height, 0.17 * width};
}

double dome(const Ellipse& e, double row, double col) {
  const double dr = (row - e.center_row) / e.radius_row;
  const double dc = (col - e.center_col) / e.radius_col;
  return std::max(0.0, 1.0 - dr * dr - dc * dc);
}

void validate_spec(const PhantomSpec& spec) {
  if (spec.width < 4 || spec.height < 4) {
    throw DataError("phantom grid must be at least 4x4");
  }
  if (!(spec.fps > 0.0) || !(spec.breathing_rate_hz > 0.0)) {
    throw DataError("phantom fps and breathing rate must be positive");
  }
  if (spec.tidal_cycles + spec.deep_cycles < 1) {
    throw DataError("phantom needs at least one breath cycle");
  }
  if (spec.noise_level < 0.0) throw DataError("noise level must be >= 0");
  if (spec.insp_fraction <= 0.0 || spec.insp_fraction >= 1.0) {
    throw DataError("insp_fraction must lie in (0, 1)");
  }
  const double period = 1.0 / spec.breathing_rate_hz;
  for (const double delay :
       {spec.delay_anterior_s, spec.delay_posterior_s,
        spec.posterior_step_delay_s, spec.right_delay_s, spec.left_delay_s}) {
    if (std::abs(delay) >= period) {
      throw DataError("regional delays must stay below one breathing period");
    }
  }
}

struct PhantomMaps {
  std::vector<double> amplitude;       // per pixel
  std::vector<double> delay_frames;    // per pixel
  double peak_amplitude = 0.0;
};

PhantomMaps build_maps(const PhantomSpec& spec, const Ellipse& right,
                       const Ellipse& left) {
  const int w = spec.width;
  const int h = spec.height;
  PhantomMaps maps;
  maps.amplitude.resize(static_cast<std::size_t>(w) * h, 0.0);
  maps.delay_frames.resize(static_cast<std::size_t>(w) * h, 0.0);

  Rng amp_rng(mix_seed(spec.seed, 0xA3Du));
  Rng drop_rng(mix_seed(spec.seed, 0xD20Fu));

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t idx = static_cast<std::size_t>(r) * w + c;
      const double row = r + 0.5;
      const double col = c + 0.5;
      const double from_right = spec.right_amplitude * dome(right, row, col);
      const double from_left = spec.left_amplitude * dome(left, row, col);
      double a = from_right + from_left;

      // Streams are consumed for every pixel so maps stay comparable
      // across parameter settings.
      const double jitter = amp_rng.uniform(-1.0, 1.0);
      const double drop = drop_rng.next_double();
      if (a > 0.0) {
        a *= 1.0 + spec.inhomogeneity * jitter;
        if (drop < spec.dropout_fraction) a *= 0.15;
      }
      maps.amplitude[idx] = a;
      maps.peak_amplitude = std::max(maps.peak_amplitude, a);

      const double gradient =
          spec.delay_anterior_s +
          (spec.delay_posterior_s - spec.delay_anterior_s) * (row / h);
      const double step = r >= h / 2 ? spec.posterior_step_delay_s : 0.0;
      const double lung_offset =
          from_right >= from_left ? spec.right_delay_s : spec.left_delay_s;
      maps.delay_frames[idx] = (gradient + step + lung_offset) * spec.fps;
    }
  }
  return maps;
}

bool uniform_delay_field(const PhantomSpec& spec) {
  return spec.delay_anterior_s == spec.delay_posterior_s &&
         spec.posterior_step_delay_s == 0.0 &&
         spec.right_delay_s == spec.left_delay_s;
}

std::vector<ExpectedFeature> expected_sketch(const PhantomSpec& spec,
                                             const PhantomMaps& maps) {
  std::vector<ExpectedFeature> expected;
  if (!uniform_delay_field(spec)) return expected;
  if (spec.width % 4 != 0 || spec.height % 4 != 0) return expected;

  const RoiAtlas atlas = RoiAtlas::build(spec.width, spec.height);
  auto region_amp_sum = [&](std::string_view name) {
    double sum = 0.0;
    for (const int idx : atlas.region(name)) {
      sum += maps.amplitude[static_cast<std::size_t>(idx)];
    }
    return sum;
  };

  const double noise = spec.noise_level;
  const double ratio_rel = std::max(1e-6, 5.0 * noise);
  const double corr_abs = noise > 0.0 ? 0.02 : 1e-6;

  const double right_sum = region_amp_sum("right");
  const double left_sum = region_amp_sum("left");
  if (left_sum > 0.0 && right_sum > 0.0) {
    expected.push_back({"ratio_right_left", right_sum / left_sum, 0.0, ratio_rel});
  }

  // GI and CV of the fEIT image equal those of the amplitude map when
  // the swing factor is uniform across pixels.
  const auto& global = atlas.global();
  std::vector<double> values;
  values.reserve(global.size());
  double total = 0.0;
  for (const int idx : global) {
    values.push_back(maps.amplitude[static_cast<std::size_t>(idx)]);
    total += values.back();
  }
  if (total > 0.0 && values.size() > 1) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    const double median = sorted.size() % 2 == 1
                              ? sorted[mid]
                              : (sorted[mid - 1] + sorted[mid]) / 2.0;
    double deviation = 0.0;
    for (const double v : values) deviation += std::abs(v - median);
    expected.push_back({"GI_global", deviation / total,
                        std::max(1e-6, 4.0 * noise), 0.02});

    const double mean = total / static_cast<double>(values.size());
    double ss = 0.0;
    for (const double v : values) ss += (v - mean) * (v - mean);
    const double cv =
        std::sqrt(ss / (static_cast<double>(values.size()) - 1.0)) / mean;
    expected.push_back({"CV_global", cv, std::max(1e-6, 4.0 * noise), 0.02});
  }

  const FeatureCatalog catalog = FeatureCatalog::default_catalog(atlas);
  for (const auto& f : catalog.features()) {
    if (f.family == FeatureFamily::kCorr) {
      expected.push_back({f.name, 1.0, corr_abs, 0.0});
    }
  }
  return expected;
}

}  // namespace

PhantomRecording generate_recording(const PhantomSpec& spec) {
  validate_spec(spec);
  const Ellipse right = spec.right_lung.radius_row > 0.0
                            ? spec.right_lung
                            : default_right_lung(spec.width, spec.height);
  const Ellipse left = spec.left_lung.radius_row > 0.0
                           ? spec.left_lung
                           : default_left_lung(spec.width, spec.height);
  const PhantomMaps maps = build_maps(spec, right, left);
  if (maps.peak_amplitude <= 0.0) {
    throw DataError("phantom amplitude map is identically zero");
  }

  const int frames_per_cycle = std::max(
      4, static_cast<int>(std::lround(spec.fps / spec.breathing_rate_hz)));
  const int n_cycles = spec.tidal_cycles + spec.deep_cycles;
  const int n_frames = frames_per_cycle * n_cycles;
  const std::size_t ppf =
      static_cast<std::size_t>(spec.width) * static_cast<std::size_t>(spec.height);

  std::vector<double> clean(static_cast<std::size_t>(n_frames) * ppf, 0.0);
  const double period_frames = static_cast<double>(frames_per_cycle);
  const double insp_frames = spec.insp_fraction * period_frames;
  constexpr double two_pi = 2.0 * std::numbers::pi;

  for (int t = 0; t < n_frames; ++t) {
    const int cycle = t / frames_per_cycle;
    const double factor =
        cycle < spec.tidal_cycles ? 1.0 : spec.deep_amplitude_factor;
    const double in_cycle = static_cast<double>(t % frames_per_cycle);
    double* frame = clean.data() + static_cast<std::size_t>(t) * ppf;
    for (std::size_t p = 0; p < ppf; ++p) {
      const double a = maps.amplitude[p];
      if (a == 0.0) continue;
      double wave = 0.0;
      if (spec.waveform == BreathWaveform::kRaisedCosine) {
        const double phase =
            two_pi * (static_cast<double>(t) - maps.delay_frames[p]) /
            period_frames;
        wave = (1.0 - std::cos(phase)) / 2.0;
      } else {
        const double v = in_cycle - maps.delay_frames[p];
        wave = std::clamp(v / insp_frames, 0.0, 1.0);
      }
      frame[p] = a * factor * wave;
    }
  }

  // Ground truth from the noise-free global curve, cycle by cycle:
  // end-inspiration is the last frame holding the cycle maximum,
  // begin-inspiration the last minimum before it.
  std::vector<double> gic(static_cast<std::size_t>(n_frames), 0.0);
  for (int t = 0; t < n_frames; ++t) {
    const double* frame = clean.data() + static_cast<std::size_t>(t) * ppf;
    double sum = 0.0;
    for (std::size_t p = 0; p < ppf; ++p) sum += frame[p];
    gic[static_cast<std::size_t>(t)] = sum;
  }
  std::vector<BreathCycle> cycles;
  for (int k = 0; k < n_cycles; ++k) {
    const int lo = k * frames_per_cycle;
    const int hi = (k + 1) * frames_per_cycle - 1;
    int end = lo;
    double peak = gic[static_cast<std::size_t>(lo)];
    for (int t = lo; t <= hi; ++t) {
      if (gic[static_cast<std::size_t>(t)] >= peak) {
        peak = gic[static_cast<std::size_t>(t)];
        end = t;
      }
    }
    int begin = lo;
    double valley = gic[static_cast<std::size_t>(lo)];
    for (int t = lo; t <= end; ++t) {
      if (gic[static_cast<std::size_t>(t)] <= valley) {
        valley = gic[static_cast<std::size_t>(t)];
        begin = t;
      }
    }
    if (begin < end && peak > valley) cycles.push_back({begin, end});
  }

  if (spec.noise_level > 0.0) {
    Rng noise_rng(mix_seed(spec.seed, 0x401EEu));
    const double sigma = spec.noise_level * maps.peak_amplitude;
    for (double& v : clean) v += sigma * noise_rng.normal();
  }
  // Round to f32 so the in-memory pipeline matches EITF files exactly.
  for (double& v : clean) v = static_cast<double>(static_cast<float>(v));

  PhantomRecording recording{
      FrameSequence(spec.width, spec.height, spec.fps, std::move(clean)), cycles,
      expected_sketch(spec, maps)};
  return recording;
}

void write_expected_json(std::span<const ExpectedFeature> expected,
                         const std::filesystem::path& path) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& e : expected) {
    items.push_back({{"name", e.name},
                     {"value", e.value},
                     {"abs_tol", e.abs_tol},
                     {"rel_tol", e.rel_tol}});
  }
  nlohmann::json doc = {{"schema_version", 1}, {"expected", std::move(items)}};
  atomic_write_file(path, doc.dump(2) + "\n");
}

std::vector<ExpectedFeature> read_expected_json(
    const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
    std::vector<ExpectedFeature> out;
    for (const auto& e : doc.at("expected")) {
      out.push_back({e.at("name").get<std::string>(), e.at("value").get<double>(),
                     e.at("abs_tol").get<double>(), e.at("rel_tol").get<double>()});
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": invalid expected-feature JSON: " +
                      e.what());
  }
}

namespace {

struct SubjectProfile {
  double asym_log = 0.0;        // log right/left amplitude imbalance
  double posterior_delay_s = 0.0;
  double inhomogeneity = 0.0;
  double dropout = 0.0;
};

/// Severity 0 is indistinguishable from healthy; the two classes share
/// an overlap band so patient-wise evaluation stays genuinely hard.
SubjectProfile draw_profile(Rng& rng, bool healthy, double period_s) {
  const double severity =
      healthy ? rng.uniform(0.0, 0.28) : rng.uniform(0.0, 1.0);
  SubjectProfile p;
  const double sign = rng.next_double() < 0.5 ? -1.0 : 1.0;
  p.asym_log = sign * severity * rng.uniform(0.4, 1.1);
  p.posterior_delay_s = severity * rng.uniform(0.05, 0.2) * period_s;
  p.inhomogeneity = 0.04 + 0.5 * severity * rng.uniform(0.5, 1.0);
  p.dropout = healthy ? 0.0 : severity * rng.uniform(0.0, 0.3);
  return p;
}

PhantomSpec recording_spec(const CohortParams& params, const SubjectProfile& subject,
                           const std::string& subject_id, Label label,
                           int recording_index, std::uint64_t subject_seed) {
  Rng rec_rng(mix_seed(subject_seed, static_cast<std::uint64_t>(recording_index),
                       0x3EC0u));
  PhantomSpec spec = params.base;
  spec.subject_id = subject_id;
  spec.label = label;
  spec.seed = mix_seed(subject_seed, static_cast<std::uint64_t>(recording_index),
                       0xF4A3u);

  // Within-subject jitter is a third of the subject-level spread.
  const double asym = subject.asym_log + 0.02 * rec_rng.normal();
  spec.right_amplitude = std::exp(asym / 2.0);
  spec.left_amplitude = std::exp(-asym / 2.0);
  spec.delay_posterior_s =
      std::max(0.0, subject.posterior_delay_s * (1.0 + 0.1 * rec_rng.normal()));
  spec.inhomogeneity =
      std::max(0.0, subject.inhomogeneity * (1.0 + 0.1 * rec_rng.normal()));
  spec.dropout_fraction = std::clamp(subject.dropout, 0.0, 0.9);
  return spec;
}

}  // namespace

GeneratedCohort generate_cohort(const CohortParams& params,
                                const std::filesystem::path& out_dir,
                                int jobs) {
  if (params.healthy_subjects < 1 || params.nonhealthy_subjects < 1) {
    throw DataError("cohort needs at least one subject per class");
  }
  if (params.recordings_per_healthy < 1 || params.recordings_per_nonhealthy < 1) {
    throw DataError("cohort needs at least one recording per subject");
  }

  struct Task {
    std::string subject_id;
    Label label;
    int recording_index;
    std::uint64_t subject_seed;
    SubjectProfile profile;
  };
  std::vector<Task> tasks;
  const double period_s = 1.0 / params.base.breathing_rate_hz;

  const int total_subjects = params.healthy_subjects + params.nonhealthy_subjects;
  for (int s = 0; s < total_subjects; ++s) {
    const bool healthy = s < params.healthy_subjects;
    const std::string subject_id =
        (healthy ? "H" : "NH") +
        std::to_string(healthy ? s + 1 : s - params.healthy_subjects + 1);
    const std::uint64_t subject_seed =
        mix_seed(params.seed, static_cast<std::uint64_t>(s), 0x5B1Du);
    Rng subject_rng(subject_seed);
    const SubjectProfile profile = draw_profile(subject_rng, healthy, period_s);
    const int recordings = healthy ? params.recordings_per_healthy
                                   : params.recordings_per_nonhealthy;
    for (int r = 0; r < recordings; ++r) {
      tasks.push_back({subject_id,
                       healthy ? Label::kHealthy : Label::kNonHealthy, r,
                       subject_seed, profile});
    }
  }

  std::filesystem::create_directories(out_dir / "recordings");
  std::vector<int> cycle_counts(tasks.size(), 0);
  std::vector<std::string> errors(tasks.size());

  const int n_tasks = static_cast<int>(tasks.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : omp_get_max_threads())
#endif
  for (int i = 0; i < n_tasks; ++i) {
    const Task& task = tasks[static_cast<std::size_t>(i)];
    try {
      const PhantomSpec spec =
          recording_spec(params, task.profile, task.subject_id, task.label,
                         task.recording_index, task.subject_seed);
      const PhantomRecording recording = generate_recording(spec);
      const std::string stem =
          task.subject_id + "_rec" + std::to_string(task.recording_index + 1);
      const auto dir = out_dir / "recordings";
      write_recording(recording.frames, dir / (stem + ".eitf"));
      write_annotations(recording.cycles, dir / (stem + "_cycles.csv"));
      write_expected_json(recording.expected, dir / (stem + "_expected.json"));
      cycle_counts[static_cast<std::size_t>(i)] =
          static_cast<int>(recording.cycles.size());
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (const auto& err : errors) {
    if (!err.empty()) throw DataError("cohort generation failed: " + err);
  }

  GeneratedCohort cohort;
  CohortManifest relative;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& task = tasks[i];
    const std::string stem =
        task.subject_id + "_rec" + std::to_string(task.recording_index + 1);
    ManifestEntry entry;
    entry.subject_id = task.subject_id;
    entry.label = task.label;
    entry.recording_path =
        std::filesystem::path("recordings") / (stem + ".eitf");
    entry.annotation_path =
        std::filesystem::path("recordings") / (stem + "_cycles.csv");
    relative.entries.push_back(entry);
    // The returned manifest carries resolved paths.
    entry.recording_path = out_dir / entry.recording_path;
    entry.annotation_path = out_dir / entry.annotation_path;
    cohort.manifest.entries.push_back(std::move(entry));
    cohort.total_cycles += cycle_counts[i];
  }
  cohort.manifest_path = out_dir / "manifest.csv";
  write_manifest(relative, cohort.manifest_path);
  return cohort;
}

}  // namespace eitvent
