#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "eitvent/curves.hpp"
#include "eitvent/frame_sequence.hpp"
#include "eitvent/manifest.hpp"

namespace eitvent {

enum class BreathWaveform : std::uint8_t {
  /// Contiguous raised-cosine bumps; sharp extrema, closed-form RVD.
  kRaisedCosine,
  /// Linear rise over insp_fraction of the period, flat hold to the
  /// cycle end, instantaneous reset. Regional delays shift the onset,
  /// which makes planted delays recoverable as RVD shifts.
  kLinearRamp,
};

struct Ellipse {
  double center_row = 0.0;
  double center_col = 0.0;
  double radius_row = 0.0;
  double radius_col = 0.0;
};

/// Parametric thorax phantom: two elliptical lung amplitude domes
/// breathing a shared waveform with per-pixel delays, multiplicative
/// inhomogeneity, optional amplitude dropout and white sensor noise.
struct PhantomSpec {
  std::string subject_id = "phantom";
  Label label = Label::kHealthy;

  int width = 32;
  int height = 32;
  double fps = 16.5;
  double breathing_rate_hz = 0.4;
  int tidal_cycles = 3;
  int deep_cycles = 3;
  double deep_amplitude_factor = 2.0;
  BreathWaveform waveform = BreathWaveform::kRaisedCosine;
  double insp_fraction = 0.75;  // linear-ramp rise fraction of the period

  /// Zero radii select grid-proportional defaults.
  Ellipse right_lung;
  Ellipse left_lung;
  double right_amplitude = 1.0;
  double left_amplitude = 1.0;

  /// Delay field in seconds: linear anterior-to-posterior gradient, a
  /// step applied to the posterior half, and a per-lung offset. Delays
  /// must stay below one breathing period.
  double delay_anterior_s = 0.0;
  double delay_posterior_s = 0.0;
  double posterior_step_delay_s = 0.0;
  double right_delay_s = 0.0;
  double left_delay_s = 0.0;

  double inhomogeneity = 0.0;     // relative per-pixel amplitude jitter
  double dropout_fraction = 0.0;  // fraction of lung pixels knocked to 15%
  double noise_level = 0.0;       // noise std / peak amplitude
  std::uint64_t seed = 1;
};

struct ExpectedFeature {
  std::string name;
  double value = 0.0;
  double abs_tol = 0.0;
  double rel_tol = 0.0;
};

struct PhantomRecording {
  FrameSequence frames;
  /// Ground-truth cycles, derived from the noise-free global curve.
  std::vector<BreathCycle> cycles;
  /// Feature values the plant can promise (with tolerances); only
  /// emitted for configurations where the value follows from the
  /// amplitude maps (uniform delay field).
  std::vector<ExpectedFeature> expected;
};

PhantomRecording generate_recording(const PhantomSpec& spec);

void write_expected_json(std::span<const ExpectedFeature> expected,
                         const std::filesystem::path& path);
std::vector<ExpectedFeature> read_expected_json(const std::filesystem::path& path);

struct CohortParams {
  int healthy_subjects = 5;
  int nonhealthy_subjects = 11;
  int recordings_per_healthy = 13;
  int recordings_per_nonhealthy = 17;
  /// Grid, timing, cycle counts and noise for every recording.
  PhantomSpec base;
  std::uint64_t seed = 1;

  CohortParams() { base.noise_level = 0.01; }
};

struct GeneratedCohort {
  CohortManifest manifest;
  std::filesystem::path manifest_path;
  int total_cycles = 0;
};

/// Writes EITF recordings, ground-truth annotation CSVs, per-recording
/// expected-feature JSONs and the manifest. Healthy subjects draw mild,
/// non-healthy subjects draw strong subject-level pathology biases, so
/// inter-subject variability exceeds intra-subject variability.
GeneratedCohort generate_cohort(const CohortParams& params,
                                const std::filesystem::path& out_dir,
                                int jobs = 1);

}  // namespace eitvent
