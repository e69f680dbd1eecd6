// Seeded synthetic-EEG generator: AR(2) background noise plus a mu-band
// sinusoid whose contralateral attenuation (ERD) encodes the trial class,
// scaled by per-subject and per-channel gains. Produces archives in the
// dataio format plus analytic ground-truth sidecars.
#ifndef RESTCAL_SYNTH_HPP
#define RESTCAL_SYNTH_HPP

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "restcal/dataio.hpp"

namespace restcal::synth {

struct SynthSpec {
  std::size_t n_subjects = 8;
  std::size_t trials_per_class = 72;
  double sample_rate_hz = 250.0;
  std::vector<std::string> channels = dataio::standard_selected_channels();

  // AR(2): x[t] = a1*x[t-1] + a2*x[t-2] + e[t]; defaults place the poles
  // at 0.95 and 0.75 for a 1/f-like background spectrum.
  double ar_a1 = 1.7;
  double ar_a2 = -0.7125;
  double noise_std = 1.0;

  double mu_freq_hz = 10.5;
  double mu_amplitude = 4.0;
  double erd_contrast = 0.5;  // contralateral mu attenuation factor in [0, 1)

  double gain_min = 0.25;  // per-subject gain, log-uniform
  double gain_max = 4.0;
  double channel_gain_jitter = 0.8;  // per-channel gain = exp(U(-j, j))

  double rest_eyes_open_s = 120.0;
  double rest_eyes_closed_s = 120.0;
  double rest_eye_movement_s = 60.0;

  double trial_period_s = 5.0;    // cue-to-cue spacing
  double cue_offset_s = 1.0;      // gap between rest end and first cue
  double epoch_active_s = 4.0;    // ERD active window after each cue

  double eyes_closed_mu_scale = 1.25;
  double eye_movement_noise_scale = 1.3;

  double band_low_hz = 8.0;  // analysis band used for the ground truth
  double band_high_hz = 30.0;

  std::uint64_t seed = 20260825;
};

void validate(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json synth_spec_to_json(const SynthSpec& spec);

// Analytic band-power levels the generator is constructed to realize,
// independent of any Welch estimate.
struct SubjectGroundTruth {
  std::string subject_id;
  double gain = 1.0;
  std::vector<double> channel_gains;        // layout order
  std::vector<double> band_power_left;      // task epochs, class left
  std::vector<double> band_power_right;     // task epochs, class right
  std::vector<double> band_power_rest_open; // eyes-open resting
  double band_low_hz = 8.0;
  double band_high_hz = 30.0;
};

nlohmann::json ground_truth_to_json(const SubjectGroundTruth& truth);

struct SubjectSynthesis {
  dataio::ContinuousRecording recording;
  SubjectGroundTruth truth;
};

// Deterministic per (spec.seed, subject_index); samples are snapped to
// float32 so in-memory data and a written/reloaded archive agree bit-for-bit.
SubjectSynthesis generate_subject(const SynthSpec& spec,
                                  std::size_t subject_index);

// Writes one archive directory per subject plus ground_truth.json sidecars
// and a dataset.json manifest; returns the subject ids in order.
std::vector<std::string> generate_dataset(const SynthSpec& spec,
                                          const std::filesystem::path& out_dir);

// One-sided AR(2) power spectral density integrated over [low, high] Hz for
// unit innovation variance (trapezoid on a fine grid).
double ar_band_power_unit(double a1, double a2, double sample_rate_hz,
                          double low_hz, double high_hz);

// Deterministic helpers shared with tests: explicit Box-Muller and
// Fisher-Yates so the byte stream does not depend on the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed_lo, std::uint64_t seed_hi = 0,
               std::uint64_t stream = 0);
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();   // standard normal via Box-Muller
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

template <typename T>
void fisher_yates_shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j =
        static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(v[i - 1], v[j < i ? j : i - 1]);
  }
}

}  // namespace restcal::synth

#endif  // RESTCAL_SYNTH_HPP
