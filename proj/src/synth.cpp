#include "restcal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <set>
#include <stdexcept>

namespace restcal::synth {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr std::size_t kArWarmup = 500;  // discards the AR start-up transient

const std::set<std::string>& left_hemisphere() {
  static const std::set<std::string> s = {"FC3", "C5", "C3", "C1", "CP3"};
  return s;
}

const std::set<std::string>& right_hemisphere() {
  static const std::set<std::string> s = {"FC4", "C2", "C4", "C6", "CP4"};
  return s;
}

// Left-hand imagery desynchronizes the contralateral (right) hemisphere.
bool erd_applies(const std::string& channel, dataio::TrialClass cls) {
  if (cls == dataio::TrialClass::left) return right_hemisphere().count(channel) > 0;
  return left_hemisphere().count(channel) > 0;
}

double snap_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

Rng::Rng(std::uint64_t seed_lo, std::uint64_t seed_hi, std::uint64_t stream) {
  // seed_seq has a fully specified algorithm, so the stream is identical
  // across standard libraries and platforms.
  std::seed_seq seq{
      static_cast<std::uint32_t>(seed_lo), static_cast<std::uint32_t>(seed_lo >> 32),
      static_cast<std::uint32_t>(seed_hi), static_cast<std::uint32_t>(seed_hi >> 32),
      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double Rng::uniform() {
  // 53 uniformly random mantissa bits in [0, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

void validate(const SynthSpec& spec) {
  if (spec.n_subjects < 1) throw std::invalid_argument("synth: n_subjects < 1");
  if (spec.trials_per_class < 1) {
    throw std::invalid_argument("synth: trials_per_class < 1");
  }
  if (spec.sample_rate_hz <= 0.0) {
    throw std::invalid_argument("synth: sample rate must be positive");
  }
  if (spec.channels.empty()) throw std::invalid_argument("synth: no channels");
  if (!(spec.gain_min > 0.0) || spec.gain_max < spec.gain_min) {
    throw std::invalid_argument("synth: invalid gain range");
  }
  if (spec.erd_contrast < 0.0 || spec.erd_contrast >= 1.0) {
    throw std::invalid_argument("synth: erd_contrast must be in [0, 1)");
  }
  if (spec.channel_gain_jitter < 0.0) {
    throw std::invalid_argument("synth: negative channel_gain_jitter");
  }
  if (spec.noise_std < 0.0 || spec.mu_amplitude < 0.0) {
    throw std::invalid_argument("synth: negative signal amplitude");
  }
  if (spec.rest_eyes_open_s <= 0.0 || spec.rest_eyes_closed_s <= 0.0 ||
      spec.rest_eye_movement_s <= 0.0) {
    throw std::invalid_argument("synth: resting durations must be positive");
  }
  if (spec.trial_period_s < spec.epoch_active_s || spec.epoch_active_s <= 0.0) {
    throw std::invalid_argument("synth: trial period shorter than epoch");
  }
  // AR(2) poles: roots of z^2 - a1 z - a2.
  const std::complex<double> disc =
      std::sqrt(std::complex<double>(spec.ar_a1 * spec.ar_a1 + 4.0 * spec.ar_a2));
  const auto r1 = (spec.ar_a1 + disc) / 2.0;
  const auto r2 = (spec.ar_a1 - disc) / 2.0;
  if (std::abs(r1) >= 1.0 || std::abs(r2) >= 1.0) {
    throw std::invalid_argument("synth: AR(2) coefficients are unstable");
  }
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s;
  s.n_subjects = j.value("n_subjects", s.n_subjects);
  s.trials_per_class = j.value("trials_per_class", s.trials_per_class);
  s.sample_rate_hz = j.value("sample_rate_hz", s.sample_rate_hz);
  if (j.contains("channels")) {
    s.channels = j.at("channels").get<std::vector<std::string>>();
  }
  s.ar_a1 = j.value("ar_a1", s.ar_a1);
  s.ar_a2 = j.value("ar_a2", s.ar_a2);
  s.noise_std = j.value("noise_std", s.noise_std);
  s.mu_freq_hz = j.value("mu_freq_hz", s.mu_freq_hz);
  s.mu_amplitude = j.value("mu_amplitude", s.mu_amplitude);
  s.erd_contrast = j.value("erd_contrast", s.erd_contrast);
  s.gain_min = j.value("gain_min", s.gain_min);
  s.gain_max = j.value("gain_max", s.gain_max);
  s.channel_gain_jitter = j.value("channel_gain_jitter", s.channel_gain_jitter);
  s.rest_eyes_open_s = j.value("rest_eyes_open_s", s.rest_eyes_open_s);
  s.rest_eyes_closed_s = j.value("rest_eyes_closed_s", s.rest_eyes_closed_s);
  s.rest_eye_movement_s = j.value("rest_eye_movement_s", s.rest_eye_movement_s);
  s.trial_period_s = j.value("trial_period_s", s.trial_period_s);
  s.cue_offset_s = j.value("cue_offset_s", s.cue_offset_s);
  s.epoch_active_s = j.value("epoch_active_s", s.epoch_active_s);
  s.eyes_closed_mu_scale = j.value("eyes_closed_mu_scale", s.eyes_closed_mu_scale);
  s.eye_movement_noise_scale =
      j.value("eye_movement_noise_scale", s.eye_movement_noise_scale);
  s.band_low_hz = j.value("band_low_hz", s.band_low_hz);
  s.band_high_hz = j.value("band_high_hz", s.band_high_hz);
  s.seed = j.value("seed", s.seed);
  validate(s);
  return s;
}

nlohmann::json synth_spec_to_json(const SynthSpec& s) {
  nlohmann::json j;
  j["n_subjects"] = s.n_subjects;
  j["trials_per_class"] = s.trials_per_class;
  j["sample_rate_hz"] = s.sample_rate_hz;
  j["channels"] = s.channels;
  j["ar_a1"] = s.ar_a1;
  j["ar_a2"] = s.ar_a2;
  j["noise_std"] = s.noise_std;
  j["mu_freq_hz"] = s.mu_freq_hz;
  j["mu_amplitude"] = s.mu_amplitude;
  j["erd_contrast"] = s.erd_contrast;
  j["gain_min"] = s.gain_min;
  j["gain_max"] = s.gain_max;
  j["channel_gain_jitter"] = s.channel_gain_jitter;
  j["rest_eyes_open_s"] = s.rest_eyes_open_s;
  j["rest_eyes_closed_s"] = s.rest_eyes_closed_s;
  j["rest_eye_movement_s"] = s.rest_eye_movement_s;
  j["trial_period_s"] = s.trial_period_s;
  j["cue_offset_s"] = s.cue_offset_s;
  j["epoch_active_s"] = s.epoch_active_s;
  j["eyes_closed_mu_scale"] = s.eyes_closed_mu_scale;
  j["eye_movement_noise_scale"] = s.eye_movement_noise_scale;
  j["band_low_hz"] = s.band_low_hz;
  j["band_high_hz"] = s.band_high_hz;
  j["seed"] = s.seed;
  return j;
}

double ar_band_power_unit(double a1, double a2, double sample_rate_hz,
                          double low_hz, double high_hz) {
  // One-sided density of x[t] = a1 x[t-1] + a2 x[t-2] + e[t] with unit
  // innovation variance: S(f) = (2 / fs) / |1 - a1 z^-1 - a2 z^-2|^2,
  // z = exp(i 2 pi f / fs); integrate by trapezoid.
  const std::size_t n = 4001;
  const double lo = std::max(0.0, low_hz);
  const double hi = std::min(sample_rate_hz / 2.0, high_hz);
  if (hi <= lo) return 0.0;
  const double step = (hi - lo) / static_cast<double>(n - 1);
  auto density = [&](double f) {
    const double w = kTwoPi * f / sample_rate_hz;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> denom = 1.0 - a1 * z1 - a2 * z1 * z1;
    return (2.0 / sample_rate_hz) / std::norm(denom);
  };
  double acc = 0.5 * (density(lo) + density(hi));
  for (std::size_t i = 1; i + 1 < n; ++i) {
    acc += density(lo + step * static_cast<double>(i));
  }
  return acc * step;
}

SubjectSynthesis generate_subject(const SynthSpec& spec,
                                  std::size_t subject_index) {
  validate(spec);
  if (subject_index >= spec.n_subjects) {
    throw std::out_of_range("generate_subject: subject index out of range");
  }
  const double fs = spec.sample_rate_hz;
  const std::size_t n_channels = spec.channels.size();
  const std::size_t n_trials = 2 * spec.trials_per_class;

  const auto to_samples = [fs](double seconds) {
    return static_cast<std::size_t>(std::llround(seconds * fs));
  };
  const std::size_t eo_end = to_samples(spec.rest_eyes_open_s);
  const std::size_t ec_end = eo_end + to_samples(spec.rest_eyes_closed_s);
  const std::size_t em_end = ec_end + to_samples(spec.rest_eye_movement_s);
  const std::size_t first_cue = em_end + to_samples(spec.cue_offset_s);
  const std::size_t period = to_samples(spec.trial_period_s);
  const std::size_t active = to_samples(spec.epoch_active_s);
  const std::size_t n_samples = first_cue + n_trials * period;

  // Draw order is fixed: subject gain, channel gains, channel phases, label
  // shuffle, then per-channel AR innovation streams.
  Rng rng(spec.seed, 0x7265737463616cULL /* stream tag */, subject_index);
  const double gain =
      std::exp(rng.uniform(std::log(spec.gain_min), std::log(spec.gain_max)));
  std::vector<double> channel_gains(n_channels);
  for (double& h : channel_gains) {
    h = std::exp(
        rng.uniform(-spec.channel_gain_jitter, spec.channel_gain_jitter));
  }
  std::vector<double> phases(n_channels);
  for (double& p : phases) p = rng.uniform(0.0, kTwoPi);

  std::vector<dataio::TrialClass> labels;
  labels.reserve(n_trials);
  for (std::size_t i = 0; i < spec.trials_per_class; ++i) {
    labels.push_back(dataio::TrialClass::left);
  }
  for (std::size_t i = 0; i < spec.trials_per_class; ++i) {
    labels.push_back(dataio::TrialClass::right);
  }
  fisher_yates_shuffle(labels, rng);

  // Per-sample context shared by all channels.
  std::vector<double> noise_scale(n_samples, 1.0);
  std::vector<double> mu_scale(n_samples, 1.0);
  std::vector<std::ptrdiff_t> active_trial(n_samples, -1);
  for (std::size_t t = eo_end; t < ec_end; ++t) {
    mu_scale[t] = spec.eyes_closed_mu_scale;
  }
  for (std::size_t t = ec_end; t < em_end; ++t) {
    noise_scale[t] = spec.eye_movement_noise_scale;
  }
  for (std::size_t k = 0; k < n_trials; ++k) {
    const std::size_t cue = first_cue + k * period;
    for (std::size_t t = cue; t < cue + active && t < n_samples; ++t) {
      active_trial[t] = static_cast<std::ptrdiff_t>(k);
    }
  }

  dataio::ContinuousRecording rec;
  rec.subject_id = "S" + std::to_string(subject_index + 1);
  rec.sample_rate_hz = fs;
  rec.channels.names = spec.channels;
  rec.channels.selected = spec.channels;
  rec.samples.assign(n_channels, dsp::Samples(n_samples, 0.0));

  const double omega = kTwoPi * spec.mu_freq_hz / fs;
  for (std::size_t c = 0; c < n_channels; ++c) {
    const std::string& name = spec.channels[c];
    const double scale = gain * channel_gains[c];
    double x1 = 0.0, x2 = 0.0;
    for (std::size_t t = 0; t < kArWarmup; ++t) {
      const double x = spec.ar_a1 * x1 + spec.ar_a2 * x2 +
                       spec.noise_std * rng.normal();
      x2 = x1;
      x1 = x;
    }
    dsp::Samples& out = rec.samples[c];
    for (std::size_t t = 0; t < n_samples; ++t) {
      const double x = spec.ar_a1 * x1 + spec.ar_a2 * x2 +
                       spec.noise_std * noise_scale[t] * rng.normal();
      x2 = x1;
      x1 = x;
      double amp = spec.mu_amplitude * mu_scale[t];
      if (active_trial[t] >= 0 &&
          erd_applies(name, labels[static_cast<std::size_t>(active_trial[t])])) {
        amp *= 1.0 - spec.erd_contrast;
      }
      const double v =
          scale * (x + amp * std::sin(omega * static_cast<double>(t) + phases[c]));
      out[t] = snap_f32(v);
    }
  }

  rec.events.push_back({0, dataio::kRestEyesOpenStart});
  rec.events.push_back({static_cast<std::int64_t>(eo_end),
                        dataio::kRestEyesClosedStart});
  rec.events.push_back({static_cast<std::int64_t>(ec_end),
                        dataio::kRestEyeMovementStart});
  rec.events.push_back({static_cast<std::int64_t>(em_end), dataio::kRestEnd});
  for (std::size_t k = 0; k < n_trials; ++k) {
    const auto cue = static_cast<std::int64_t>(first_cue + k * period);
    rec.events.push_back({cue, labels[k] == dataio::TrialClass::left
                                   ? dataio::kCueLeft
                                   : dataio::kCueRight});
  }
  dataio::RestingOffsets offsets;
  offsets.eyes_open_start = 0;
  offsets.eyes_closed_start = static_cast<std::int64_t>(eo_end);
  offsets.eye_movement_start = static_cast<std::int64_t>(ec_end);
  offsets.end = static_cast<std::int64_t>(em_end);
  rec.resting_offsets = offsets;

  // Analytic band power: sinusoid contributes A^2/2 when mu lies in the
  // band, AR noise contributes sigma^2 * integral of its unit-variance
  // one-sided density; both scale with (subject gain * channel gain)^2.
  SubjectGroundTruth truth;
  truth.subject_id = rec.subject_id;
  truth.gain = gain;
  truth.channel_gains = channel_gains;
  truth.band_low_hz = spec.band_low_hz;
  truth.band_high_hz = spec.band_high_hz;
  const bool mu_in_band = spec.mu_freq_hz >= spec.band_low_hz &&
                          spec.mu_freq_hz <= spec.band_high_hz;
  const double ar_unit = ar_band_power_unit(
      spec.ar_a1, spec.ar_a2, fs, spec.band_low_hz, spec.band_high_hz);
  const double noise_band = spec.noise_std * spec.noise_std * ar_unit;
  truth.band_power_left.resize(n_channels);
  truth.band_power_right.resize(n_channels);
  truth.band_power_rest_open.resize(n_channels);
  for (std::size_t c = 0; c < n_channels; ++c) {
    const double s2 = gain * channel_gains[c] * gain * channel_gains[c];
    auto level = [&](double amplitude) {
      const double sine = mu_in_band ? amplitude * amplitude / 2.0 : 0.0;
      return s2 * (sine + noise_band);
    };
    const double attenuated = spec.mu_amplitude * (1.0 - spec.erd_contrast);
    truth.band_power_left[c] =
        level(erd_applies(spec.channels[c], dataio::TrialClass::left)
                  ? attenuated
                  : spec.mu_amplitude);
    truth.band_power_right[c] =
        level(erd_applies(spec.channels[c], dataio::TrialClass::right)
                  ? attenuated
                  : spec.mu_amplitude);
    truth.band_power_rest_open[c] = level(spec.mu_amplitude);
  }

  return {std::move(rec), std::move(truth)};
}

nlohmann::json ground_truth_to_json(const SubjectGroundTruth& truth) {
  nlohmann::json j;
  j["subject_id"] = truth.subject_id;
  j["gain"] = truth.gain;
  j["channel_gains"] = truth.channel_gains;
  j["band_power_left"] = truth.band_power_left;
  j["band_power_right"] = truth.band_power_right;
  j["band_power_rest_open"] = truth.band_power_rest_open;
  j["band_low_hz"] = truth.band_low_hz;
  j["band_high_hz"] = truth.band_high_hz;
  return j;
}

std::vector<std::string> generate_dataset(
    const SynthSpec& spec, const std::filesystem::path& out_dir) {
  validate(spec);
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> subject_ids;
  for (std::size_t i = 0; i < spec.n_subjects; ++i) {
    SubjectSynthesis synthesis = generate_subject(spec, i);
    const std::filesystem::path subject_dir =
        out_dir / synthesis.recording.subject_id;
    dataio::write_archive(synthesis.recording, subject_dir);
    std::ofstream truth_file(subject_dir / "ground_truth.json");
    truth_file << ground_truth_to_json(synthesis.truth).dump(2) << "\n";
    subject_ids.push_back(synthesis.recording.subject_id);
  }
  nlohmann::json manifest;
  manifest["format"] = "restcal-dataset";
  manifest["subjects"] = subject_ids;
  manifest["spec"] = synth_spec_to_json(spec);
  std::ofstream mf(out_dir / "dataset.json");
  mf << manifest.dump(2) << "\n";
  return subject_ids;
}

}  // namespace restcal::synth
