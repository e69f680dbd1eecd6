// Five temporal features per channel (psd, rms, mean, std, logvar),
// 55-dimensional trial vectors, resting-state calibration vectors, the
// peer-to-peer division calibration and z-score normalization.
#ifndef RESTCAL_FEATURES_HPP
#define RESTCAL_FEATURES_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "restcal/dataio.hpp"
#include "restcal/dsp.hpp"

namespace restcal::features {

using dsp::MultiChannel;
using dsp::Samples;

inline constexpr std::size_t kFeaturesPerChannel = 5;
inline constexpr std::array<const char*, kFeaturesPerChannel>
    kPerChannelFeatureNames = {"psd", "rms", "mean", "std", "logvar"};

// Indices into a per-channel feature block.
enum FeatureIndex : std::size_t {
  kPsd = 0,
  kRms = 1,
  kMean = 2,
  kStd = 3,
  kLogVar = 4
};

struct FeatureParams {
  double band_low_hz = 8.0;
  double band_high_hz = 30.0;
  std::size_t welch_segment_len = 250;  // 1 s at 250 Hz
  double welch_overlap = 0.5;
  dsp::Window welch_window = dsp::Window::hann;
  double eps_var = 1e-20;  // keeps logvar defined for constant signals
};

struct FeatureVector {
  std::vector<double> values;
  std::vector<std::string> names;
};

enum class EyeMode { none, open, closed, movement };

std::string to_string(EyeMode m);
EyeMode eye_mode_from_string(const std::string& s);

struct CalibrationVector {
  FeatureVector features;
  EyeMode mode = EyeMode::open;
  double duration_s = 0.0;
};

struct FeatureMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> values;  // row-major
  std::vector<dataio::TrialClass> labels;
  std::vector<std::string> column_names;

  double at(std::size_t r, std::size_t c) const {
    return values[r * n_cols + c];
  }
  double& at(std::size_t r, std::size_t c) { return values[r * n_cols + c]; }
  void append_row(const std::vector<double>& row, dataio::TrialClass label);
};

// Per-column statistics estimated on training rows only.
struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> std_dev;  // floored, always > 0
};

struct CalibrationOutcome {
  FeatureVector features;
  std::vector<char> guard_engaged;  // per coordinate
  int guard_count = 0;
};

// Column names in channel-major layout: ch0_psd, ch0_rms, ...
std::vector<std::string> feature_names_for(
    const std::vector<std::string>& channel_names);

// (psd, rms, mean, std, logvar) of one channel. psd integrates the Welch
// density over the analysis band; std and var are population statistics.
std::array<double, kFeaturesPerChannel> channel_features(
    const Samples& x, double sample_rate_hz, const FeatureParams& params);

// Concatenation of channel_features per channel in layout order.
FeatureVector trial_features(const MultiChannel& epoch, double sample_rate_hz,
                             const std::vector<std::string>& channel_names,
                             const FeatureParams& params);

// Same features over the whole (possibly truncated) resting block.
CalibrationVector resting_features(
    const MultiChannel& block, double sample_rate_hz,
    const std::vector<std::string>& channel_names, const FeatureParams& params,
    EyeMode mode, double duration_s);

// Elementwise task / rest with an epsilon guard on near-zero denominators:
// |rest[k]| < eps divides by sign(rest[k]) * eps instead.
CalibrationOutcome calibrate(const FeatureVector& task,
                             const CalibrationVector& rest,
                             double eps_div = 1e-12);

NormalizationStats fit_normalizer(const FeatureMatrix& train,
                                  double std_floor = 1e-12);
FeatureMatrix apply_normalizer(const NormalizationStats& stats,
                               const FeatureMatrix& m);
FeatureMatrix invert_normalizer(const NormalizationStats& stats,
                                const FeatureMatrix& m);

}  // namespace restcal::features

#endif  // RESTCAL_FEATURES_HPP
