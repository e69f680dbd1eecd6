#include "restcal/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace restcal::features {

namespace {

double sample_mean(const Samples& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Population variance (divide by N, not N-1).
double population_var(const Samples& x, double mean) {
  double s = 0.0;
  for (double v : x) {
    const double d = v - mean;
    s += d * d;
  }
  return s / static_cast<double>(x.size());
}

}  // namespace

std::string to_string(EyeMode m) {
  switch (m) {
    case EyeMode::none:
      return "none";
    case EyeMode::open:
      return "eye-open";
    case EyeMode::closed:
      return "eye-closed";
    case EyeMode::movement:
      return "eye-movement";
  }
  throw std::logic_error("unhandled eye mode");
}

EyeMode eye_mode_from_string(const std::string& s) {
  if (s == "none") return EyeMode::none;
  if (s == "eye-open" || s == "open") return EyeMode::open;
  if (s == "eye-closed" || s == "closed") return EyeMode::closed;
  if (s == "eye-movement" || s == "movement") return EyeMode::movement;
  throw std::invalid_argument("unknown eye mode: " + s);
}

void FeatureMatrix::append_row(const std::vector<double>& row,
                               dataio::TrialClass label) {
  if (n_rows == 0 && n_cols == 0) {
    n_cols = row.size();
  }
  if (row.size() != n_cols) {
    throw std::invalid_argument("feature row width mismatch");
  }
  values.insert(values.end(), row.begin(), row.end());
  labels.push_back(label);
  ++n_rows;
}

std::vector<std::string> feature_names_for(
    const std::vector<std::string>& channel_names) {
  std::vector<std::string> names;
  names.reserve(channel_names.size() * kFeaturesPerChannel);
  for (const auto& ch : channel_names) {
    for (const char* f : kPerChannelFeatureNames) {
      names.push_back(ch + "_" + f);
    }
  }
  return names;
}

std::array<double, kFeaturesPerChannel> channel_features(
    const Samples& x, double sample_rate_hz, const FeatureParams& params) {
  if (x.size() < 2) {
    throw std::invalid_argument("channel_features: signal too short");
  }

  // Clamp the Welch segment length so short blocks still yield a spectrum
  // (welch_psd itself rejects segments longer than the signal).
  const std::size_t seg = std::min(params.welch_segment_len, x.size());
  const auto spectrum = dsp::welch_psd(x, sample_rate_hz, seg,
                                       params.welch_overlap,
                                       params.welch_window);
  const double psd =
      dsp::band_power(spectrum, params.band_low_hz, params.band_high_hz);

  const double mean = sample_mean(x);
  const double var = population_var(x, mean);

  double sq = 0.0;
  for (double v : x) sq += v * v;
  const double rms = std::sqrt(sq / static_cast<double>(x.size()));

  return {psd, rms, mean, std::sqrt(var), std::log(var + params.eps_var)};
}

FeatureVector trial_features(const MultiChannel& epoch, double sample_rate_hz,
                             const std::vector<std::string>& channel_names,
                             const FeatureParams& params) {
  if (epoch.size() != channel_names.size()) {
    throw std::invalid_argument("trial_features: channel count mismatch");
  }
  FeatureVector fv;
  fv.values.reserve(epoch.size() * kFeaturesPerChannel);
  for (const auto& ch : epoch) {
    const auto f = channel_features(ch, sample_rate_hz, params);
    fv.values.insert(fv.values.end(), f.begin(), f.end());
  }
  fv.names = feature_names_for(channel_names);
  return fv;
}

CalibrationVector resting_features(
    const MultiChannel& block, double sample_rate_hz,
    const std::vector<std::string>& channel_names, const FeatureParams& params,
    EyeMode mode, double duration_s) {
  CalibrationVector cv;
  cv.features = trial_features(block, sample_rate_hz, channel_names, params);
  cv.mode = mode;
  cv.duration_s = duration_s;
  return cv;
}

CalibrationOutcome calibrate(const FeatureVector& task,
                             const CalibrationVector& rest,
                             double eps_div) {
  const FeatureVector& r = rest.features;
  if (task.values.size() != r.values.size()) {
    throw std::invalid_argument("calibrate: feature layout mismatch");
  }
  if (!task.names.empty() && !r.names.empty() && task.names != r.names) {
    throw std::invalid_argument("calibrate: feature layout mismatch");
  }

  CalibrationOutcome out;
  out.features.names = task.names;
  out.features.values.resize(task.values.size());
  out.guard_engaged.assign(task.values.size(), 0);
  for (std::size_t k = 0; k < task.values.size(); ++k) {
    double denom = r.values[k];
    if (std::abs(denom) < eps_div) {
      // sign(0) counts as +1 so the guard never divides by zero.
      denom = (denom >= 0.0) ? eps_div : -eps_div;
      out.guard_engaged[k] = 1;
      ++out.guard_count;
    }
    out.features.values[k] = task.values[k] / denom;
  }
  return out;
}

NormalizationStats fit_normalizer(const FeatureMatrix& train,
                                  double std_floor) {
  if (train.n_rows < 2) {
    throw std::invalid_argument("fit_normalizer: need at least two rows");
  }
  NormalizationStats stats;
  stats.mean.assign(train.n_cols, 0.0);
  stats.std_dev.assign(train.n_cols, 0.0);
  const double n = static_cast<double>(train.n_rows);
  for (std::size_t r = 0; r < train.n_rows; ++r) {
    for (std::size_t c = 0; c < train.n_cols; ++c) {
      stats.mean[c] += train.at(r, c);
    }
  }
  for (double& m : stats.mean) m /= n;
  for (std::size_t r = 0; r < train.n_rows; ++r) {
    for (std::size_t c = 0; c < train.n_cols; ++c) {
      const double d = train.at(r, c) - stats.mean[c];
      stats.std_dev[c] += d * d;
    }
  }
  for (double& s : stats.std_dev) {
    s = std::sqrt(s / n);  // population std
    if (s < std_floor) s = std_floor;
  }
  return stats;
}

FeatureMatrix apply_normalizer(const NormalizationStats& stats,
                               const FeatureMatrix& m) {
  if (stats.mean.size() != m.n_cols) {
    throw std::invalid_argument("apply_normalizer: column count mismatch");
  }
  FeatureMatrix out = m;
  for (std::size_t r = 0; r < out.n_rows; ++r) {
    for (std::size_t c = 0; c < out.n_cols; ++c) {
      out.at(r, c) = (out.at(r, c) - stats.mean[c]) / stats.std_dev[c];
    }
  }
  return out;
}

FeatureMatrix invert_normalizer(const NormalizationStats& stats,
                                const FeatureMatrix& m) {
  if (stats.mean.size() != m.n_cols) {
    throw std::invalid_argument("invert_normalizer: column count mismatch");
  }
  FeatureMatrix out = m;
  for (std::size_t r = 0; r < out.n_rows; ++r) {
    for (std::size_t c = 0; c < out.n_cols; ++c) {
      out.at(r, c) = out.at(r, c) * stats.std_dev[c] + stats.mean[c];
    }
  }
  return out;
}

}  // namespace restcal::features
