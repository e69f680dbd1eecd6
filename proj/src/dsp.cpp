#include "restcal/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace restcal::dsp {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW's planner is not thread-safe; plan creation/destruction is
// serialized. Each thread keeps its own plans so execution needs no lock.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct RfftPlan {
  std::size_t n = 0;
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  explicit RfftPlan(std::size_t len) : n(len) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    real = fftw_alloc_real(n);
    cplx = fftw_alloc_complex(n / 2 + 1);
    fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, cplx, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx, real, FFTW_ESTIMATE);
  }
  ~RfftPlan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    if (real) fftw_free(real);
    if (cplx) fftw_free(cplx);
  }
  RfftPlan(const RfftPlan&) = delete;
  RfftPlan& operator=(const RfftPlan&) = delete;
};

RfftPlan& plan_for(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RfftPlan>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::make_unique<RfftPlan>(n)).first;
  }
  return *it->second;
}

}  // namespace

std::vector<std::complex<double>> rfft(const Samples& x) {
  if (x.empty()) throw std::invalid_argument("rfft: empty signal");
  RfftPlan& p = plan_for(x.size());
  std::copy(x.begin(), x.end(), p.real);
  fftw_execute(p.fwd);
  const std::size_t nbins = x.size() / 2 + 1;
  std::vector<std::complex<double>> out(nbins);
  for (std::size_t k = 0; k < nbins; ++k) {
    out[k] = {p.cplx[k][0], p.cplx[k][1]};
  }
  return out;
}

Samples irfft(const std::vector<std::complex<double>>& spectrum,
              std::size_t n) {
  if (n == 0 || spectrum.size() != n / 2 + 1) {
    throw std::invalid_argument("irfft: spectrum size does not match length");
  }
  RfftPlan& p = plan_for(n);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    p.cplx[k][0] = spectrum[k].real();
    p.cplx[k][1] = spectrum[k].imag();
  }
  fftw_execute(p.inv);
  Samples out(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = p.real[i] * scale;
  return out;
}

std::string window_name(Window w) {
  return w == Window::hann ? "hann" : "rectangular";
}

Window window_from_name(const std::string& name) {
  if (name == "hann") return Window::hann;
  if (name == "rectangular" || name == "rect" || name == "boxcar") {
    return Window::rectangular;
  }
  throw std::invalid_argument("unknown window: " + name);
}

MultiChannel car_filter(const MultiChannel& x) {
  if (x.size() < 2) {
    throw std::invalid_argument("car_filter: need at least 2 channels");
  }
  const std::size_t n = x.front().size();
  for (const auto& ch : x) {
    if (ch.size() != n) {
      throw std::invalid_argument("car_filter: unequal channel lengths");
    }
  }
  MultiChannel out(x.size(), Samples(n));
  const double inv_c = 1.0 / static_cast<double>(x.size());
  for (std::size_t t = 0; t < n; ++t) {
    double mean = 0.0;
    for (const auto& ch : x) mean += ch[t];
    mean *= inv_c;
    for (std::size_t c = 0; c < x.size(); ++c) {
      out[c][t] = x[c][t] - mean;
    }
  }
  return out;
}

namespace {

// Denominator roots of z^2 + a1 z + a2.
std::pair<std::complex<double>, std::complex<double>> biquad_poles(
    const Biquad& s) {
  const double disc = s.a1 * s.a1 - 4.0 * s.a2;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    return {{(-s.a1 + r) / 2.0, 0.0}, {(-s.a1 - r) / 2.0, 0.0}};
  }
  const double im = std::sqrt(-disc) / 2.0;
  return {{-s.a1 / 2.0, im}, {-s.a1 / 2.0, -im}};
}

std::complex<double> biquad_response(const Biquad& s,
                                     std::complex<double> z_inv) {
  const std::complex<double> z_inv2 = z_inv * z_inv;
  return (s.b0 + s.b1 * z_inv + s.b2 * z_inv2) /
         (1.0 + s.a1 * z_inv + s.a2 * z_inv2);
}

}  // namespace

double sos_magnitude(const FilterRealization& f, double freq_hz) {
  const double w = 2.0 * kPi * freq_hz / f.sample_rate_hz;
  const std::complex<double> z_inv = std::polar(1.0, -w);
  std::complex<double> h = 1.0;
  for (const auto& s : f.sections) h *= biquad_response(s, z_inv);
  return std::abs(h);
}

bool is_stable(const FilterRealization& f) {
  for (const auto& s : f.sections) {
    auto [p1, p2] = biquad_poles(s);
    if (std::abs(p1) >= 1.0 || std::abs(p2) >= 1.0) return false;
  }
  return true;
}

FilterRealization design_butterworth_bandpass(const BandpassSpec& spec) {
  const double fs = spec.sample_rate_hz;
  if (fs <= 0.0 || spec.order < 1) {
    throw std::invalid_argument("design_butterworth_bandpass: bad spec");
  }
  if (!(0.0 < spec.low_hz && spec.low_hz < spec.high_hz &&
        spec.high_hz < fs / 2.0)) {
    throw std::invalid_argument(
        "design_butterworth_bandpass: band edges must satisfy "
        "0 < low < high < Nyquist");
  }
  const int n = spec.order;

  // Pre-warped analog edges for the bilinear transform, s = K (z-1)/(z+1).
  const double K = 2.0 * fs;
  const double wl = K * std::tan(kPi * spec.low_hz / fs);
  const double wh = K * std::tan(kPi * spec.high_hz / fs);
  const double w0 = std::sqrt(wl * wh);
  const double bw = wh - wl;

  // Unit-cutoff Butterworth prototype poles, then the lowpass-to-bandpass
  // substitution s -> (s^2 + w0^2)/(bw s). Each prototype pole yields two
  // bandpass poles as the roots of s^2 - (bw p) s + w0^2 = 0.
  std::vector<std::complex<double>> analog_poles;
  analog_poles.reserve(2 * static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double theta = kPi * (2.0 * k + n + 1.0) / (2.0 * n);
    const std::complex<double> proto = std::polar(1.0, theta);
    const std::complex<double> half = bw * proto / 2.0;
    const std::complex<double> root = std::sqrt(half * half - w0 * w0);
    analog_poles.push_back(half + root);
    analog_poles.push_back(half - root);
  }

  // Bilinear transform of poles; zeros are n at z=+1 (from s=0) and n at
  // z=-1 (from s=inf), so every section's numerator is (1 - z^-2).
  std::vector<std::complex<double>> poles;
  poles.reserve(analog_poles.size());
  for (const auto& s : analog_poles) {
    poles.push_back((K + s) / (K - s));
  }

  // Pair conjugate poles into real-coefficient sections.
  auto key = [](const std::complex<double>& p) {
    return std::make_pair(p.real(), std::abs(p.imag()));
  };
  std::vector<std::complex<double>> upper, reals;
  for (const auto& p : poles) {
    const double tol = 1e-10 * std::max(1.0, std::abs(p));
    if (p.imag() > tol) {
      upper.push_back(p);
    } else if (std::abs(p.imag()) <= tol) {
      reals.push_back(p);
    }
  }
  std::sort(upper.begin(), upper.end(),
            [&](const auto& a, const auto& b) { return key(a) < key(b); });
  std::sort(reals.begin(), reals.end(),
            [&](const auto& a, const auto& b) { return key(a) < key(b); });

  FilterRealization out;
  out.sample_rate_hz = fs;
  for (const auto& p : upper) {
    Biquad s;
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -2.0 * p.real();
    s.a2 = std::norm(p);
    out.sections.push_back(s);
  }
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
    Biquad s;
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -(reals[i].real() + reals[i + 1].real());
    s.a2 = reals[i].real() * reals[i + 1].real();
    out.sections.push_back(s);
  }

  // Normalize unity gain at the warped geometric band center.
  const double wc = 2.0 * std::atan(w0 / K);
  const double fc = wc * fs / (2.0 * kPi);
  const double mag = sos_magnitude(out, fc);
  if (!(mag > 0.0) || !std::isfinite(mag)) {
    throw std::runtime_error("design_butterworth_bandpass: degenerate gain");
  }
  const double per_section =
      std::pow(1.0 / mag, 1.0 / static_cast<double>(out.sections.size()));
  for (auto& s : out.sections) {
    s.b0 *= per_section;
    s.b1 *= per_section;
    s.b2 *= per_section;
  }
  return out;
}

Samples apply_iir(const FilterRealization& f, const Samples& x,
                  bool zero_phase) {
  Samples y = x;
  auto run_cascade = [&f](Samples& sig) {
    for (const auto& s : f.sections) {
      double s1 = 0.0, s2 = 0.0;
      for (double& v : sig) {
        const double in = v;
        const double out = s.b0 * in + s1;
        s1 = s.b1 * in - s.a1 * out + s2;
        s2 = s.b2 * in - s.a2 * out;
        v = out;
      }
    }
  };
  run_cascade(y);
  if (zero_phase) {
    std::reverse(y.begin(), y.end());
    run_cascade(y);
    std::reverse(y.begin(), y.end());
  }
  return y;
}

MultiChannel apply_iir(const FilterRealization& f, const MultiChannel& x,
                       bool zero_phase) {
  MultiChannel out;
  out.reserve(x.size());
  for (const auto& ch : x) out.push_back(apply_iir(f, ch, zero_phase));
  return out;
}

Samples fft_bandpass(const Samples& x, double sample_rate_hz, double low_hz,
                     double high_hz) {
  if (x.size() < 2) {
    throw std::invalid_argument("fft_bandpass: signal too short");
  }
  if (!(low_hz <= high_hz)) {
    throw std::invalid_argument("fft_bandpass: low_hz must be <= high_hz");
  }
  auto spectrum = rfft(x);
  const double df = sample_rate_hz / static_cast<double>(x.size());
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const double f = df * static_cast<double>(k);
    if (f < low_hz || f > high_hz) spectrum[k] = 0.0;
  }
  return irfft(spectrum, x.size());
}

SpectrumEstimate welch_psd(const Samples& x, double sample_rate_hz,
                           std::size_t segment_len, double overlap,
                           Window window) {
  if (segment_len < 2) {
    throw std::invalid_argument("welch_psd: segment_len must be >= 2");
  }
  if (segment_len > x.size()) {
    throw std::invalid_argument("welch_psd: segment longer than signal");
  }
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    throw std::invalid_argument("welch_psd: overlap must be in [0, 1)");
  }
  const std::size_t L = segment_len;
  const auto noverlap =
      static_cast<std::size_t>(static_cast<double>(L) * overlap);
  const std::size_t step = L - std::min(noverlap, L - 1);

  Samples taper(L, 1.0);
  if (window == Window::hann) {
    for (std::size_t i = 0; i < L; ++i) {
      taper[i] =
          0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) /
                                static_cast<double>(L)));
    }
  }
  double window_power = 0.0;
  for (double w : taper) window_power += w * w;

  const std::size_t nbins = L / 2 + 1;
  std::vector<double> acc(nbins, 0.0);
  Samples seg(L);
  std::size_t nsegs = 0;
  for (std::size_t start = 0; start + L <= x.size(); start += step) {
    for (std::size_t i = 0; i < L; ++i) seg[i] = x[start + i] * taper[i];
    auto spectrum = rfft(seg);
    for (std::size_t k = 0; k < nbins; ++k) acc[k] += std::norm(spectrum[k]);
    ++nsegs;
  }

  SpectrumEstimate est;
  est.resolution_hz = sample_rate_hz / static_cast<double>(L);
  est.window = window;
  est.segment_len = L;
  est.overlap = overlap;
  est.freq_hz.resize(nbins);
  est.density.resize(nbins);
  const double scale =
      1.0 / (static_cast<double>(nsegs) * sample_rate_hz * window_power);
  const bool even = (L % 2 == 0);
  for (std::size_t k = 0; k < nbins; ++k) {
    est.freq_hz[k] = est.resolution_hz * static_cast<double>(k);
    double v = acc[k] * scale;
    const bool is_dc = (k == 0);
    const bool is_nyquist = even && (k == nbins - 1);
    if (!is_dc && !is_nyquist) v *= 2.0;  // one-sided density
    est.density[k] = v;
  }
  return est;
}

double band_power(const SpectrumEstimate& spec, double low_hz, double high_hz) {
  if (spec.freq_hz.size() < 2) {
    throw std::invalid_argument("band_power: spectrum has too few bins");
  }
  if (!(low_hz < high_hz)) {
    throw std::invalid_argument("band_power: empty band");
  }
  const double f0 = spec.freq_hz.front();
  const double f1 = spec.freq_hz.back();
  const double a = std::max(low_hz, f0);
  const double b = std::min(high_hz, f1);
  if (!(a < b)) {
    throw std::invalid_argument("band_power: band outside spectrum range");
  }
  auto interp = [&spec](std::size_t i, double f) {
    const double fa = spec.freq_hz[i], fb = spec.freq_hz[i + 1];
    const double t = (f - fa) / (fb - fa);
    return spec.density[i] + t * (spec.density[i + 1] - spec.density[i]);
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < spec.freq_hz.size(); ++i) {
    const double lo = std::max(a, spec.freq_hz[i]);
    const double hi = std::min(b, spec.freq_hz[i + 1]);
    if (lo >= hi) continue;
    total += (hi - lo) * 0.5 * (interp(i, lo) + interp(i, hi));
  }
  return total;
}

}  // namespace restcal::dsp
