// Digital preprocessing kernels: common average reference, Butterworth
// band-pass design/application, FFT-mask band-pass and Welch spectral
// estimation. All operations are pure functions of their inputs.
#ifndef RESTCAL_DSP_HPP
#define RESTCAL_DSP_HPP

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace restcal::dsp {

using Samples = std::vector<double>;
using MultiChannel = std::vector<Samples>;  // channels x samples

// Band-pass design parameters. Defaults give the 8-30 Hz order-3 filter
// used for motor-imagery epochs at 250 Hz.
struct BandpassSpec {
  double low_hz = 8.0;
  double high_hz = 30.0;
  int order = 3;
  double sample_rate_hz = 250.0;
};

// One normalized biquad: y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2]
//                              - a1 y[n-1] - a2 y[n-2]
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

// Second-order-section cascade realization of a BandpassSpec.
struct FilterRealization {
  std::vector<Biquad> sections;
  double sample_rate_hz = 0.0;
};

enum class Window { rectangular, hann };

std::string window_name(Window w);
Window window_from_name(const std::string& name);

// One-sided spectral density estimate on a uniform frequency grid.
struct SpectrumEstimate {
  std::vector<double> freq_hz;   // 0 .. fs/2 inclusive
  std::vector<double> density;   // uV^2 / Hz, >= 0
  double resolution_hz = 0.0;
  Window window = Window::hann;
  std::size_t segment_len = 0;
  double overlap = 0.0;
};

// Subtracts the instantaneous cross-channel mean from every channel.
// Throws std::invalid_argument for fewer than 2 channels or ragged input.
MultiChannel car_filter(const MultiChannel& x);

// Analog Butterworth prototype, band transform, bilinear discretization
// with pre-warped edges. Result is stable for any valid spec.
FilterRealization design_butterworth_bandpass(const BandpassSpec& spec);

// Magnitude of the cascade's transfer function at freq_hz (evaluation on
// the unit circle). Diagnostic helper; also used for design-time gain
// normalization.
double sos_magnitude(const FilterRealization& f, double freq_hz);

// True when every section's poles lie strictly inside the unit circle.
bool is_stable(const FilterRealization& f);

// Causal direct-form-II-transposed cascade, applied independently per
// channel. zero_phase runs a forward-backward pass instead.
Samples apply_iir(const FilterRealization& f, const Samples& x,
                  bool zero_phase = false);
MultiChannel apply_iir(const FilterRealization& f, const MultiChannel& x,
                       bool zero_phase = false);

// Real FFT; bins whose center frequency lies outside [low_hz, high_hz]
// (inclusive) are zeroed; inverse transform returned.
Samples fft_bandpass(const Samples& x, double sample_rate_hz, double low_hz,
                     double high_hz);

// Mean of windowed-periodogram segments. Density is normalized so the
// integral over [0, fs/2] approximates the signal's mean power.
SpectrumEstimate welch_psd(const Samples& x, double sample_rate_hz,
                           std::size_t segment_len, double overlap,
                           Window window = Window::hann);

// Integral of the piecewise-linear density over [low_hz, high_hz].
double band_power(const SpectrumEstimate& spec, double low_hz, double high_hz);

// Forward/inverse real FFT of arbitrary length (FFTW behind the scenes).
// Exposed for tests and the synthetic generator's spectral bookkeeping.
std::vector<std::complex<double>> rfft(const Samples& x);
Samples irfft(const std::vector<std::complex<double>>& spectrum,
              std::size_t n);

}  // namespace restcal::dsp

#endif  // RESTCAL_DSP_HPP
