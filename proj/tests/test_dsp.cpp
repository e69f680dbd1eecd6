// DSP kernel tests: CAR, Butterworth design/application, FFT band-pass,
// Welch PSD and band power, each checked against test-local oracles.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "restcal/dsp.hpp"
#include "restcal/synth.hpp"  // deterministic Rng

using restcal::dsp::BandpassSpec;
using restcal::dsp::FilterRealization;
using restcal::dsp::MultiChannel;
using restcal::dsp::Samples;
using restcal::dsp::Window;
namespace dsp = restcal::dsp;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Independent magnitude evaluator: multiplies per-section frequency
// responses computed from the raw difference-equation coefficients.
double oracle_magnitude(const FilterRealization& f, double freq_hz) {
  const double w = kTwoPi * freq_hz / f.sample_rate_hz;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h{1.0, 0.0};
  for (const auto& s : f.sections) {
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  }
  return std::abs(h);
}

// Poles of y + a1 y z^-1 + a2 y z^-2: roots of z^2 + a1 z + a2.
double max_pole_magnitude(const FilterRealization& f) {
  double worst = 0.0;
  for (const auto& s : f.sections) {
    const std::complex<double> disc =
        std::sqrt(std::complex<double>(s.a1 * s.a1 - 4.0 * s.a2));
    worst = std::max(worst, std::abs((-s.a1 + disc) / 2.0));
    worst = std::max(worst, std::abs((-s.a1 - disc) / 2.0));
  }
  return worst;
}

Samples sine(double freq_hz, double fs, std::size_t n, double amplitude = 1.0) {
  Samples x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amplitude * std::sin(kTwoPi * freq_hz * static_cast<double>(i) / fs);
  }
  return x;
}

// Amplitude of the freq_hz component via quadrature demodulation over an
// integer number of periods.
double demod_amplitude(const Samples& x, double freq_hz, double fs) {
  double si = 0.0, co = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ph = kTwoPi * freq_hz * static_cast<double>(i) / fs;
    si += x[i] * std::sin(ph);
    co += x[i] * std::cos(ph);
  }
  const double n = static_cast<double>(x.size());
  return 2.0 / n * std::hypot(si, co);
}

double variance(const Samples& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  return var / static_cast<double>(x.size());
}

Samples white_noise(std::size_t n, std::uint64_t seed) {
  restcal::synth::Rng rng(seed);
  Samples x(n);
  for (double& v : x) v = rng.normal();
  return x;
}

}  // namespace

TEST_CASE("car_filter removes the common mode") {
  // All channels identical -> pure common mode -> zero output.
  MultiChannel same(4, Samples(16, 2.5));
  for (const auto& ch : dsp::car_filter(same)) {
    for (double v : ch) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
  }

  // Two channels [1, -1] already have zero cross-channel mean.
  MultiChannel balanced = {Samples(8, 1.0), Samples(8, -1.0)};
  const auto out = dsp::car_filter(balanced);
  for (std::size_t t = 0; t < 8; ++t) {
    CHECK(out[0][t] == doctest::Approx(1.0));
    CHECK(out[1][t] == doctest::Approx(-1.0));
  }
}

TEST_CASE("car_filter per-sample mean is zero and idempotent") {
  restcal::synth::Rng rng(41);
  MultiChannel x(11, Samples(200));
  double max_abs = 0.0;
  for (auto& ch : x) {
    for (double& v : ch) {
      v = 10.0 * rng.normal();
      max_abs = std::max(max_abs, std::abs(v));
    }
  }
  const auto y = dsp::car_filter(x);
  for (std::size_t t = 0; t < 200; ++t) {
    double mean = 0.0;
    for (const auto& ch : y) mean += ch[t];
    mean /= 11.0;
    CHECK(std::abs(mean) <= 1e-9 * max_abs);
  }
  // Idempotence: car(car(x)) == car(x) within 1e-12.
  const auto yy = dsp::car_filter(y);
  for (std::size_t c = 0; c < 11; ++c) {
    for (std::size_t t = 0; t < 200; ++t) {
      CHECK(std::abs(yy[c][t] - y[c][t]) <= 1e-12);
    }
  }
}

TEST_CASE("car_filter rejects single-channel and ragged input") {
  CHECK_THROWS_AS(dsp::car_filter({Samples(10, 0.0)}), std::invalid_argument);
  CHECK_THROWS_AS(dsp::car_filter({Samples(10, 0.0), Samples(9, 0.0)}),
                  std::invalid_argument);
}

TEST_CASE("butterworth 8-30/3 meets the magnitude template") {
  const auto f = dsp::design_butterworth_bandpass(BandpassSpec{});
  CHECK(f.sections.size() == 3);  // order-3 band-pass = 6 poles = 3 biquads

  // Near the (warped) band center the gain is ~1.
  CHECK(oracle_magnitude(f, 15.49) == doctest::Approx(1.0).epsilon(0.05));
  // Band edges sit at the Butterworth -3 dB point (~0.707).
  CHECK(oracle_magnitude(f, 8.0) > 0.6);
  CHECK(oracle_magnitude(f, 8.0) < 0.8);
  CHECK(oracle_magnitude(f, 30.0) > 0.6);
  CHECK(oracle_magnitude(f, 30.0) < 0.8);
  // Stop band.
  CHECK(oracle_magnitude(f, 2.0) < 0.05);
  CHECK(oracle_magnitude(f, 60.0) < 0.05);

  // The library's own evaluator agrees with the oracle.
  for (double freq : {2.0, 8.0, 15.49, 30.0, 60.0}) {
    CHECK(dsp::sos_magnitude(f, freq) ==
          doctest::Approx(oracle_magnitude(f, freq)).epsilon(1e-9));
  }

  CHECK(dsp::is_stable(f));
  CHECK(max_pole_magnitude(f) < 1.0);
}

TEST_CASE("butterworth design rejects invalid band edges") {
  BandpassSpec bad;
  bad.high_hz = 125.0;  // at Nyquist
  CHECK_THROWS_AS(dsp::design_butterworth_bandpass(bad), std::invalid_argument);
  bad = BandpassSpec{};
  bad.low_hz = 30.0;
  bad.high_hz = 8.0;
  CHECK_THROWS_AS(dsp::design_butterworth_bandpass(bad), std::invalid_argument);
  bad = BandpassSpec{};
  bad.low_hz = 0.0;
  CHECK_THROWS_AS(dsp::design_butterworth_bandpass(bad), std::invalid_argument);
  bad = BandpassSpec{};
  bad.order = 0;
  CHECK_THROWS_AS(dsp::design_butterworth_bandpass(bad), std::invalid_argument);
}

TEST_CASE("butterworth designs are stable across random valid specs") {
  restcal::synth::Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    BandpassSpec spec;
    spec.sample_rate_hz = 160.0 + 100.0 * rng.uniform();
    spec.low_hz = 1.0 + 30.0 * rng.uniform();
    spec.high_hz = spec.low_hz + 2.0 +
                   (spec.sample_rate_hz / 2.0 - spec.low_hz - 3.0) *
                       rng.uniform();
    spec.order = 1 + static_cast<int>(rng.uniform() * 5.0);
    const auto f = dsp::design_butterworth_bandpass(spec);
    CHECK(dsp::is_stable(f));
    CHECK(max_pole_magnitude(f) < 1.0);
  }
}

TEST_CASE("apply_iir passes the band and stops out-of-band tones") {
  const auto f = dsp::design_butterworth_bandpass(BandpassSpec{});
  const double fs = 250.0;

  const Samples zeros(1000, 0.0);
  for (double v : dsp::apply_iir(f, zeros)) CHECK(v == 0.0);

  // Steady state after the transient: measure the last 4 of 10 seconds.
  const auto in_band = dsp::apply_iir(f, sine(15.0, fs, 2500));
  Samples tail(in_band.end() - 1000, in_band.end());
  const double amp15 = demod_amplitude(tail, 15.0, fs);
  CHECK(amp15 > 0.9);
  CHECK(amp15 < 1.1);

  const auto stopped = dsp::apply_iir(f, sine(2.0, fs, 2500));
  Samples tail2(stopped.end() - 1000, stopped.end());
  CHECK(demod_amplitude(tail2, 2.0, fs) < 0.05);
}

TEST_CASE("apply_iir is linear and homogeneous") {
  const auto f = dsp::design_butterworth_bandpass(BandpassSpec{});
  const auto x = white_noise(600, 11);
  const auto y = white_noise(600, 12);
  const double a = 1.7, b = -0.4;
  Samples mix(600);
  for (std::size_t i = 0; i < 600; ++i) mix[i] = a * x[i] + b * y[i];

  const auto fx = dsp::apply_iir(f, x);
  const auto fy = dsp::apply_iir(f, y);
  const auto fmix = dsp::apply_iir(f, mix);
  double max_ref = 0.0;
  for (double v : fmix) max_ref = std::max(max_ref, std::abs(v));
  for (std::size_t i = 0; i < 600; ++i) {
    CHECK(std::abs(fmix[i] - (a * fx[i] + b * fy[i])) <= 1e-9 * max_ref);
  }
}

TEST_CASE("apply_iir zero-phase variant has ~squared magnitude and no lag") {
  const auto f = dsp::design_butterworth_bandpass(BandpassSpec{});
  const double fs = 250.0;
  const auto x = sine(15.0, fs, 2500);
  const auto y = dsp::apply_iir(f, x, /*zero_phase=*/true);
  Samples tail(y.end() - 1000, y.end());
  const double gain = dsp::sos_magnitude(f, 15.0);
  CHECK(demod_amplitude(tail, 15.0, fs) ==
        doctest::Approx(gain * gain).epsilon(0.05));
  // Zero phase: the filtered tone stays in phase with the input.
  double num = 0.0, den = 0.0;
  for (std::size_t i = 1500; i < 2500; ++i) {
    num += x[i] * y[i];
    den += x[i] * x[i];
  }
  CHECK(num / den > 0.0);
}

TEST_CASE("fft_bandpass keeps in-band bins and drops the rest") {
  const double fs = 250.0;
  // 20 Hz over 500 samples = 40 exact periods -> a single in-band bin.
  const auto keep = dsp::fft_bandpass(sine(20.0, fs, 500), fs, 8.0, 30.0);
  const auto x20 = sine(20.0, fs, 500);
  for (std::size_t i = 0; i < 500; ++i) {
    CHECK(std::abs(keep[i] - x20[i]) < 1e-6);
  }
  // 5 Hz (10 periods) is out of band -> zeroed.
  const auto drop = dsp::fft_bandpass(sine(5.0, fs, 500), fs, 8.0, 30.0);
  for (double v : drop) CHECK(std::abs(v) < 1e-6);
  // DC survives no band that excludes 0 Hz.
  const auto dc = dsp::fft_bandpass(Samples(256, 3.0), fs, 8.0, 30.0);
  for (double v : dc) CHECK(std::abs(v) < 1e-9);

  CHECK_THROWS_AS(dsp::fft_bandpass(Samples(1, 0.0), fs, 8.0, 30.0),
                  std::invalid_argument);
}

TEST_CASE("fft_bandpass is a projection and degree-1 homogeneous") {
  const double fs = 250.0;
  const auto x = white_noise(777, 21);  // odd length on purpose
  const auto once = dsp::fft_bandpass(x, fs, 8.0, 30.0);
  const auto twice = dsp::fft_bandpass(once, fs, 8.0, 30.0);
  double max_ref = 0.0;
  for (double v : once) max_ref = std::max(max_ref, std::abs(v));
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(twice[i] - once[i]) <= 1e-9 * max_ref);
  }
  Samples scaled(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = 4.0 * x[i];
  const auto scaled_out = dsp::fft_bandpass(scaled, fs, 8.0, 30.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(scaled_out[i] - 4.0 * once[i]) <= 1e-9 * max_ref);
  }
}

TEST_CASE("welch_psd satisfies Parseval-style normalization") {
  const double fs = 250.0;
  const Samples zeros(1000, 0.0);
  const auto zero_spec = dsp::welch_psd(zeros, fs, 250, 0.5);
  for (double v : zero_spec.density) CHECK(v == 0.0);

  // Unit sine: time-domain variance 0.5; the density integral recovers it.
  const auto spec = dsp::welch_psd(sine(20.0, fs, 1000), fs, 250, 0.5);
  CHECK(dsp::band_power(spec, 0.0, fs / 2.0) ==
        doctest::Approx(0.5).epsilon(0.10));

  // White noise: flat spectrum, so [8, 30] holds (30-8)/125 of the power.
  const auto noise = white_noise(20000, 5);
  const auto noise_spec = dsp::welch_psd(noise, fs, 250, 0.5);
  const double expected = variance(noise) * (30.0 - 8.0) / (fs / 2.0);
  CHECK(dsp::band_power(noise_spec, 8.0, 30.0) ==
        doctest::Approx(expected).epsilon(0.15));
  CHECK(dsp::band_power(noise_spec, 0.0, fs / 2.0) ==
        doctest::Approx(variance(noise)).epsilon(0.10));

  CHECK_THROWS_AS(dsp::welch_psd(Samples(100, 0.0), fs, 250, 0.5),
                  std::invalid_argument);
}

TEST_CASE("welch_psd is homogeneous of degree 2") {
  const double fs = 250.0;
  const auto x = white_noise(1000, 9);
  Samples gx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) gx[i] = 3.0 * x[i];
  const auto sx = dsp::welch_psd(x, fs, 250, 0.5);
  const auto sgx = dsp::welch_psd(gx, fs, 250, 0.5);
  for (std::size_t i = 0; i < sx.density.size(); ++i) {
    CHECK(sgx.density[i] ==
          doctest::Approx(9.0 * sx.density[i]).epsilon(1e-9));
  }
}

TEST_CASE("band_power integrates the density over the requested band") {
  const double fs = 250.0;
  dsp::SpectrumEstimate flat;
  flat.resolution_hz = 1.0;
  for (int i = 0; i <= 125; ++i) {
    flat.freq_hz.push_back(static_cast<double>(i));
    flat.density.push_back(2.0);
  }
  CHECK(dsp::band_power(flat, 8.0, 30.0) == doctest::Approx(44.0));
  // Sub-bin band: the linear interpolant still integrates.
  CHECK(dsp::band_power(flat, 10.25, 10.75) == doctest::Approx(1.0));
  // Zero spectrum -> 0.
  dsp::SpectrumEstimate zero = flat;
  for (double& v : zero.density) v = 0.0;
  CHECK(dsp::band_power(zero, 8.0, 30.0) == 0.0);
  // Band entirely outside the spectrum range -> error.
  CHECK_THROWS_AS(dsp::band_power(flat, 130.0, 140.0), std::invalid_argument);
  CHECK_THROWS_AS(dsp::band_power(flat, 30.0, 8.0), std::invalid_argument);
}

TEST_CASE("rfft/irfft round-trip") {
  for (std::size_t n : {8u, 250u, 777u}) {
    const auto x = white_noise(n, 100 + n);
    const auto back = dsp::irfft(dsp::rfft(x), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-9));
    }
  }
}
