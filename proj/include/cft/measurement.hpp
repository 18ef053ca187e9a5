#pragma once

#include <cstdint>
#include <vector>

#include "cft/phase_space.hpp"
#include "cft/rng.hpp"
#include "cft/states.hpp"

namespace cft {

/// Carrier rotation angle selecting the measured quadrature:
/// theta = 0 reads Re chi, theta = pi/2 reads Im chi.
struct QuadratureAngle {
  double theta = 0.0;
};

/// State-preparation-and-measurement offset, applied to every readout as
/// E = chi_theta (1 - |b|) + b.  E = 1 stays fixed for b >= 0.
struct SpamBias {
  double b = 0.0;

  SpamBias() = default;
  explicit SpamBias(double b_) : b(b_) {
    detail::require(std::isfinite(b_) && std::abs(b_) < 1.0, "SpamBias: |b| must be < 1");
  }
};

/// One simulated readout setting with its shot statistics.
struct ReadoutRecord {
  cplx beta;
  double theta = 0.0;
  std::uint64_t shots = 0;
  std::uint64_t ups = 0;       // bright outcomes
  double estimate = 0.0;       // 2 ups / shots - 1
  double sem = 0.0;            // standard error of the mean of `estimate`
};

/// cos(theta) Re chi + sin(theta) Im chi, the fluorescence expectation of
/// the carrier-rotation + state-dependent-displacement circuit.
inline double ideal_expectation(const OscillatorState& s, cplx beta, double theta) {
  const cplx chi = char_fn(s, beta);
  return std::cos(theta) * chi.real() + std::sin(theta) * chi.imag();
}

inline double apply_bias(double expectation, const SpamBias& bias) {
  return expectation * (1.0 - std::abs(bias.b)) + bias.b;
}

inline double biased_expectation(const OscillatorState& s, cplx beta, double theta,
                                 const SpamBias& bias) {
  return apply_bias(ideal_expectation(s, beta, theta), bias);
}

/// Exact inverse of apply_bias.
inline double remove_bias(double expectation, const SpamBias& bias) {
  return (expectation - bias.b) / (1.0 - std::abs(bias.b));
}

namespace detail {

/// sem of the two-outcome estimate, floored at 1/shots (half a count in
/// probability, scaled by 2) when the empirical rate saturates; zero
/// weights would otherwise break the chi-squared fits downstream.
inline double readout_sem(std::uint64_t ups, std::uint64_t shots) {
  const double p = double(ups) / double(shots);
  if (ups == 0 || ups == shots) return 1.0 / double(shots);
  return 2.0 * std::sqrt(p * (1.0 - p) / double(shots));
}

}  // namespace detail

/// Draw one finite-shot record: ups ~ Binomial(shots, (E + 1)/2) with
/// E the biased expectation.  Deterministic in (inputs, rng stream).
inline ReadoutRecord sample_readout(const OscillatorState& s, cplx beta, double theta,
                                    std::uint64_t shots, const SpamBias& bias, CounterRng& rng) {
  detail::require(shots >= 1, "sample_readout: shots must be >= 1");
  const double e = biased_expectation(s, beta, theta, bias);
  double p = 0.5 * (e + 1.0);
  p = std::min(1.0, std::max(0.0, p));  // guard fp spill just outside [0, 1]
  ReadoutRecord rec;
  rec.beta = beta;
  rec.theta = theta;
  rec.shots = shots;
  rec.ups = rng.binomial(shots, p);
  rec.estimate = 2.0 * double(rec.ups) / double(shots) - 1.0;
  rec.sem = detail::readout_sem(rec.ups, shots);
  return rec;
}

inline ReadoutRecord sample_readout(const OscillatorState& s, cplx beta, double theta,
                                    std::uint64_t shots, const SpamBias& bias,
                                    std::uint64_t master_seed, std::uint64_t stream) {
  CounterRng rng(master_seed, stream);
  return sample_readout(s, beta, theta, shots, bias, rng);
}

// ---------------------------------------------------------------------------
// State-dependent-force calibration trace
// ---------------------------------------------------------------------------

/// Fluorescence trace of the Fock-1 calibration probe under a state
/// dependent force with shift alpha(t) = c t:
///   <Z(t)> = 1 - e^{-2 (c t)^2} (1 - (2 c t)^2).
inline std::vector<double> simulate_sdf_trace(double c, int n_fock,
                                              const std::vector<double>& times) {
  detail::require(n_fock == 1, "simulate_sdf_trace: only the Fock-1 probe is supported");
  detail::require(c > 0.0 && std::isfinite(c), "simulate_sdf_trace: c must be positive");
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    detail::require(t >= 0.0 && std::isfinite(t), "simulate_sdf_trace: times must be >= 0");
    const double x = c * t;
    out.push_back(1.0 - std::exp(-2.0 * x * x) * (1.0 - 4.0 * x * x));
  }
  return out;
}

struct SdfCalibration {
  double c = 0.0;      // shift per unit time, 1/ms
  double c_err = 0.0;
};

// fit_sdf_calibration lives in model_fit.hpp next to the shared
// least-squares engine.

}  // namespace cft
