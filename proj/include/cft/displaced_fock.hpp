#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "cft/phase_space.hpp"
#include "cft/states.hpp"

namespace cft {

/// Fock populations of the state displaced by -gamma:
/// p(n) = |<n| D(-gamma) |psi>|^2.
struct PopulationVector {
  std::vector<double> probs;  // n = 0..n_max
  cplx gamma;

  double sum() const {
    double s = 0.0;
    for (double p : probs) s += p;
    return s;
  }
};

/// Internal-state oscillation trace [P(up, t) - P(down, t)] under a
/// blue-sideband probe: sum_n p(n) cos(Omega sqrt(n+1) t).
struct RabiTrace {
  std::vector<double> times;   // ms
  std::vector<double> values;  // in [-1, 1]
  double omega = 0.0;          // base Rabi angular frequency, rad/ms
};

inline PopulationVector displaced_populations(const OscillatorState& s, cplx gamma, int n_max,
                                              double tail_tol = kDefaultTailTol) {
  const OscillatorState shifted = displace(s, -gamma);
  const FockExpansion f = fock_expand(shifted, n_max);
  PopulationVector pv;
  pv.gamma = gamma;
  pv.probs.reserve(f.amplitudes.size());
  for (const auto& a : f.amplitudes) pv.probs.push_back(std::norm(a));
  if (pv.sum() < 1.0 - tail_tol)
    throw std::runtime_error(
        "displaced_populations: truncation tail above tolerance; increase n_max");
  return pv;
}

inline RabiTrace synthesize_rabi_trace(const PopulationVector& pops, double omega,
                                       const std::vector<double>& times) {
  detail::require(omega > 0.0 && std::isfinite(omega), "synthesize_rabi_trace: omega > 0");
  RabiTrace tr;
  tr.omega = omega;
  tr.times = times;
  tr.values.reserve(times.size());
  double prev = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    detail::require(t > prev, "synthesize_rabi_trace: times must be strictly increasing");
    prev = t;
    double v = 0.0;
    for (std::size_t n = 0; n < pops.probs.size(); ++n)
      v += pops.probs[n] * std::cos(omega * std::sqrt(double(n) + 1.0) * t);
    tr.values.push_back(v);
  }
  return tr;
}

namespace detail {

inline Eigen::MatrixXd rabi_design_matrix(const std::vector<double>& times, double omega,
                                          int n_max) {
  Eigen::MatrixXd A(times.size(), n_max + 1);
  for (std::size_t i = 0; i < times.size(); ++i)
    for (int n = 0; n <= n_max; ++n)
      A(int(i), n) = std::cos(omega * std::sqrt(double(n) + 1.0) * times[i]);
  return A;
}

}  // namespace detail

/// Condition number of the normal matrix of the cosine design; the
/// quantitative form of "adjacent Rabi frequencies crowd together as n
/// grows" (fractional spacing ~ 1/(2n)).
inline double rabi_design_condition(const std::vector<double>& times, double omega, int n_max) {
  const Eigen::MatrixXd A = detail::rabi_design_matrix(times, omega, n_max);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.transpose() * A);
  const auto& ev = es.eigenvalues();
  const double lo = std::max(ev.minCoeff(), 0.0);
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return ev.maxCoeff() / lo;
}

/**
 * Non-negative least squares, Lawson-Hanson active set.  Solves
 * min ||A x - b|| subject to x >= 0; terminates in finitely many passive
 * set updates.
 */
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            int max_outer = 10 * 1024) {
  const int ncol = int(A.cols());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(ncol);
  std::vector<bool> passive(ncol, false);
  Eigen::VectorXd w = A.transpose() * (b - A * x);
  const double tol = 1e-12 * std::max(1.0, b.norm());

  auto solve_passive = [&](const std::vector<bool>& pset) {
    std::vector<int> idx;
    for (int i = 0; i < ncol; ++i)
      if (pset[i]) idx.push_back(i);
    Eigen::MatrixXd Ap(A.rows(), idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(int(k)) = A.col(idx[k]);
    Eigen::VectorXd zp = Ap.colPivHouseholderQr().solve(b);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(ncol);
    for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zp[int(k)];
    return z;
  };

  for (int outer = 0; outer < max_outer; ++outer) {
    int best = -1;
    double bestw = tol;
    for (int i = 0; i < ncol; ++i)
      if (!passive[i] && w[i] > bestw) {
        bestw = w[i];
        best = i;
      }
    if (best < 0) break;  // KKT satisfied
    passive[best] = true;
    Eigen::VectorXd z = solve_passive(passive);
    // Inner loop: back off along x -> z until the passive set is feasible.
    int guard = 0;
    while (true) {
      double min_on_passive = std::numeric_limits<double>::infinity();
      for (int i = 0; i < ncol; ++i)
        if (passive[i]) min_on_passive = std::min(min_on_passive, z[i]);
      if (min_on_passive > -tol) break;
      double alpha = 1.0;
      for (int i = 0; i < ncol; ++i)
        if (passive[i] && z[i] < -tol) alpha = std::min(alpha, x[i] / (x[i] - z[i]));
      x += alpha * (z - x);
      for (int i = 0; i < ncol; ++i)
        if (passive[i] && x[i] <= tol) {
          passive[i] = false;
          x[i] = 0.0;
        }
      z = solve_passive(passive);
      if (++guard > ncol + 1) break;
    }
    x = z;
    for (int i = 0; i < ncol; ++i) x[i] = std::max(x[i], 0.0);
    w = A.transpose() * (b - A * x);
  }
  return x;
}

/**
 * Recover populations from a (possibly noisy) trace by non-negative least
 * squares over the cosine design.  Refuses ill-conditioned designs, which
 * is how the method's breakdown at high n or short traces shows up.
 */
inline PopulationVector extract_populations(const RabiTrace& trace, int n_max,
                                            double condition_limit = 1e12) {
  detail::require(n_max >= 0, "extract_populations: n_max must be >= 0");
  detail::require(trace.times.size() > std::size_t(n_max),
                  "extract_populations: more unknowns than trace points");
  const double cond = rabi_design_condition(trace.times, trace.omega, n_max);
  if (!(cond < condition_limit))
    throw std::runtime_error(
        "extract_populations: cosine design matrix ill-conditioned; the trace cannot resolve "
        "the requested populations");
  const Eigen::MatrixXd A = detail::rabi_design_matrix(trace.times, trace.omega, n_max);
  Eigen::VectorXd b(trace.values.size());
  for (std::size_t i = 0; i < trace.values.size(); ++i) b[int(i)] = trace.values[i];
  const Eigen::VectorXd x = nnls(A, b);
  PopulationVector pv;
  pv.gamma = cplx(0.0, 0.0);
  pv.probs.assign(x.data(), x.data() + x.size());
  return pv;
}

/// sum_n (-1)^n p(n).
inline double leibfried_parity(const PopulationVector& pops) {
  double s = 0.0;
  double sign = 1.0;
  for (double p : pops.probs) {
    s += sign * p;
    sign = -sign;
  }
  return s;
}

/// W(gamma) = (2/pi) sum_n (-1)^n p(n_gamma).
inline double wigner_point_from_pops(const PopulationVector& pops) {
  return 2.0 / M_PI * leibfried_parity(pops);
}

/// Shot-cost factor of displaced-Fock reconstruction relative to direct
/// characteristic-function readout: R = t_wig / (p_ps * t_char).
inline double cost_ratio(double t_wig_per_point, double t_char_per_point, double p_ps) {
  detail::require(t_wig_per_point > 0.0 && t_char_per_point > 0.0,
                  "cost_ratio: durations must be positive");
  detail::require(p_ps > 0.0 && p_ps <= 1.0, "cost_ratio: p_ps must be in (0, 1]");
  return t_wig_per_point / (p_ps * t_char_per_point);
}

}  // namespace cft
