#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cft {

using cplx = std::complex<double>;

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

namespace detail {
inline void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}
inline void require_finite(cplx z, const char* what) {
  if (!is_finite(z)) throw std::invalid_argument(std::string(what) + ": non-finite value");
}
/// Fold an angle into [-pi, pi).
inline double wrap_angle(double theta) {
  double t = std::remainder(theta, 2.0 * M_PI);
  if (t >= M_PI) t -= 2.0 * M_PI;   // remainder may return exactly pi
  if (t < -M_PI) t += 2.0 * M_PI;
  return t;
}
}  // namespace detail

/// Squeeze S(xi) = exp((-xi a'^2 + xi* a^2)/2), xi = r e^{i theta}.
/// For theta = 0 this narrows the position quadrature by e^{-r}.
struct SqueezeParam {
  double r = 0.0;
  double theta = 0.0;

  SqueezeParam() = default;
  SqueezeParam(double r_, double theta_) : r(r_), theta(detail::wrap_angle(theta_)) {
    detail::require(std::isfinite(r_) && std::isfinite(theta_), "SqueezeParam: non-finite");
    detail::require(r_ >= 0.0, "SqueezeParam: squeezing magnitude r must be >= 0");
  }

  /// tau = e^{i theta} tanh r; the only combination the analytics need.
  cplx tau() const { return std::polar(std::tanh(r), theta); }
};

/// One coherent term c |center> of the pre-squeeze superposition.
struct CoherentComponent {
  cplx coeff;
  cplx center;
};

/**
 * Oscillator state in canonical squeeze-outermost form,
 *
 *     |psi> = (1/sqrt(N)) S(xi) sum_k c_k |gamma_k>,
 *
 * with |gamma> a coherent state.  Constructors fold all displacements into
 * the centers (accumulating the geometric phases of combined displacement
 * operators into the coefficients), merge coincident centers and drop
 * vanishing coefficients, then cache the normalization N.
 */
struct OscillatorState {
  std::vector<CoherentComponent> components;
  SqueezeParam squeeze;
  double norm = 1.0;  // cached N of the coherent superposition
};

namespace detail {

/// log <a|b> for coherent states: conj(a) b - (|a|^2 + |b|^2)/2.
inline cplx coherent_overlap_exponent(cplx a, cplx b) {
  return std::conj(a) * b - 0.5 * (std::norm(a) + std::norm(b));
}

/// N = sum_{j,k} conj(c_j) c_k <gamma_j|gamma_k>.
inline double coherent_norm_sum(const std::vector<CoherentComponent>& cs) {
  cplx sum = 0.0;
  for (const auto& j : cs)
    for (const auto& k : cs)
      sum += std::conj(j.coeff) * k.coeff * std::exp(coherent_overlap_exponent(j.center, k.center));
  return sum.real();
}

inline constexpr double kMergeTol = 1e-10;  // centers closer than this are one component
inline constexpr double kDropTol = 1e-14;   // coefficients below this are zero

}  // namespace detail

/// Merge coincident centers, drop zero coefficients, recompute the cached
/// norm.  Idempotent.
inline OscillatorState canonicalize(OscillatorState s) {
  std::vector<CoherentComponent> merged;
  for (const auto& c : s.components) {
    detail::require_finite(c.coeff, "component coefficient");
    detail::require_finite(c.center, "component center");
    bool found = false;
    for (auto& m : merged) {
      if (std::abs(m.center - c.center) < detail::kMergeTol) {
        m.coeff += c.coeff;
        found = true;
        break;
      }
    }
    if (!found) merged.push_back(c);
  }
  std::erase_if(merged, [](const CoherentComponent& c) {
    return std::abs(c.coeff) < detail::kDropTol;
  });
  detail::require(!merged.empty(), "state has no nonzero coefficients");
  s.components = std::move(merged);
  s.norm = detail::coherent_norm_sum(s.components);
  if (!(s.norm > 0.0) || !std::isfinite(s.norm))
    throw std::invalid_argument("state normalization is not positive");
  return s;
}

/**
 * Build D(delta) [ sum_k c_k D(mu_k) ] S(xi) |0> in canonical form.
 *
 * Uses D(beta) D(delta) = exp((beta delta* - beta* delta)/2) D(delta + beta)
 * to merge displacements and the interchange relation
 * D(nu) S(xi) = S(xi) D(nu cosh r + nu* e^{i theta} sinh r)
 * to move the squeeze to the left.
 */
inline OscillatorState make_superposition(cplx delta,
                                          const std::vector<CoherentComponent>& terms,
                                          SqueezeParam xi) {
  detail::require_finite(delta, "delta");
  detail::require(!terms.empty(), "state needs at least one component");
  const double ch = std::cosh(xi.r);
  const double sh = std::sinh(xi.r);
  const cplx eith = std::polar(1.0, xi.theta);
  OscillatorState s;
  s.squeeze = xi;
  s.components.reserve(terms.size());
  for (const auto& t : terms) {
    const cplx nu = delta + t.center;
    const cplx phase = std::exp(0.5 * (delta * std::conj(t.center) - std::conj(delta) * t.center));
    const cplx gamma = nu * ch + std::conj(nu) * eith * sh;
    s.components.push_back({t.coeff * phase, gamma});
  }
  return canonicalize(std::move(s));
}

inline OscillatorState make_vacuum() {
  OscillatorState s;
  s.components = {{cplx(1.0, 0.0), cplx(0.0, 0.0)}};
  s.squeeze = SqueezeParam(0.0, 0.0);
  return canonicalize(std::move(s));
}

inline OscillatorState make_displaced_squeezed(cplx delta, double r, double theta) {
  return make_superposition(delta, {{cplx(1.0, 0.0), cplx(0.0, 0.0)}}, SqueezeParam(r, theta));
}

/// Cat: D(delta) [D(-alpha/2) + D(alpha/2)] S(r e^{i theta}) |0>.
inline OscillatorState make_cat(cplx alpha, double r, double theta, cplx delta = 0.0) {
  return make_superposition(
      delta, {{cplx(1.0, 0.0), -0.5 * alpha}, {cplx(1.0, 0.0), 0.5 * alpha}},
      SqueezeParam(r, theta));
}

/// Three-component grid codeword: D(delta) [D(-l) + 2 + D(l)] S(r e^{i theta}) |0>.
inline OscillatorState make_gkp(cplx l, double r, double theta, cplx delta = 0.0) {
  return make_superposition(delta,
                            {{cplx(1.0, 0.0), -l},
                             {cplx(2.0, 0.0), cplx(0.0, 0.0)},
                             {cplx(1.0, 0.0), l}},
                            SqueezeParam(r, theta));
}

inline OscillatorState make_custom(const std::vector<CoherentComponent>& terms, double r,
                                   double theta, cplx delta = 0.0) {
  return make_superposition(delta, terms, SqueezeParam(r, theta));
}

enum class StateFamily { vacuum, displaced_squeezed, cat, gkp, custom };

inline StateFamily parse_family(const std::string& name) {
  if (name == "vacuum") return StateFamily::vacuum;
  if (name == "displaced_squeezed" || name == "squeezed") return StateFamily::displaced_squeezed;
  if (name == "cat") return StateFamily::cat;
  if (name == "gkp") return StateFamily::gkp;
  if (name == "custom") return StateFamily::custom;
  throw std::invalid_argument("unknown state family: " + name);
}

/// Map-driven construction used by the config layer.  Recognized keys:
/// r, theta, delta_re, delta_im, alpha_re, alpha_im (cat), l_re, l_im (gkp).
inline OscillatorState make_state(StateFamily family, const std::map<std::string, double>& p) {
  auto get = [&](const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
  };
  auto get_req = [&](const std::string& key) {
    auto it = p.find(key);
    if (it == p.end()) throw std::invalid_argument("make_state: missing parameter " + key);
    return it->second;
  };
  const cplx delta(get("delta_re", 0.0), get("delta_im", 0.0));
  const double r = get("r", 0.0);
  const double theta = get("theta", 0.0);
  switch (family) {
    case StateFamily::vacuum:
      return make_vacuum();
    case StateFamily::displaced_squeezed:
      return make_displaced_squeezed(delta, r, theta);
    case StateFamily::cat:
      return make_cat(cplx(get_req("alpha_re"), get("alpha_im", 0.0)), r, theta, delta);
    case StateFamily::gkp:
      return make_gkp(cplx(get_req("l_re"), get("l_im", 0.0)), r, theta, delta);
    case StateFamily::custom:
      throw std::invalid_argument("make_state: custom states take an explicit component list");
  }
  throw std::invalid_argument("make_state: unknown family");
}

/// N of the coherent superposition; unchanged by the (unitary) squeeze.
inline double normalization(const OscillatorState& s) {
  detail::require(!s.components.empty(), "normalization: empty state");
  return s.norm;
}

/// Apply D(delta) to a canonical state, keeping the form canonical.
inline OscillatorState displace(const OscillatorState& s, cplx delta) {
  detail::require_finite(delta, "delta");
  const cplx dprime = delta * std::cosh(s.squeeze.r) +
                      std::conj(delta) * std::polar(std::sinh(s.squeeze.r), s.squeeze.theta);
  OscillatorState out;
  out.squeeze = s.squeeze;
  out.components.reserve(s.components.size());
  for (const auto& c : s.components) {
    const cplx phase =
        std::exp(0.5 * (dprime * std::conj(c.center) - std::conj(dprime) * c.center));
    out.components.push_back({c.coeff * phase, c.center + dprime});
  }
  return canonicalize(std::move(out));
}

/// Multiply every coefficient by a global phase (physically a no-op).
inline OscillatorState rotate_global_phase(OscillatorState s, double phi) {
  const cplx ph = std::polar(1.0, phi);
  for (auto& c : s.components) c.coeff *= ph;
  return canonicalize(std::move(s));
}

/// Per-component displacement nu s.t. the component equals D(nu) S(xi) |0>.
/// Inverse of the interchange map used during construction.
inline cplx displacement_before_squeeze(cplx gamma, const SqueezeParam& xi) {
  return gamma * std::cosh(xi.r) - std::conj(gamma) * std::polar(std::sinh(xi.r), xi.theta);
}

// ---------------------------------------------------------------------------
// Fock expansion
// ---------------------------------------------------------------------------

struct FockExpansion {
  std::vector<cplx> amplitudes;  // length n_max + 1
  int n_max = 0;

  double sum_sq() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return s;
  }
};

inline constexpr int kDefaultFockTruncation = 500;
inline constexpr double kDefaultTailTol = 1e-8;

namespace detail {

/**
 * Amplitudes a_n = <n| D(beta) S(xi) |0> for n = 0..n_max, accumulated into
 * `acc` with weight `coeff`.
 *
 * Derived from the Hermite generating function; the three-term recurrence
 *
 *   a_0 = exp(-|beta|^2/2 - tau beta*^2 / 2) / sqrt(cosh r)
 *   a_{n+1} = [(beta + tau beta*) a_n - tau sqrt(n) a_{n-1}] / sqrt(n+1)
 *
 * with tau = e^{i theta} tanh r runs directly on the normalized amplitudes,
 * so it is free of Hermite-polynomial overflow and of square-root branch
 * choices.  |a_n| <= 1 throughout.
 */
inline void accumulate_displaced_squeezed_fock(std::vector<cplx>& acc, cplx coeff, cplx beta,
                                               const SqueezeParam& xi, int n_max) {
  const cplx tau = xi.tau();
  const cplx c0 =
      std::exp(-0.5 * std::norm(beta) - 0.5 * tau * std::conj(beta) * std::conj(beta)) /
      std::sqrt(std::cosh(xi.r));
  if (!is_finite(c0))
    throw std::runtime_error("fock_expand: overflow in displaced-squeezed prefactor");
  if (c0 == cplx(0.0, 0.0))
    throw std::runtime_error(
        "fock_expand: amplitude prefactor underflowed to zero (displacement too large)");
  cplx prev = 0.0;
  cplx cur = c0;
  const cplx drive = beta + tau * std::conj(beta);
  acc[0] += coeff * cur;
  for (int n = 0; n < n_max; ++n) {
    cplx next = (drive * cur - tau * std::sqrt(double(n)) * prev) / std::sqrt(double(n + 1));
    if (!is_finite(next)) throw std::runtime_error("fock_expand: overflow in amplitude recurrence");
    acc[n + 1] += coeff * next;
    prev = cur;
    cur = next;
  }
}

}  // namespace detail

inline FockExpansion fock_expand(const OscillatorState& s, int n_max = kDefaultFockTruncation) {
  detail::require(n_max >= 0, "fock_expand: n_max must be >= 0");
  FockExpansion f;
  f.n_max = n_max;
  f.amplitudes.assign(std::size_t(n_max) + 1, cplx(0.0, 0.0));
  const double inv_sqrt_n = 1.0 / std::sqrt(s.norm);
  for (const auto& c : s.components) {
    const cplx nu = displacement_before_squeeze(c.center, s.squeeze);
    detail::accumulate_displaced_squeezed_fock(f.amplitudes, c.coeff * inv_sqrt_n, nu, s.squeeze,
                                               n_max);
  }
  return f;
}

/// |<a|b>|^2 through truncated Fock expansions.
inline double fidelity(const OscillatorState& a, const OscillatorState& b,
                       int n_max = kDefaultFockTruncation) {
  const FockExpansion fa = fock_expand(a, n_max);
  const FockExpansion fb = fock_expand(b, n_max);
  cplx ov = 0.0;
  for (int n = 0; n <= n_max; ++n) ov += std::conj(fa.amplitudes[n]) * fb.amplitudes[n];
  return std::norm(ov);
}

/**
 * Closed-form overlap of displaced squeezed states,
 * <beta1, xi1 | beta2, xi2> with |beta, xi> = D(beta) S(xi) |0>.
 *
 * With tau_i = e^{i theta_i} tanh r_i and d = beta2 - beta1:
 *
 *   exp((beta1* beta2 - beta1 beta2*)/2)
 *   / sqrt(cosh r1 cosh r2 (1 - tau1* tau2))
 *   * exp(-|d|^2/2 - tau2 d*^2/2 - tau1* (d + tau2 d*)^2 / (2 (1 - tau1* tau2)))
 *
 * Re(1 - tau1* tau2) > 0 always, so the principal square root is the
 * analytic branch connected to the identity.
 */
inline cplx displaced_squeezed_overlap(cplx beta1, const SqueezeParam& xi1, cplx beta2,
                                       const SqueezeParam& xi2) {
  const cplx tau1 = xi1.tau();
  const cplx tau2 = xi2.tau();
  const cplx d = beta2 - beta1;
  const cplx dc = std::conj(d);
  const cplx one_m = 1.0 - std::conj(tau1) * tau2;
  const cplx geom = 0.5 * (std::conj(beta1) * beta2 - beta1 * std::conj(beta2));
  const cplx q = d + tau2 * dc;
  const cplx expo = geom - 0.5 * std::norm(d) - 0.5 * tau2 * dc * dc -
                    std::conj(tau1) * q * q / (2.0 * one_m);
  const cplx pref = std::sqrt(std::cosh(xi1.r) * std::cosh(xi2.r) * one_m);
  return std::exp(expo) / pref;
}

/// Fidelity summed over component pairs of the closed-form overlap; an
/// independent route that must agree with fidelity() for all states here.
inline double fidelity_overlap_oracle(const OscillatorState& a, const OscillatorState& b) {
  cplx ov = 0.0;
  for (const auto& ca : a.components) {
    const cplx nua = displacement_before_squeeze(ca.center, a.squeeze);
    for (const auto& cb : b.components) {
      const cplx nub = displacement_before_squeeze(cb.center, b.squeeze);
      ov += std::conj(ca.coeff) * cb.coeff *
            displaced_squeezed_overlap(nua, a.squeeze, nub, b.squeeze);
    }
  }
  ov /= std::sqrt(a.norm * b.norm);
  return std::norm(ov);
}

}  // namespace cft
