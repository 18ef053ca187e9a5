#pragma once

#include <array>
#include <cmath>

#include "cft/states.hpp"

namespace cft {

/// Ordering parameter of the quasiprobability family: the Fourier kernel
/// carries e^{l |beta|^2 / 2} with l = 0 (Wigner), -1 (Husimi Q),
/// +1 (Glauber-Sudarshan P).
enum class QuasiKind { Wigner, HusimiQ, GlauberP };

inline double ordering_weight(QuasiKind k) {
  switch (k) {
    case QuasiKind::Wigner: return 0.0;
    case QuasiKind::HusimiQ: return -1.0;
    case QuasiKind::GlauberP: return 1.0;
  }
  throw std::invalid_argument("unknown quasiprobability kind");
}

/// Argument substitution that turns a squeeze into a coordinate change:
/// chi(beta, S(xi)|u>) = chi(beta cosh r + beta* e^{i theta} sinh r, |u>).
inline cplx squeeze_substitute(cplx z, const SqueezeParam& xi) {
  return z * std::cosh(xi.r) + std::conj(z) * std::polar(std::sinh(xi.r), xi.theta);
}

/**
 * Characteristic function chi(beta) = <D(beta)>.
 *
 * For the canonical superposition this is the pair sum
 *   (1/N) sum_{j,k} c_j* c_k exp(-bt* g_k + g_j* bt + g_j* g_k)
 *                    exp(-(|g_j|^2 + |bt|^2 + |g_k|^2)/2)
 * with bt the squeeze-substituted argument.  chi(0) = 1 exactly (the
 * numerator reduces term by term to the cached normalization sum) and
 * chi(-beta) = chi(beta)*.
 */
inline cplx char_fn(const OscillatorState& s, cplx beta) {
  detail::require_finite(beta, "beta");
  const cplx bt = squeeze_substitute(beta, s.squeeze);
  const cplx btc = std::conj(bt);
  const double half_bt2 = 0.5 * std::norm(bt);
  cplx sum = 0.0;
  for (const auto& j : s.components)
    for (const auto& k : s.components) {
      const cplx expo = detail::coherent_overlap_exponent(j.center, k.center) +
                        (std::conj(j.center) * bt - btc * k.center - half_bt2);
      sum += std::conj(j.coeff) * k.coeff * std::exp(expo);
    }
  return sum / s.norm;
}

/**
 * Wigner function from the closed-form pair sum
 *   W(g) = (2 / N pi) sum_{j,k} c_j* c_k
 *          exp(-g_j* g_k + 2 g_j* gt + 2 g_k gt* - 2|gt|^2)
 *          exp(-(|g_j|^2 + |g_k|^2)/2),
 * real by Hermitian pairing; |W| <= 2/pi.
 */
inline double wigner_fn(const OscillatorState& s, cplx gamma) {
  detail::require_finite(gamma, "gamma");
  const cplx gt = squeeze_substitute(gamma, s.squeeze);
  const cplx gtc = std::conj(gt);
  const double two_gt2 = 2.0 * std::norm(gt);
  cplx sum = 0.0;
  for (const auto& j : s.components)
    for (const auto& k : s.components) {
      const cplx gj = std::conj(j.center);
      const cplx expo = -gj * k.center + 2.0 * gj * gt + 2.0 * k.center * gtc - two_gt2 -
                        0.5 * (std::norm(j.center) + std::norm(k.center));
      sum += std::conj(j.coeff) * k.coeff * std::exp(expo);
    }
  return 2.0 / (s.norm * M_PI) * sum.real();
}

/// Husimi Q(beta) = |<beta|psi>|^2 / pi, through the closed-form overlap
/// of a coherent probe with each displaced-squeezed component.
inline double q_fn(const OscillatorState& s, cplx beta) {
  detail::require_finite(beta, "beta");
  const SqueezeParam no_squeeze(0.0, 0.0);
  cplx amp = 0.0;
  for (const auto& c : s.components) {
    const cplx nu = displacement_before_squeeze(c.center, s.squeeze);
    amp += c.coeff * displaced_squeezed_overlap(beta, no_squeeze, nu, s.squeeze);
  }
  return std::norm(amp) / (s.norm * M_PI);
}

/**
 * Closed-form value of W or Q on the midline between the packets of the
 * cat (|0> + e^{i phi} |alpha>)/sqrt(N), alpha real, at gamma = alpha/2 + i m:
 *
 *   W = (4 / pi N) e^{-2 m^2} [e^{-alpha^2/2} + cos(phi - 2 m alpha)]
 *   Q = (2 / pi N) e^{-alpha^2/4 - m^2} [1 + cos(phi - m alpha)]
 *
 * with N = 2 (1 + cos(phi) e^{-alpha^2/2}).  The Q fringe amplitude is
 * suppressed relative to its envelope by e^{-alpha^2/4}.
 */
inline double cat_midline(double alpha, double phi, double m, QuasiKind kind) {
  detail::require(std::isfinite(alpha) && std::isfinite(phi) && std::isfinite(m),
                  "cat_midline: non-finite input");
  const double N = 2.0 * (1.0 + std::cos(phi) * std::exp(-0.5 * alpha * alpha));
  switch (kind) {
    case QuasiKind::Wigner:
      return 4.0 / (M_PI * N) * std::exp(-2.0 * m * m) *
             (std::exp(-0.5 * alpha * alpha) + std::cos(phi - 2.0 * m * alpha));
    case QuasiKind::HusimiQ:
      return 2.0 / (M_PI * N) * std::exp(-0.25 * alpha * alpha - m * m) *
             (1.0 + std::cos(phi - m * alpha));
    case QuasiKind::GlauberP:
      throw std::invalid_argument("cat_midline: P-representation not evaluated (can be singular)");
  }
  throw std::invalid_argument("cat_midline: unknown kind");
}

/// The cat state the midline formulas describe.
inline OscillatorState make_midline_cat(double alpha, double phi) {
  return make_custom({{cplx(1.0, 0.0), cplx(0.0, 0.0)}, {std::polar(1.0, phi), cplx(alpha, 0.0)}},
                     0.0, 0.0);
}

// ---------------------------------------------------------------------------
// Symmetrically ordered moments from Wirtinger derivatives of chi at 0
// ---------------------------------------------------------------------------

namespace detail {

/// Central-difference weights of d^order/dx^order at spacing h on offsets
/// -2..2 (order <= 2 here; composition builds the higher mixed orders).
inline std::array<double, 5> central_weights(int order, double h) {
  std::array<double, 5> w{0, 0, 0, 0, 0};
  switch (order) {
    case 0: w[2] = 1.0; break;
    case 1:
      w[1] = -0.5 / h;
      w[3] = 0.5 / h;
      break;
    case 2:
      w[1] = 1.0 / (h * h);
      w[2] = -2.0 / (h * h);
      w[3] = 1.0 / (h * h);
      break;
    default: throw std::invalid_argument("central_weights: order > 2");
  }
  return w;
}

/// (d/dbeta)^m (-d/dbeta*)^n chi |_{beta=0} by central differences at step h.
inline cplx wirtinger_moment_step(const OscillatorState& s, int m, int n, double h) {
  // Expand the Wirtinger operators into d_x^p d_y^q with complex weights:
  // d/dbeta = (d_x - i d_y)/2, -d/dbeta* = -(d_x + i d_y)/2.
  // coef[p][q] accumulates the weight of d_x^p d_y^q.
  std::array<std::array<cplx, 5>, 5> coef{};
  coef[0][0] = 1.0;
  auto apply = [&](cplx wx, cplx wy) {
    std::array<std::array<cplx, 5>, 5> out{};
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) {
        if (coef[p][q] == cplx(0.0, 0.0)) continue;
        out[p + 1][q] += coef[p][q] * wx;
        out[p][q + 1] += coef[p][q] * wy;
      }
    coef = out;
  };
  for (int i = 0; i < m; ++i) apply(0.5, cplx(0.0, -0.5));
  for (int i = 0; i < n; ++i) apply(-0.5, cplx(0.0, -0.5));

  // Chi on the stencil once; all mixed stencils reuse it.
  std::array<std::array<cplx, 9>, 9> chi{};
  const int maxo = m + n;
  for (int ix = -maxo; ix <= maxo; ++ix)
    for (int iy = -maxo; iy <= maxo; ++iy)
      chi[std::size_t(ix + 4)][std::size_t(iy + 4)] = char_fn(s, cplx(ix * h, iy * h));

  cplx total = 0.0;
  for (int p = 0; p <= maxo; ++p)
    for (int q = 0; q <= maxo - p; ++q) {
      if (coef[p][q] == cplx(0.0, 0.0)) continue;
      // Tensor stencil for d_x^p d_y^q built from repeated first/second
      // differences; p,q <= 4 via composition of <=2-order pieces.
      // Compose as (order-2 blocks + remainder) to stay on the 5-point range.
      // For p in {0..4}: weights on offsets -p..p.
      std::array<double, 9> wx{}, wy{};
      auto compose = [&](int order, std::array<double, 9>& w, double step) {
        std::array<double, 9> acc{};
        acc[4] = 1.0;
        int left = order;
        while (left > 0) {
          const int take = std::min(left, 2);
          const auto cw = central_weights(take, step);
          std::array<double, 9> nxt{};
          for (int i = 0; i < 9; ++i) {
            if (acc[i] == 0.0) continue;
            for (int o = -2; o <= 2; ++o) {
              const double c = cw[std::size_t(o + 2)];
              if (c == 0.0) continue;
              const int idx = i + o;
              if (idx >= 0 && idx < 9) nxt[std::size_t(idx)] += acc[std::size_t(i)] * c;
            }
          }
          acc = nxt;
          left -= take;
        }
        w = acc;
      };
      compose(p, wx, h);
      compose(q, wy, h);
      cplx val = 0.0;
      for (int ix = -4; ix <= 4; ++ix) {
        if (wx[std::size_t(ix + 4)] == 0.0) continue;
        for (int iy = -4; iy <= 4; ++iy) {
          if (wy[std::size_t(iy + 4)] == 0.0) continue;
          val += wx[std::size_t(ix + 4)] * wy[std::size_t(iy + 4)] *
                 chi[std::size_t(ix + 4)][std::size_t(iy + 4)];
        }
      }
      total += coef[p][q] * val;
    }
  return total;
}

}  // namespace detail

/**
 * <a'^m a^n>_S = (d/dbeta)^m (-d/dbeta*)^n chi(beta) |_{beta=0},
 * evaluated on the noiseless analytic chi by central differences with one
 * Richardson halving.  m, n in {0, 1, 2}.
 */
inline cplx symmetric_moment(const OscillatorState& s, int m, int n, double h = 1e-3) {
  detail::require(m >= 0 && n >= 0, "symmetric_moment: negative order");
  detail::require(m <= 2 && n <= 2, "symmetric_moment: m, n must be <= 2");
  detail::require(m + n <= 4, "symmetric_moment: total order above 4 rejected");
  detail::require(h > 0.0 && std::isfinite(h), "symmetric_moment: step must be positive");
  if (m == 0 && n == 0) return char_fn(s, cplx(0.0, 0.0));
  const cplx coarse = detail::wirtinger_moment_step(s, m, n, h);
  const cplx fine = detail::wirtinger_moment_step(s, m, n, 0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace cft
