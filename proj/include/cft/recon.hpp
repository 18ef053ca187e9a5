#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <utility>

#include "cft/grids.hpp"
#include "cft/measurement.hpp"
#include "cft/phase_space.hpp"

namespace cft {

enum class MirrorMode { hermitian, quadrant_mirror };

namespace detail {

/// Lattice key for exact-duplicate detection on a spacing grid.
struct LatticeKey {
  long jx, jy;
  // Row-major order: Im rows ascending, Re fastest.
  bool operator<(const LatticeKey& o) const {
    return jy != o.jy ? jy < o.jy : jx < o.jx;
  }
};

inline LatticeKey lattice_key(cplx beta, double spacing) {
  return {std::lround(beta.real() / spacing), std::lround(beta.imag() / spacing)};
}

}  // namespace detail

/**
 * Sample the characteristic function of `state` on a grid: one simulated
 * fluorescence readout per requested quadrature per point.  Per-point RNG
 * streams are derived as stream = 2 * point_index + quadrature_index, so
 * the result is independent of evaluation order.
 */
inline std::pair<ChiGrid, std::vector<ReadoutRecord>> sample_chi_grid(
    const OscillatorState& state, const GridSpec& spec, std::uint64_t shots,
    const SpamBias& bias, bool measure_imag, std::uint64_t master_seed) {
  const auto pts = build_grid(spec);
  ChiGrid grid;
  grid.spec = spec;
  grid.points.reserve(pts.size());
  std::vector<ReadoutRecord> records;
  records.reserve(pts.size() * (measure_imag ? 2 : 1));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const ReadoutRecord re = sample_readout(state, pts[i], 0.0, shots, bias, master_seed, 2 * i);
    records.push_back(re);
    ChiGridPoint p;
    p.beta = pts[i];
    p.prov = Provenance::measured;
    p.im_measured = measure_imag;
    if (measure_imag) {
      const ReadoutRecord im =
          sample_readout(state, pts[i], M_PI / 2.0, shots, bias, master_seed, 2 * i + 1);
      records.push_back(im);
      p.est = cplx(re.estimate, im.estimate);
      p.sem = cplx(re.sem, im.sem);
    } else {
      p.est = cplx(re.estimate, 0.0);
      p.sem = cplx(re.sem, 0.0);
    }
    grid.points.push_back(p);
  }
  return {std::move(grid), std::move(records)};
}

/// Noiseless analytic fill of a grid (infinite-shot limit).
inline ChiGrid exact_chi_grid(const OscillatorState& state, const GridSpec& spec,
                              bool measure_imag = true) {
  const auto pts = build_grid(spec);
  ChiGrid grid;
  grid.spec = spec;
  grid.points.reserve(pts.size());
  for (const cplx& b : pts) {
    const cplx chi = char_fn(state, b);
    grid.points.push_back(
        {b, measure_imag ? chi : cplx(chi.real(), 0.0), cplx(0.0, 0.0), Provenance::measured,
         measure_imag});
  }
  return grid;
}

/// Undo the SPAM affine map on each measured quadrature:
/// e -> (e - b) / (1 - |b|), applied to Im only where Im was read out.
inline ChiGrid subtract_bias(ChiGrid grid, double b) {
  detail::require(std::isfinite(b) && std::abs(b) < 1.0, "subtract_bias: |b| must be < 1");
  if (grid.bias_subtracted) throw std::invalid_argument("subtract_bias: already subtracted");
  for (auto& p : grid.points) {
    if (p.prov != Provenance::measured)
      throw std::invalid_argument(
          "subtract_bias: subtract before symmetry completion or padding (mirrored imaginary "
          "parts flip the bias sign; padded zeros carry no bias)");
    const double scale = 1.0 - std::abs(b);
    const double re = (p.est.real() - b) / scale;
    const double im = p.im_measured ? (p.est.imag() - b) / scale : p.est.imag();
    p.est = cplx(re, im);
    p.sem = cplx(p.sem.real() / scale, p.im_measured ? p.sem.imag() / scale : p.sem.imag());
  }
  grid.bias_subtracted = true;
  return grid;
}

/**
 * Fill the full square implied by the measured points.
 *
 * hermitian:        chi(-beta) = chi(beta)*, valid for any state.
 * quadrant_mirror:  additionally chi(beta*) = chi(beta)*, which holds for
 *                   states symmetric under complex conjugation of phase
 *                   space (theta = 0, real displacements, real
 *                   coefficients); required when only one quadrant was
 *                   measured.
 *
 * Mirrored points inherit the source sem.  Overlapping measured points
 * must agree within 3 combined sem or a data-consistency error is thrown.
 * Idempotent on already-complete grids.
 */
inline ChiGrid complete_by_symmetry(const ChiGrid& grid, MirrorMode mode) {
  detail::require(!grid.points.empty(), "complete_by_symmetry: empty grid");
  std::map<detail::LatticeKey, ChiGridPoint> have;
  for (const auto& p : grid.points) {
    auto key = detail::lattice_key(p.beta, grid.spec.spacing);
    if (have.count(key)) throw std::invalid_argument("complete_by_symmetry: duplicate point");
    have[key] = p;
  }
  auto try_add = [&](const ChiGridPoint& src, cplx beta, cplx value) {
    auto key = detail::lattice_key(beta, grid.spec.spacing);
    auto it = have.find(key);
    if (it != have.end()) {
      if (it->second.prov == Provenance::measured && src.prov == Provenance::measured) {
        const double tol =
            3.0 * (std::abs(it->second.sem) + std::abs(src.sem)) + 1e-12;
        if (std::abs(it->second.est - value) > tol)
          throw std::runtime_error(
              "complete_by_symmetry: overlapping measurements disagree beyond 3 sem");
      }
      return;
    }
    ChiGridPoint np = src;
    np.beta = beta;
    np.est = value;
    np.prov = Provenance::symmetry_completed;
    have[key] = np;
  };
  for (const auto& p : grid.points) {
    try_add(p, -p.beta, std::conj(p.est));
    if (mode == MirrorMode::quadrant_mirror) {
      try_add(p, std::conj(p.beta), std::conj(p.est));
      try_add(p, -std::conj(p.beta), p.est);
    }
  }
  ChiGrid out;
  out.spec = grid.spec;
  out.spec.kind = GridKind::full_square;
  out.bias_subtracted = grid.bias_subtracted;
  out.points.reserve(have.size());
  for (const auto& [key, p] : have) out.points.push_back(p);  // row-major by construction
  return out;
}

/// Surround the measured square with zeros out to pad_factor times the
/// extent.  For the direct transform below this is an exact no-op on the
/// values; it documents the assumption chi = 0 outside the measured range
/// and fixes the support the output grid may use.
inline ChiGrid zero_pad(const ChiGrid& grid, double pad_factor) {
  detail::require(pad_factor >= 1.0 && std::isfinite(pad_factor),
                  "zero_pad: pad factor must be >= 1");
  ChiGrid out = grid;
  if (pad_factor == 1.0) return out;
  std::map<detail::LatticeKey, bool> have;
  for (const auto& p : grid.points) have[detail::lattice_key(p.beta, grid.spec.spacing)] = true;
  const int n = int(grid.spec.extent * pad_factor / grid.spec.spacing + 1e-9);
  for (int k = -n; k <= n; ++k)
    for (int j = -n; j <= n; ++j) {
      const cplx beta(j * grid.spec.spacing, k * grid.spec.spacing);
      if (have.count({j, k})) continue;
      out.points.push_back({beta, cplx(0.0, 0.0), cplx(0.0, 0.0), Provenance::zero_padded, true});
    }
  out.spec.extent = n * grid.spec.spacing;
  return out;
}

namespace detail {

inline void require_full_square(const ChiGrid& grid) {
  std::map<LatticeKey, bool> have;
  double max_re = 0.0, max_im = 0.0;
  for (const auto& p : grid.points) {
    have[lattice_key(p.beta, grid.spec.spacing)] = true;
    max_re = std::max(max_re, std::abs(p.beta.real()));
    max_im = std::max(max_im, std::abs(p.beta.imag()));
  }
  const int n = int(std::max(max_re, max_im) / grid.spec.spacing + 1e-9);
  for (int k = -n; k <= n; ++k)
    for (int j = -n; j <= n; ++j)
      if (!have.count({j, k}))
        throw std::invalid_argument(
            "grid does not cover a full square; complete it by symmetry first");
}

/// Bilinear resample of a rectangular-mesh grid onto the uniform lattice
/// with the requested spacing.  Used when input points are off-lattice.
inline ChiGrid resample_to_lattice(const ChiGrid& grid, double spacing) {
  std::vector<double> xs, ys;
  for (const auto& p : grid.points) {
    xs.push_back(p.beta.real());
    ys.push_back(p.beta.imag());
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-12; }),
           xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-12; }),
           ys.end());
  std::map<std::pair<std::size_t, std::size_t>, cplx> val;
  auto find_index = [](const std::vector<double>& v, double x) {
    auto it = std::lower_bound(v.begin(), v.end(), x - 1e-12);
    return std::size_t(it - v.begin());
  };
  for (const auto& p : grid.points)
    val[{find_index(xs, p.beta.real()), find_index(ys, p.beta.imag())}] = p.est;
  if (val.size() != xs.size() * ys.size())
    throw std::invalid_argument("resample: input points do not form a rectangular mesh");

  auto cell = [](const std::vector<double>& v, double x) {
    // Largest i with v[i] <= x, clipped so i+1 is valid.
    auto it = std::upper_bound(v.begin(), v.end(), x);
    std::size_t i = it == v.begin() ? 0 : std::size_t(it - v.begin()) - 1;
    if (i + 1 >= v.size()) i = v.size() - 2;
    return i;
  };
  ChiGrid out;
  out.spec = grid.spec;
  out.spec.spacing = spacing;
  out.bias_subtracted = grid.bias_subtracted;
  const int n = int(std::min(xs.back(), ys.back()) / spacing + 1e-9);
  out.spec.extent = n * spacing;
  for (int k = -n; k <= n; ++k)
    for (int j = -n; j <= n; ++j) {
      const double x = j * spacing, y = k * spacing;
      const std::size_t ix = cell(xs, x), iy = cell(ys, y);
      const double tx = (x - xs[ix]) / (xs[ix + 1] - xs[ix]);
      const double ty = (y - ys[iy]) / (ys[iy + 1] - ys[iy]);
      const cplx v = (1 - tx) * (1 - ty) * val[{ix, iy}] + tx * (1 - ty) * val[{ix + 1, iy}] +
                     (1 - tx) * ty * val[{ix, iy + 1}] + tx * ty * val[{ix + 1, iy + 1}];
      out.points.push_back({cplx(x, y), v, cplx(0.0, 0.0), Provenance::resampled, true});
    }
  return out;
}

inline bool on_uniform_lattice(const ChiGrid& grid) {
  for (const auto& p : grid.points) {
    const double jx = p.beta.real() / grid.spec.spacing;
    const double jy = p.beta.imag() / grid.spec.spacing;
    if (std::abs(jx - std::lround(jx)) > 1e-9 || std::abs(jy - std::lround(jy)) > 1e-9)
      return false;
  }
  return true;
}

}  // namespace detail

/**
 * Discrete transform of a sampled characteristic function,
 *
 *   W_l(gamma) = (dbeta^2 / pi^2) sum_j chi(beta_j) e^{l |beta_j|^2 / 2}
 *                e^{gamma beta_j* - gamma* beta_j},
 *
 * evaluated on the points of `out_spec`.  Plain double sum; the reference
 * path every fast variant must reproduce.  P-kind is refused: its kernel
 * e^{|beta|^2/2} amplifies truncation noise without bound.
 */
inline WignerGrid dft_wigner_plain(const ChiGrid& input, double pad_factor,
                                   const GridSpec& out_spec, QuasiKind kind) {
  detail::require(kind != QuasiKind::GlauberP,
                  "dft_wigner: P-representation reconstruction refused (kernel diverges)");
  ChiGrid grid = detail::on_uniform_lattice(input)
                     ? input
                     : detail::resample_to_lattice(input, input.spec.spacing);
  detail::require_full_square(grid);
  grid = zero_pad(grid, pad_factor);
  const double l = ordering_weight(kind);
  const double w = grid.spec.spacing * grid.spec.spacing / (M_PI * M_PI);
  WignerGrid out;
  out.spec = out_spec;
  for (const cplx& gamma : build_grid(out_spec)) {
    cplx sum = 0.0;
    const cplx gc = std::conj(gamma);
    for (const auto& p : grid.points) {
      const cplx kernel = std::exp(0.5 * l * std::norm(p.beta) + gamma * std::conj(p.beta) -
                                   gc * p.beta);
      sum += p.est * kernel;
    }
    sum *= w;
    out.points.push_back({gamma, sum.real(), sum.imag()});
  }
  return out;
}

/**
 * Separable fast path: the kernel factors as e^{2i b u} e^{-2i a v} for
 * gamma = a + ib, beta = u + iv, so the double sum splits into two passes
 * over lattice axes.  Matches dft_wigner_plain to ~1e-10 or better.
 */
inline WignerGrid dft_wigner_fast(const ChiGrid& input, double pad_factor,
                                  const GridSpec& out_spec, QuasiKind kind) {
  detail::require(kind != QuasiKind::GlauberP,
                  "dft_wigner: P-representation reconstruction refused (kernel diverges)");
  ChiGrid grid = detail::on_uniform_lattice(input)
                     ? input
                     : detail::resample_to_lattice(input, input.spec.spacing);
  detail::require_full_square(grid);
  (void)pad_factor;  // padding adds exact zeros; this sum skips them
  const double l = ordering_weight(kind);
  const double db = grid.spec.spacing;
  const double w = db * db / (M_PI * M_PI);

  // Dense lattice table indexed by (row k = Im, col j = Re).
  long n = 0;
  for (const auto& p : grid.points) {
    auto key = detail::lattice_key(p.beta, db);
    n = std::max({n, std::labs(key.jx), std::labs(key.jy)});
  }
  const std::size_t side = std::size_t(2 * n + 1);
  std::vector<cplx> table(side * side, cplx(0.0, 0.0));
  for (const auto& p : grid.points) {
    auto key = detail::lattice_key(p.beta, db);
    const double weight = std::exp(0.5 * l * std::norm(p.beta));
    table[std::size_t(key.jy + n) * side + std::size_t(key.jx + n)] = p.est * weight;
  }

  const auto out_pts = build_grid(out_spec);
  std::vector<double> as, bs;  // unique output coordinates in order of build_grid
  for (const auto& g : out_pts) {
    as.push_back(g.real());
    bs.push_back(g.imag());
  }
  std::sort(as.begin(), as.end());
  as.erase(std::unique(as.begin(), as.end()), as.end());
  std::sort(bs.begin(), bs.end());
  bs.erase(std::unique(bs.begin(), bs.end()), bs.end());

  // Pass 1: for each row v, contract over columns u with e^{2i b u}.
  // row_t[b_idx][row] = sum_u table[row][u] e^{2 i b u}
  std::vector<std::vector<cplx>> row_t(bs.size(), std::vector<cplx>(side, cplx(0.0, 0.0)));
  for (std::size_t bi = 0; bi < bs.size(); ++bi)
    for (std::size_t row = 0; row < side; ++row) {
      cplx acc = 0.0;
      for (std::size_t col = 0; col < side; ++col) {
        const cplx v = table[row * side + col];
        if (v == cplx(0.0, 0.0)) continue;
        const double u = (double(col) - double(n)) * db;
        acc += v * std::polar(1.0, 2.0 * bs[bi] * u);
      }
      row_t[bi][row] = acc;
    }
  // Pass 2: contract rows with e^{-2i a v}.
  std::map<std::pair<long, long>, cplx> values;
  for (std::size_t ai = 0; ai < as.size(); ++ai)
    for (std::size_t bi = 0; bi < bs.size(); ++bi) {
      cplx acc = 0.0;
      for (std::size_t row = 0; row < side; ++row) {
        const cplx v = row_t[bi][row];
        if (v == cplx(0.0, 0.0)) continue;
        const double vv = (double(row) - double(n)) * db;
        acc += v * std::polar(1.0, -2.0 * as[ai] * vv);
      }
      values[{std::lround(as[ai] * 1e9), std::lround(bs[bi] * 1e9)}] = acc * w;
    }

  WignerGrid out;
  out.spec = out_spec;
  for (const auto& g : out_pts) {
    const cplx v = values[{std::lround(g.real() * 1e9), std::lround(g.imag() * 1e9)}];
    out.points.push_back({g, v.real(), v.imag()});
  }
  return out;
}

inline WignerGrid dft_wigner(const ChiGrid& input, double pad_factor, const GridSpec& out_spec,
                             QuasiKind kind, bool fast = true) {
  return fast ? dft_wigner_fast(input, pad_factor, out_spec, kind)
              : dft_wigner_plain(input, pad_factor, out_spec, kind);
}

/// <Parity> = (pi/2) W(0) = (dbeta^2 / 2 pi) sum Re chi, the same
/// quadrature sum the transform uses at gamma = 0.
inline double parity_from_grid(const ChiGrid& grid) {
  detail::require_full_square(grid);
  const double w = grid.spec.spacing * grid.spec.spacing / (2.0 * M_PI);
  double sum = 0.0;
  for (const auto& p : grid.points) sum += p.est.real();
  return w * sum;
}

/**
 * Numerical-error estimate of the sampling + transform pipeline: sample the
 * ideal chi of `state` on the figure grid with binomial projection noise,
 * run symmetry completion and the transform, and return the mean absolute
 * deviation from the analytic Wigner function over the output points, in
 * percent of the full Wigner range 4/pi.
 */
inline double dft_error_oracle(const OscillatorState& state, const GridSpec& figure_grid,
                               std::uint64_t shots, std::uint64_t seed, const GridSpec& out_spec,
                               bool measure_imag = true, double pad_factor = 4.0) {
  auto [grid, records] =
      sample_chi_grid(state, figure_grid, shots, SpamBias(0.0), measure_imag, seed);
  const MirrorMode mode = figure_grid.kind == GridKind::positive_quadrant
                              ? MirrorMode::quadrant_mirror
                              : MirrorMode::hermitian;
  const ChiGrid full = complete_by_symmetry(grid, mode);
  const WignerGrid w = dft_wigner(full, pad_factor, out_spec, QuasiKind::Wigner);
  double acc = 0.0;
  for (const auto& p : w.points) acc += std::abs(p.value - wigner_fn(state, p.gamma));
  const double mean = acc / double(w.points.size());
  return 100.0 * mean / (4.0 / M_PI);
}

}  // namespace cft
