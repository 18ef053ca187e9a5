#pragma once

#include <string>
#include <vector>

#include "cft/states.hpp"

namespace cft {

enum class GridKind { full_square, half_plane, positive_quadrant, axis_scan_re, axis_scan_im };

inline std::string to_string(GridKind k) {
  switch (k) {
    case GridKind::full_square: return "full_square";
    case GridKind::half_plane: return "half_plane";
    case GridKind::positive_quadrant: return "positive_quadrant";
    case GridKind::axis_scan_re: return "axis_scan_re";
    case GridKind::axis_scan_im: return "axis_scan_im";
  }
  throw std::invalid_argument("unknown grid kind");
}

inline GridKind parse_grid_kind(const std::string& s) {
  if (s == "full_square") return GridKind::full_square;
  if (s == "half_plane") return GridKind::half_plane;
  if (s == "positive_quadrant") return GridKind::positive_quadrant;
  if (s == "axis_scan_re") return GridKind::axis_scan_re;
  if (s == "axis_scan_im") return GridKind::axis_scan_im;
  throw std::invalid_argument("unknown grid kind: " + s);
}

/// Uniform lattice {(j dbeta, k dbeta)} clipped to |Re|, |Im| <= extent.
struct GridSpec {
  GridKind kind = GridKind::full_square;
  double extent = 1.0;
  double spacing = 1.0;
};

/// Deterministic point list for a spec: row-major, Im ascending in rows,
/// Re fastest.  half_plane keeps Im >= 0 and restricts the Im = 0 row to
/// Re >= 0 (the other half is implied by Hermitian symmetry).
inline std::vector<cplx> build_grid(const GridSpec& spec) {
  detail::require(spec.spacing > 0.0 && std::isfinite(spec.spacing),
                  "build_grid: spacing must be positive");
  detail::require(std::isfinite(spec.extent) && spec.extent >= spec.spacing,
                  "build_grid: extent must be >= spacing");
  const int n = int(spec.extent / spec.spacing + 1e-9);
  std::vector<cplx> pts;
  auto coord = [&](int j) { return j * spec.spacing; };
  switch (spec.kind) {
    case GridKind::full_square:
      for (int k = -n; k <= n; ++k)
        for (int j = -n; j <= n; ++j) pts.emplace_back(coord(j), coord(k));
      break;
    case GridKind::half_plane:
      for (int j = 0; j <= n; ++j) pts.emplace_back(coord(j), 0.0);
      for (int k = 1; k <= n; ++k)
        for (int j = -n; j <= n; ++j) pts.emplace_back(coord(j), coord(k));
      break;
    case GridKind::positive_quadrant:
      for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= n; ++j) pts.emplace_back(coord(j), coord(k));
      break;
    case GridKind::axis_scan_re:
      for (int j = -n; j <= n; ++j) pts.emplace_back(coord(j), 0.0);
      break;
    case GridKind::axis_scan_im:
      for (int k = -n; k <= n; ++k) pts.emplace_back(0.0, coord(k));
      break;
  }
  return pts;
}

enum class Provenance { measured, symmetry_completed, zero_padded, resampled };

inline std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::measured: return "measured";
    case Provenance::symmetry_completed: return "symmetry_completed";
    case Provenance::zero_padded: return "zero_padded";
    case Provenance::resampled: return "resampled";
  }
  throw std::invalid_argument("unknown provenance");
}

inline Provenance parse_provenance(const std::string& s) {
  if (s == "measured") return Provenance::measured;
  if (s == "symmetry_completed") return Provenance::symmetry_completed;
  if (s == "zero_padded") return Provenance::zero_padded;
  if (s == "resampled") return Provenance::resampled;
  throw std::invalid_argument("unknown provenance: " + s);
}

/// One sampled characteristic-function point.  `est` and `sem` carry the
/// two quadrature readouts as real and imaginary parts; `im_measured`
/// records whether the imaginary quadrature was actually read out (false
/// for real-part-only scans, where Im is pinned to 0 by state symmetry).
struct ChiGridPoint {
  cplx beta;
  cplx est;
  cplx sem;
  Provenance prov = Provenance::measured;
  bool im_measured = true;
};

struct ChiGrid {
  std::vector<ChiGridPoint> points;
  GridSpec spec;
  bool bias_subtracted = false;
};

/// Reconstructed quasiprobability point; the imaginary residual of the
/// transform is reported rather than silently discarded.
struct WignerGridPoint {
  cplx gamma;
  double value = 0.0;
  double imag_residual = 0.0;
};

struct WignerGrid {
  std::vector<WignerGridPoint> points;
  GridSpec spec;
};

}  // namespace cft
