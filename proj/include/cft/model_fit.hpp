#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cft/levmar.hpp"
#include "cft/measurement.hpp"
#include "cft/phase_space.hpp"
#include "cft/states.hpp"

namespace cft {

enum class ModelFamily { squeezed, displaced_squeezed, cat, gkp };

inline std::string to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::squeezed: return "squeezed";
    case ModelFamily::displaced_squeezed: return "displaced_squeezed";
    case ModelFamily::cat: return "cat";
    case ModelFamily::gkp: return "gkp";
  }
  throw std::invalid_argument("unknown model family");
}

inline ModelFamily parse_model_family(const std::string& s) {
  if (s == "squeezed") return ModelFamily::squeezed;
  if (s == "displaced_squeezed") return ModelFamily::displaced_squeezed;
  if (s == "cat") return ModelFamily::cat;
  if (s == "gkp") return ModelFamily::gkp;
  throw std::invalid_argument("unknown model family: " + s);
}

using ParamMap = std::map<std::string, double>;

/// Full ordered parameter list of a family; free/fixed sets partition it.
inline std::vector<std::string> family_param_names(ModelFamily f) {
  switch (f) {
    case ModelFamily::squeezed:
    case ModelFamily::displaced_squeezed:
      return {"r", "theta", "delta_re", "delta_im", "b"};
    case ModelFamily::cat:
      return {"r", "theta", "alpha_re", "alpha_im", "delta_re", "delta_im", "b"};
    case ModelFamily::gkp:
      return {"r", "theta", "l_re", "l_im", "delta_re", "delta_im", "b"};
  }
  throw std::invalid_argument("unknown model family");
}

/// Box bounds per parameter.  theta lives on [-pi/2, pi/2) (the squeeze
/// orientation has period pi); r and b are hard-bounded; displacement
/// magnitudes are generously boxed.
inline std::pair<double, double> param_bounds(const std::string& name) {
  if (name == "r") return {0.0, 3.0};
  if (name == "theta") return {-M_PI / 2.0, M_PI / 2.0};
  if (name == "b") return {-0.5 + 1e-9, 0.5 - 1e-9};
  return {-8.0, 8.0};  // delta / alpha / l components
}

struct StateModel {
  ModelFamily family = ModelFamily::squeezed;
  std::vector<std::string> free_params;  // subset of family_param_names, in that order
  ParamMap fixed_params;                 // values for the remainder

  static StateModel with_free(ModelFamily f, const std::vector<std::string>& free,
                              const ParamMap& fixed = {}) {
    StateModel m;
    m.family = f;
    const auto names = family_param_names(f);
    std::set<std::string> known(names.begin(), names.end());
    std::set<std::string> seen;
    for (const auto& n : names) {  // keep canonical order
      const bool is_free = std::find(free.begin(), free.end(), n) != free.end();
      if (is_free) m.free_params.push_back(n);
    }
    for (const auto& n : free) {
      detail::require(known.count(n) > 0, "StateModel: unknown free parameter");
      seen.insert(n);
    }
    detail::require(seen.size() == free.size(), "StateModel: duplicate free parameter");
    for (const auto& [k, v] : fixed) {
      detail::require(known.count(k) > 0, "StateModel: unknown fixed parameter");
      detail::require(seen.count(k) == 0, "StateModel: parameter both free and fixed");
      m.fixed_params[k] = v;
    }
    for (const auto& n : names)
      if (!seen.count(n) && !m.fixed_params.count(n)) m.fixed_params[n] = 0.0;
    return m;
  }

  /// All free floated, fixed values from `fixed`.
  static StateModel all_free(ModelFamily f) {
    return with_free(f, family_param_names(f));
  }
};

namespace detail {

inline double get_param(const ParamMap& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) throw std::invalid_argument("missing model parameter: " + key);
  return it->second;
}

inline void check_bounds(const ParamMap& p) {
  for (const auto& [k, v] : p) {
    auto [lo, hi] = param_bounds(k);
    if (!(v >= lo && v <= hi))
      throw std::invalid_argument("model parameter out of bounds: " + k);
  }
}

}  // namespace detail

/// Build the model state for a full parameter map.
inline OscillatorState model_state(ModelFamily family, const ParamMap& p) {
  const cplx delta(detail::get_param(p, "delta_re"), detail::get_param(p, "delta_im"));
  const double r = detail::get_param(p, "r");
  const double theta = detail::get_param(p, "theta");
  switch (family) {
    case ModelFamily::squeezed:
    case ModelFamily::displaced_squeezed:
      return make_displaced_squeezed(delta, r, theta);
    case ModelFamily::cat:
      return make_cat(cplx(detail::get_param(p, "alpha_re"), detail::get_param(p, "alpha_im")), r,
                      theta, delta);
    case ModelFamily::gkp:
      return make_gkp(cplx(detail::get_param(p, "l_re"), detail::get_param(p, "l_im")), r, theta,
                      delta);
  }
  throw std::invalid_argument("unknown model family");
}

/**
 * Predicted biased readout for one setting.  For the (displaced) squeezed
 * family the closed form
 *   chi(beta) = exp(-|beta cosh r + beta* e^{i theta} sinh r|^2 / 2)
 *               exp(beta delta* - beta* delta)
 * is evaluated directly; cat and grid models go through the general
 * superposition sum.  The scalar bias applies to the measured quadrature
 * combination exactly as in the measurement simulator.
 */
inline double model_predict(ModelFamily family, const ParamMap& p, cplx beta, double theta_quad) {
  detail::check_bounds(p);
  if (family == ModelFamily::squeezed || family == ModelFamily::displaced_squeezed) {
    const cplx delta(detail::get_param(p, "delta_re"), detail::get_param(p, "delta_im"));
    const SqueezeParam xi(detail::get_param(p, "r"), detail::get_param(p, "theta"));
    const cplx bt = squeeze_substitute(beta, xi);
    const cplx chi = std::exp(-0.5 * std::norm(bt) + beta * std::conj(delta) -
                              std::conj(beta) * delta);
    const double ideal = std::cos(theta_quad) * chi.real() + std::sin(theta_quad) * chi.imag();
    return apply_bias(ideal, SpamBias(detail::get_param(p, "b")));
  }
  const OscillatorState s = model_state(family, p);
  return biased_expectation(s, beta, theta_quad, SpamBias(detail::get_param(p, "b")));
}

/// Residual evaluator with the model state cached per parameter vector;
/// the optimizer calls it once per record.
class ModelPredictor {
 public:
  ModelPredictor(ModelFamily family, const ParamMap& p)
      : family_(family), bias_(detail::get_param(p, "b")) {
    detail::check_bounds(p);
    if (family == ModelFamily::squeezed || family == ModelFamily::displaced_squeezed) {
      delta_ = cplx(detail::get_param(p, "delta_re"), detail::get_param(p, "delta_im"));
      xi_ = SqueezeParam(detail::get_param(p, "r"), detail::get_param(p, "theta"));
      direct_ = true;
    } else {
      state_ = model_state(family, p);
    }
  }

  double operator()(cplx beta, double theta_quad) const {
    if (direct_) {
      const cplx bt = squeeze_substitute(beta, xi_);
      const cplx chi = std::exp(-0.5 * std::norm(bt) + beta * std::conj(delta_) -
                                std::conj(beta) * delta_);
      const double ideal = std::cos(theta_quad) * chi.real() + std::sin(theta_quad) * chi.imag();
      return apply_bias(ideal, bias_);
    }
    return biased_expectation(state_, beta, theta_quad, bias_);
  }

 private:
  ModelFamily family_;
  SpamBias bias_;
  bool direct_ = false;
  cplx delta_;
  SqueezeParam xi_;
  OscillatorState state_;
};

/// c_r = 1/(N - nu) sum_i (data_i - model_i)^2 / sigma_i^2 with nu the
/// number of free parameters.
inline double reduced_chi_squared(const std::vector<ReadoutRecord>& records,
                                  const StateModel& model, const ParamMap& params) {
  const std::size_t nu = model.free_params.size();
  detail::require(records.size() > nu, "reduced_chi_squared: need more points than parameters");
  ParamMap full = model.fixed_params;
  for (const auto& [k, v] : params) full[k] = v;
  const ModelPredictor predict(model.family, full);
  double ssr = 0.0;
  for (const auto& rec : records) {
    detail::require(rec.sem > 0.0, "reduced_chi_squared: sem must be positive");
    const double res = (rec.estimate - predict(rec.beta, rec.theta)) / rec.sem;
    ssr += res * res;
  }
  return ssr / double(records.size() - nu);
}

struct FitResult {
  std::vector<std::string> param_names;  // free parameters, canonical order
  ParamMap params;                       // all parameters (free fitted + fixed)
  ParamMap standard_errors;              // free parameters only
  Eigen::MatrixXd covariance;            // free-parameter covariance
  double c_r = 0.0;
  std::size_t n_points = 0;
  std::size_t n_free = 0;
  bool converged = false;
  bool singular = false;
  std::string message;
  std::vector<double> objective_trace;
};

namespace detail {

inline void wrap_theta_into_halfpi(double& theta) {
  // Orientation period pi, reported in [-pi/2, pi/2).
  theta = std::remainder(theta, M_PI);
  if (theta >= M_PI / 2.0) theta -= M_PI;
  if (theta < -M_PI / 2.0) theta += M_PI;
}

}  // namespace detail

/**
 * Weighted nonlinear least-squares fit of a state model (with bias) to
 * readout records.  Initial values come from the caller (typically the
 * independently calibrated settings); when a free parameter has no initial
 * value a coarse (r, theta) grid scan seeds the optimizer.  Degenerate cat
 * and grid parametrizations are reported with Re alpha >= 0 / Re l >= 0.
 */
inline FitResult fit(const std::vector<ReadoutRecord>& records, const StateModel& model,
                     const ParamMap& initial, const LevmarOptions& options = {}) {
  const auto& free_names = model.free_params;
  const std::size_t nfree = free_names.size();
  detail::require(nfree > 0, "fit: no free parameters");
  detail::require(records.size() > nfree, "fit: need more records than free parameters");
  for (const auto& rec : records) detail::require(rec.sem > 0.0, "fit: sem must be positive");

  auto assemble = [&](const Eigen::VectorXd& x) {
    ParamMap full = model.fixed_params;
    for (std::size_t i = 0; i < nfree; ++i) full[free_names[i]] = x[int(i)];
    return full;
  };
  auto residuals = [&](const Eigen::VectorXd& x) {
    const ModelPredictor predict(model.family, assemble(x));
    Eigen::VectorXd r(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
      r[int(i)] = (records[i].estimate - predict(records[i].beta, records[i].theta)) /
                  records[i].sem;
    return r;
  };

  Eigen::VectorXd x0(nfree), lo(nfree), hi(nfree);
  bool need_scan = false;
  for (std::size_t i = 0; i < nfree; ++i) {
    auto [l, h] = param_bounds(free_names[i]);
    lo[int(i)] = l;
    hi[int(i)] = h;
    auto it = initial.find(free_names[i]);
    if (it == initial.end()) {
      x0[int(i)] = 0.0;
      if (free_names[i] == "r" || free_names[i] == "theta") need_scan = true;
    } else {
      detail::require(it->second >= l && it->second <= h, "fit: initial value out of bounds");
      x0[int(i)] = it->second;
    }
  }

  if (need_scan) {
    // Blind start: coarse scan over the oscillatory (r, theta) landscape.
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x = x0;
    for (double r = 0.0; r <= 1.51; r += 0.1)
      for (double th = -1.5; th <= 1.51; th += 0.15) {
        Eigen::VectorXd x = x0;
        for (std::size_t i = 0; i < nfree; ++i) {
          if (free_names[i] == "r") x[int(i)] = r;
          if (free_names[i] == "theta") x[int(i)] = th;
        }
        const double f = residuals(x).squaredNorm();
        if (f < best) {
          best = f;
          best_x = x;
        }
      }
    x0 = best_x;
  }

  auto wrap = [&](Eigen::VectorXd& x) {
    for (std::size_t i = 0; i < nfree; ++i)
      if (free_names[i] == "theta") detail::wrap_theta_into_halfpi(x[int(i)]);
  };

  LevmarResult lm = levmar_fit(residuals, x0, lo, hi, wrap, options);

  FitResult out;
  out.param_names = free_names;
  out.params = assemble(lm.params);
  out.covariance = lm.covariance;
  for (std::size_t i = 0; i < nfree; ++i)
    out.standard_errors[free_names[i]] =
        lm.singular ? std::numeric_limits<double>::quiet_NaN()
                    : std::sqrt(std::max(0.0, lm.covariance(int(i), int(i))));
  out.c_r = lm.chi2 / double(records.size() - nfree);
  out.n_points = records.size();
  out.n_free = nfree;
  out.converged = lm.converged && !lm.singular;
  out.singular = lm.singular;
  out.message = lm.message;
  out.objective_trace = lm.objective_trace;
  if (!lm.converged)
    out.message = "fit did not converge: " + lm.message;

  // alpha and -alpha (l and -l) label the same state; report Re >= 0.
  auto canonicalize_sign = [&](const std::string& re_key, const std::string& im_key) {
    if (out.params.count(re_key) && out.params[re_key] < 0.0) {
      out.params[re_key] = -out.params[re_key];
      if (out.params.count(im_key)) out.params[im_key] = -out.params[im_key];
    }
  };
  if (model.family == ModelFamily::cat) canonicalize_sign("alpha_re", "alpha_im");
  if (model.family == ModelFamily::gkp) canonicalize_sign("l_re", "l_im");
  return out;
}

/// Side-by-side comparison of independently calibrated parameters and a
/// fit: both reduced chi-squares, parameter pulls in units of the fitted
/// standard error, and the state fidelity between the two parameter sets.
struct CalibrationReport {
  double c_r_calibrated = 0.0;
  double c_r_fitted = 0.0;
  ParamMap deltas_sigma;  // (fitted - calibrated) / stderr per free param
  double fidelity = 0.0;  // |<psi_cal|psi_fit>|^2, bias excluded
};

inline CalibrationReport compare_calibration(const std::vector<ReadoutRecord>& records,
                                             const StateModel& model,
                                             const ParamMap& calibrated, const FitResult& fitted,
                                             int n_max = kDefaultFockTruncation) {
  CalibrationReport rep;
  ParamMap cal = model.fixed_params;
  for (const auto& [k, v] : calibrated) cal[k] = v;
  for (const auto& name : family_param_names(model.family))
    if (!cal.count(name)) cal[name] = 0.0;  // uncalibrated free parameters default to zero
  rep.c_r_calibrated = reduced_chi_squared(records, model, cal);
  rep.c_r_fitted = reduced_chi_squared(records, model, fitted.params);
  for (const auto& name : fitted.param_names) {
    const double se = fitted.standard_errors.at(name);
    const double calval = cal.count(name) ? cal.at(name) : 0.0;
    rep.deltas_sigma[name] = (fitted.params.at(name) - calval) / se;
  }
  const OscillatorState a = model_state(model.family, cal);
  const OscillatorState b = model_state(model.family, fitted.params);
  rep.fidelity = fidelity(a, b, n_max);
  return rep;
}

// ---------------------------------------------------------------------------
// State-dependent-force calibration fit (single parameter c)
// ---------------------------------------------------------------------------

/**
 * Weighted least-squares fit of the Fock-1 calibration trace, floating the
 * shift-per-time constant c.  Reports non-convergence explicitly; a flat
 * trace drives the model to the degenerate c -> 0 corner where the design
 * matrix is singular.
 */
inline SdfCalibration fit_sdf_calibration(const std::vector<double>& times,
                                          const std::vector<double>& values,
                                          const std::vector<double>& sems,
                                          double c_init = 30.0) {
  detail::require(times.size() == values.size() && times.size() == sems.size(),
                  "fit_sdf_calibration: length mismatch");
  detail::require(times.size() >= 5, "fit_sdf_calibration: need at least 5 points");
  for (double s : sems) detail::require(s > 0.0, "fit_sdf_calibration: sems must be positive");

  auto residuals = [&](const Eigen::VectorXd& x) {
    const double c = x[0];
    Eigen::VectorXd r(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double ct = c * times[i];
      const double model = 1.0 - std::exp(-2.0 * ct * ct) * (1.0 - 4.0 * ct * ct);
      r[int(i)] = (values[i] - model) / sems[i];
    }
    return r;
  };
  Eigen::VectorXd x0(1), lo(1), hi(1);
  x0[0] = c_init;
  lo[0] = 1e-6;
  hi[0] = 1e6;
  LevmarResult lm = levmar_fit(residuals, x0, lo, hi);
  if (lm.singular || !lm.converged)
    throw std::runtime_error("fit_sdf_calibration: fit did not converge (singular or stalled)");
  SdfCalibration cal;
  cal.c = lm.params[0];
  cal.c_err = std::sqrt(std::max(0.0, lm.covariance(0, 0)));
  // A trace with no oscillation feature drives c into the flat c -> 0
  // corner, where the standard error exceeds the estimate itself.
  if (cal.c <= 2e-6 || !std::isfinite(cal.c_err) || cal.c_err >= cal.c)
    throw std::runtime_error("fit_sdf_calibration: trace does not constrain c (degenerate fit)");
  return cal;
}

}  // namespace cft
