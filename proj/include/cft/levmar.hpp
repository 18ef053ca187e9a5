#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace cft {

struct LevmarOptions {
  int max_iterations = 200;
  double ftol = 1e-12;        // relative objective decrease
  double xtol = 1e-12;        // relative step size
  double fd_step = 1e-6;      // relative finite-difference step
  double lambda0 = 1e-3;      // initial damping
};

struct LevmarResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;   // (J^T J)^-1 of weighted residuals at optimum
  double chi2 = 0.0;            // sum of squared weighted residuals
  int iterations = 0;
  bool converged = false;
  bool singular = false;        // normal matrix not invertible at optimum
  std::string message;
  std::vector<double> objective_trace;  // objective after each accepted step
};

/**
 * Damped least squares (Levenberg-Marquardt) on weighted residuals.
 *
 * `residuals` maps parameters to (data - model) / sigma.  Box bounds are
 * enforced by clamping trial steps; `wrap` may fold periodic parameters
 * back into range after each accepted step.  The Jacobian is computed by
 * central finite differences.  Accepted iterations never increase the
 * objective.
 */
inline LevmarResult levmar_fit(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residuals,
    Eigen::VectorXd x0, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
    const std::function<void(Eigen::VectorXd&)>& wrap = nullptr,
    const LevmarOptions& opt = {}) {
  const int np = int(x0.size());
  auto clamp = [&](Eigen::VectorXd& x) {
    for (int i = 0; i < np; ++i) x[i] = std::min(upper[i], std::max(lower[i], x[i]));
  };
  clamp(x0);
  if (wrap) wrap(x0);

  auto objective = [&](const Eigen::VectorXd& r) { return r.squaredNorm(); };

  Eigen::VectorXd x = x0;
  Eigen::VectorXd r = residuals(x);
  double f = objective(r);
  const int nr = int(r.size());

  auto jacobian = [&](const Eigen::VectorXd& at) {
    Eigen::MatrixXd J(nr, np);
    for (int i = 0; i < np; ++i) {
      double h = opt.fd_step * std::max(1.0, std::abs(at[i]));
      Eigen::VectorXd xp = at, xm = at;
      xp[i] += h;
      xm[i] -= h;
      clamp(xp);
      clamp(xm);
      const double denom = xp[i] - xm[i];
      if (denom == 0.0) {
        J.col(i).setZero();
        continue;
      }
      // residual = (data - model)/sigma, so J holds d(residual)/d(param)
      J.col(i) = (residuals(xp) - residuals(xm)) / denom;
    }
    return J;
  };

  LevmarResult res;
  res.objective_trace.push_back(f);
  double lambda = opt.lambda0;
  int iter = 0;
  bool converged = false;
  std::string message = "max iterations reached";

  for (; iter < opt.max_iterations; ++iter) {
    Eigen::MatrixXd J = jacobian(x);
    Eigen::MatrixXd JtJ = J.transpose() * J;
    Eigen::VectorXd g = J.transpose() * r;  // gradient/2 of ||r||^2

    if (g.lpNorm<Eigen::Infinity>() < 1e-14 * std::max(1.0, f)) {
      converged = true;
      message = "gradient below tolerance";
      break;
    }

    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      Eigen::MatrixXd A = JtJ;
      for (int i = 0; i < np; ++i) A(i, i) += lambda * std::max(JtJ(i, i), 1e-12);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
      if (ldlt.info() != Eigen::Success) {
        lambda *= 10.0;
        continue;
      }
      Eigen::VectorXd step = ldlt.solve(-g);
      Eigen::VectorXd xt = x + step;
      clamp(xt);
      if (wrap) wrap(xt);
      Eigen::VectorXd rt = residuals(xt);
      const double ft = objective(rt);
      if (ft < f) {
        const double rel_drop = (f - ft) / std::max(f, 1e-300);
        const double rel_step = (xt - x).norm() / std::max(1.0, x.norm());
        x = xt;
        r = rt;
        f = ft;
        res.objective_trace.push_back(f);
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (rel_drop < opt.ftol || rel_step < opt.xtol) {
          converged = true;
          message = "converged";
        }
      } else {
        lambda *= 3.0;
      }
    }
    if (!accepted) {
      converged = true;  // no downhill direction left at machine precision
      message = "no further decrease possible";
      break;
    }
    if (converged) break;
  }

  res.params = x;
  res.chi2 = f;
  res.iterations = iter + 1;
  res.converged = converged;
  res.message = message;

  // Covariance from the weighted normal matrix at the optimum.
  Eigen::MatrixXd J = jacobian(x);
  Eigen::MatrixXd JtJ = J.transpose() * J;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(JtJ);
  if (lu.isInvertible()) {
    res.covariance = lu.inverse();
  } else {
    res.singular = true;
    res.covariance = Eigen::MatrixXd::Constant(np, np, std::numeric_limits<double>::quiet_NaN());
  }
  return res;
}

}  // namespace cft
