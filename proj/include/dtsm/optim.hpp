#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>
#include <Eigen/Dense>

namespace dtsm {

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

struct OptimResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  bool converged = false;
};

// Central finite-difference gradient.
inline Eigen::VectorXd fd_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x,
                                   double step = 1e-5) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Central finite-difference Hessian (symmetrised).
inline Eigen::MatrixXd fd_hessian(const ObjectiveFn& f, const Eigen::VectorXd& x,
                                  double step = 1e-4) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd h_mat(n, n);
  const double f0 = f(x);
  Eigen::VectorXd hs(n);
  for (Eigen::Index i = 0; i < n; ++i) hs[i] = step * std::max(1.0, std::abs(x[i]));
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    xp[i] = x[i] + hs[i];
    const double fpp = f(xp);
    xp[i] = x[i] - hs[i];
    const double fmm = f(xp);
    xp[i] = x[i];
    h_mat(i, i) = (fpp - 2.0 * f0 + fmm) / (hs[i] * hs[i]);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      xp[i] = x[i] + hs[i]; xp[j] = x[j] + hs[j];
      const double fpq = f(xp);
      xp[j] = x[j] - hs[j];
      const double fpm = f(xp);
      xp[i] = x[i] - hs[i]; xp[j] = x[j] + hs[j];
      const double fmp = f(xp);
      xp[j] = x[j] - hs[j];
      const double fmm2 = f(xp);
      xp[i] = x[i]; xp[j] = x[j];
      h_mat(i, j) = h_mat(j, i) = (fpq - fpm - fmp + fmm2) / (4.0 * hs[i] * hs[j]);
    }
  }
  return h_mat;
}

// BFGS with backtracking Armijo line search and numeric gradients.
// Minimises f; infinite values are treated as barriers by the line search.
inline OptimResult bfgs_minimize(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                                 int max_iter = 400, double grad_tol = 1e-7,
                                 double fd_step = 1e-5) {
  const Eigen::Index n = x0.size();
  OptimResult res;
  res.x = x0;
  res.value = f(x0);
  res.evaluations = 1;
  if (!std::isfinite(res.value)) return res;

  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g = fd_gradient(f, res.x, fd_step);
  res.evaluations += 2 * static_cast<int>(n);

  for (int it = 0; it < max_iter; ++it) {
    if (g.norm() < grad_tol) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd dir = -(h_inv * g);
    double slope = g.dot(dir);
    if (slope >= 0.0) {  // stale curvature; restart from steepest descent
      h_inv.setIdentity();
      dir = -g;
      slope = g.dot(dir);
    }
    double alpha = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = res.x + alpha * dir;
      f_new = f(x_new);
      ++res.evaluations;
      if (std::isfinite(f_new) && f_new <= res.value + 1e-4 * alpha * slope) break;
      alpha *= 0.5;
    }
    if (!std::isfinite(f_new) || f_new > res.value) break;  // no progress

    Eigen::VectorXd g_new = fd_gradient(f, x_new, fd_step);
    res.evaluations += 2 * static_cast<int>(n);
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      h_inv = (eye - rho * s * y.transpose()) * h_inv *
                  (eye - rho * y * s.transpose()) +
              rho * s * s.transpose();
    }
    const double improvement = res.value - f_new;
    res.x = x_new;
    res.value = f_new;
    g = g_new;
    if (improvement < 1e-12 * (1.0 + std::abs(res.value))) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// Nelder-Mead simplex; robust fallback for low-dimensional non-smooth fits.
inline OptimResult nelder_mead_minimize(const ObjectiveFn& f,
                                        const Eigen::VectorXd& x0,
                                        double initial_step = 0.5,
                                        int max_iter = 2000, double tol = 1e-10) {
  const Eigen::Index n = x0.size();
  const Eigen::Index m = n + 1;
  std::vector<Eigen::VectorXd> pts(m, x0);
  std::vector<double> vals(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (i > 0) pts[i][i - 1] += initial_step * std::max(1.0, std::abs(x0[i - 1]));
    vals[i] = f(pts[i]);
  }
  OptimResult res;
  res.evaluations = static_cast<int>(m);

  std::vector<Eigen::Index> order(m);
  auto rank = [&] {
    for (Eigen::Index i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return vals[a] < vals[b]; });
  };

  for (int it = 0; it < max_iter; ++it) {
    rank();
    const Eigen::Index best = order[0], worst = order[m - 1], second = order[m - 2];
    if (std::isfinite(vals[best]) &&
        std::abs(vals[worst] - vals[best]) <
            tol * (1.0 + std::abs(vals[best]))) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < m; ++i)
      if (i != worst) centroid += pts[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflect = centroid + (centroid - pts[worst]);
    const double fr = f(reflect);
    ++res.evaluations;
    if (fr < vals[order[0]]) {
      const Eigen::VectorXd expand = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = f(expand);
      ++res.evaluations;
      if (fe < fr) { pts[worst] = expand; vals[worst] = fe; }
      else { pts[worst] = reflect; vals[worst] = fr; }
    } else if (fr < vals[second]) {
      pts[worst] = reflect;
      vals[worst] = fr;
    } else {
      const Eigen::VectorXd contract =
          centroid + 0.5 * (pts[worst] - centroid);
      const double fc = f(contract);
      ++res.evaluations;
      if (fc < vals[worst]) { pts[worst] = contract; vals[worst] = fc; }
      else {
        for (Eigen::Index i = 0; i < m; ++i) {
          if (i == order[0]) continue;
          pts[i] = pts[order[0]] + 0.5 * (pts[i] - pts[order[0]]);
          vals[i] = f(pts[i]);
          ++res.evaluations;
        }
      }
    }
  }
  rank();
  res.x = pts[order[0]];
  res.value = vals[order[0]];
  return res;
}

// Golden-section maximisation of a unimodal function on [lo, hi].
inline double golden_section_maximize(const std::function<double(double)>& f,
                                      double lo, double hi, double tol = 1e-6) {
  constexpr double inv_phi = 0.61803398874989484820;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d; d = c; fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace dtsm
