#pragma once

#include <span>
#include <vector>
#include <Eigen/Dense>

#include "dtsm/types.hpp"

namespace dtsm {

// Yield loadings on the canonical states: y_n = a_x[n] + b_x.row(n) * x.
// Raw log-price loadings (a_raw, b_raw) are kept for excess-return algebra.
struct LoadingsX {
  Eigen::VectorXd a_x;        // J
  Eigen::MatrixXd b_x;        // J x R
  Eigen::VectorXd a_raw;      // J, log-price intercepts
  Eigen::MatrixXd b_raw;      // J x R, log-price slopes
  std::vector<int> maturities;
};

// Yield loadings on the observed PC factors: y = a_p + b_p * p.
struct LoadingsP {
  Eigen::VectorXd a_p;  // J
  Eigen::MatrixXd b_p;  // J x R
};

// Risk-neutral drift and feedback of the PC factors implied by the rotation.
struct PcQDynamics {
  Eigen::VectorXd mu_q;   // R
  Eigen::MatrixXd phi_q;  // R x R
};

// Slope recursion b_{-(n+1)} = Phi_Q' b_{-n} - ones; independent of sigma.
// Returns yield-scale slopes, rows indexed by requested maturity.
Eigen::MatrixXd compute_b_slopes(const Eigen::VectorXd& g_q,
                                 std::span<const int> maturities);

// Full intercept + slope recursion with q.sigma taken as the innovation
// Cholesky factor in state coordinates. Yields are per-month decimals.
LoadingsX compute_x_loadings(const QParams& q, std::span<const int> maturities);

// a_p = a_x - b_x (W b_x)^{-1} W a_x,  b_p = b_x (W b_x)^{-1}.
// Requires cond(W b_x) below the cap; only the first R rows of weights.w are
// assumed present (weights.w is R x J).
LoadingsP rotate_to_pc(const LoadingsX& lx, const PCWeights& weights,
                       double condition_cap = 1e10);

// mu_q = W b_x mu_x + (I - phi_q) W a_x,  phi_q = (W b_x) diag(g) (W b_x)^{-1}.
PcQDynamics pc_q_dynamics(const LoadingsX& lx, const PCWeights& weights,
                          const QParams& q);

// Orthonormal basis of the null space of w (rows orthonormal, w * basis' = 0).
Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& w);

// Cross-sectional measurement log-density: projects the pricing residual
// e = y - a_p - b_p p onto the null space of W and evaluates the isotropic
// Gaussian of dimension J - R.
double q_log_density(const Eigen::VectorXd& yields, const Eigen::VectorXd& factors,
                     const LoadingsP& lp, const PCWeights& weights,
                     double sigma_e2);

// Bundle of everything the likelihood needs for one parameter value when the
// innovation Cholesky is given in PC coordinates (the estimation primitive):
// slopes are sigma-free, so sigma_x = (W b_x)^{-1} sigma_p is resolved first
// and the intercept recursion is run with it.
struct YieldModel {
  LoadingsX lx;
  LoadingsP lp;
  PcQDynamics qdyn;
  Eigen::MatrixXd sigma_x;  // state-coordinate innovation factor
};

YieldModel build_yield_model(double k_inf_q, const Eigen::VectorXd& g_q,
                             const Eigen::MatrixXd& sigma_p,
                             const PCWeights& weights,
                             std::span<const int> maturities,
                             double condition_cap = 1e10);

// Loadings on the PC factors at arbitrary maturities. The rotation (and the
// innovation coordinate change) is pinned to the observation grid, so
// maturities off that grid still get model-implied loadings.
LoadingsP pc_loadings_at(double k_inf_q, const Eigen::VectorXd& g_q,
                         const Eigen::MatrixXd& sigma_p,
                         const PCWeights& weights,
                         std::span<const int> obs_maturities,
                         std::span<const int> eval_maturities,
                         double condition_cap = 1e10);

}  // namespace dtsm
