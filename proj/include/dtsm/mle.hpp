#pragma once

#include <cstdint>
#include <Eigen/Dense>

#include "dtsm/math.hpp"
#include "dtsm/posterior.hpp"
#include "dtsm/transforms.hpp"

namespace dtsm {

// Independence-sampler proposals for the three parameter blocks, multivariate
// t with 5 degrees of freedom by default.
struct BlockProposals {
  MvtProposal sigma_block;
  MvtProposal q_block;
  MvtProposal lambda_block;
};

struct MleOptions {
  int max_iter = 400;
  int restarts = 3;
  double fd_step = 1e-5;
  double hessian_step = 1e-4;
  double proposal_scale = 1.2;
  double proposal_dof = 5.0;
  std::uint64_t seed = 20240501ULL;
};

struct MleResult {
  Theta theta;               // sigma_e2 filled with its conditional maximiser
  Eigen::VectorXd mode_u;    // unconstrained coordinates of the mode
  Eigen::MatrixXd hessian;   // log-likelihood Hessian at the mode
  BlockProposals proposals;
  double loglik = 0.0;
  bool hessian_fallback = false;
  bool converged = false;
};

// Data-driven starting point: VAR(1) moments of the factor series.
Theta initial_theta_guess(const EstimationData& data, int t_idx);

// Maximum-likelihood fit (sigma_e2 concentrated out) by quasi-Newton on the
// unconstrained coordinates with random restarts, followed by a
// finite-difference Hessian and per-block proposal construction.
MleResult mle_fit(const EstimationData& data, const Eigen::VectorXd& sigma_z,
                  int t_idx, const MleOptions& opts = {});

// Proposals centred at the mode with scale from the inverse curvature. Falls
// back to a diagonal estimate when the Hessian is not negative definite.
BlockProposals proposals_from_hessian(const ThetaTransform& transform,
                                      const Eigen::VectorXd& mode_u,
                                      const Eigen::MatrixXd& loglik_hessian,
                                      double scale, double dof,
                                      bool* used_fallback);

// Proposals re-estimated from a weighted particle cloud in unconstrained
// coordinates (rows = particles).
BlockProposals proposals_from_cloud(const ThetaTransform& transform,
                                    const Eigen::MatrixXd& u_rows,
                                    const Eigen::VectorXd& weights,
                                    double scale, double dof);

}  // namespace dtsm
