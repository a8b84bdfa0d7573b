#pragma once

#include <Eigen/Dense>

#include "dtsm/mle.hpp"
#include "dtsm/posterior.hpp"
#include "dtsm/rng.hpp"
#include "dtsm/transforms.hpp"

namespace dtsm {

// Conjugate inverse-gamma draw for the measurement-error variance; the prior
// is diffuse (both hyperparameters zero). A tiny floor protects against an
// exactly-zero residual sum.
double gibbs_sigma_e2(const ResidualStats& stats, Rng& rng);

struct SweepDiagnostics {
  int accept_sigma = 0;
  int accept_q = 0;
  int accept_lambda = 0;
};

// One full sweep of the block sampler targeting the posterior through t_idx
// with the final increment tempered by phi: Gibbs for sigma_e2, then
// independence Metropolis-Hastings updates of (sigma_p), (k_inf, g) and
// (phi_z, risk prices).
Theta mcmc_sweep(Theta theta, const EstimationData& data,
                 const Eigen::VectorXd& sigma_z, const PriorSpec& prior,
                 const ThetaTransform& transform, double phi, int t_idx,
                 const BlockProposals& proposals, Rng& rng,
                 SweepDiagnostics* diag = nullptr);

}  // namespace dtsm
