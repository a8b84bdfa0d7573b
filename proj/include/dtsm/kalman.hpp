#pragma once

#include <vector>
#include <Eigen/Dense>

#include "dtsm/rng.hpp"

namespace dtsm {

// Physical-measure dynamics of the observed factors.
struct PDynamics {
  Eigen::VectorXd mu_p;     // R
  Eigen::MatrixXd phi_p;    // R x R
  Eigen::MatrixXd sigma_p;  // R x R lower Cholesky of the innovation covariance
};

// Unspanned latent dynamics: diagonal AR(1) with diagonal innovation scale,
// embedded into the factor equations through a 0/1 selection matrix.
struct LatentSpec {
  Eigen::VectorXd phi_z;      // m, entries in (-1, 1)
  Eigen::VectorXd sigma_z;    // m, entries >= 0
  Eigen::MatrixXd selection;  // R x m

  int dim() const { return static_cast<int>(phi_z.size()); }

  static LatentSpec from_mask(const std::vector<bool>& mask,
                              const Eigen::VectorXd& phi_z,
                              const Eigen::VectorXd& sigma_z);
  void validate() const;
};

// Filtered moments of the latent state at time t.
struct KalmanState {
  Eigen::VectorXd a_filt;  // m
  Eigen::MatrixXd p_filt;  // m x m, symmetric PSD
  int t = 0;

  static KalmanState initial(const LatentSpec& lat);
};

struct KalmanStepResult {
  KalmanState state;
  double log_density = 0.0;
};

// One predict/update cycle on the drift residual s_t = p_curr - mu - Phi p_prev.
// Returns the updated state and the one-step predictive log-density of p_curr.
KalmanStepResult kalman_step(const KalmanState& state,
                             const Eigen::VectorXd& p_prev,
                             const Eigen::VectorXd& p_curr,
                             const PDynamics& dyn, const LatentSpec& lat);

struct KalmanLoglik {
  double loglik = 0.0;
  KalmanState final_state;
};

// Sum of step log-densities over factor rows 0..T (first row conditions only).
KalmanLoglik kalman_loglik(const Eigen::MatrixXd& factors, const PDynamics& dyn,
                           const LatentSpec& lat);

// Draw of the next-period factor vector: latent state from its filtered
// distribution, propagated one step, then the factor equation.
Eigen::VectorXd latent_predictive_draw(const KalmanState& state,
                                       const Eigen::VectorXd& p_t,
                                       const PDynamics& dyn,
                                       const LatentSpec& lat, Rng& rng);

// Draw alpha ~ N(a_filt, p_filt); used when a predictive path is iterated.
Eigen::VectorXd draw_latent_state(const KalmanState& state, Rng& rng);

// One latent transition alpha' ~ N(diag(phi_z) alpha, diag(sigma_z)^2).
Eigen::VectorXd step_latent(const Eigen::VectorXd& alpha, const LatentSpec& lat,
                            Rng& rng);

// Factor equation draw given the (already propagated) latent innovation term.
Eigen::VectorXd draw_factors(const Eigen::VectorXd& p_t,
                             const Eigen::VectorXd& alpha_next,
                             const PDynamics& dyn, const LatentSpec& lat,
                             Rng& rng);

}  // namespace dtsm
