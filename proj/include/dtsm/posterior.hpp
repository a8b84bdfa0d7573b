#pragma once

#include <vector>
#include <Eigen/Dense>

#include "dtsm/kalman.hpp"
#include "dtsm/pricing.hpp"
#include "dtsm/transforms.hpp"
#include "dtsm/types.hpp"

namespace dtsm {

// Immutable data bundle used by every likelihood evaluation. Yields are in
// per-month decimal units; factors are the PC series w * y_t.
struct EstimationData {
  Eigen::MatrixXd yields;   // rows t = 0..T
  Eigen::MatrixXd factors;  // rows t = 0..T
  PCWeights weights;
  std::vector<int> maturities;
  ModelSpec spec;

  int rows() const { return static_cast<int>(yields.rows()); }
  void validate() const;
};

// Everything the likelihood needs for one parameter value.
struct ModelParts {
  YieldModel yield_model;
  PDynamics dyn;
  LatentSpec lat;
};

// Builds loadings, rotated Q-dynamics, physical dynamics (risk prices applied)
// and the latent block (theta.phi_z with the tuned sigma_z). Throws on
// numerically invalid parameter values.
ModelParts assemble_model(const Theta& theta, const Eigen::VectorXd& sigma_z,
                          const EstimationData& data);

// Cross-sectional log-density of row t.
double q_term(const ModelParts& parts, const EstimationData& data, int t,
              double sigma_e2);

// log f(Y_t | Y_{t-1}, theta): measurement density at t plus the Kalman
// predictive density of the factor transition; advances state from t-1 to t.
double log_increment(const ModelParts& parts, const EstimationData& data, int t,
                     KalmanState& state);

// Runs the filter over transitions 1..t_idx starting from the initial state.
KalmanState filter_to(const ModelParts& parts, const EstimationData& data,
                      int t_idx);

// Log-likelihood of data through t_idx with the time-t_idx increment raised to
// the power phi (phi = 1 gives the plain likelihood). Throws on failures.
double log_likelihood(const Theta& theta, const EstimationData& data,
                      const Eigen::VectorXd& sigma_z, double phi, int t_idx);

// log_likelihood + normal priors on the unconstrained coordinates + the
// diffuse inverse-gamma factor for sigma_e2. Returns -infinity instead of
// throwing, so samplers can reject invalid proposals.
double log_posterior(const Theta& theta, const EstimationData& data,
                     const Eigen::VectorXd& sigma_z, const PriorSpec& prior,
                     const ThetaTransform& transform, double phi,
                     int t_idx) noexcept;

// Sums of projected squared measurement residuals through t_idx, with the
// final row weighted by phi. alpha counts (J - R) per (weighted) row.
struct ResidualStats {
  double alpha = 0.0;
  double beta = 0.0;
};
ResidualStats projected_residual_stats(const ModelParts& parts,
                                       const EstimationData& data, double phi,
                                       int t_idx);

// Log-likelihood with sigma_e2 profiled out at its conditional maximum;
// used by the maximum-likelihood fit. Fills sigma_e2_hat.
double concentrated_loglik(const Theta& theta, const EstimationData& data,
                           const Eigen::VectorXd& sigma_z, int t_idx,
                           double* sigma_e2_hat);

}  // namespace dtsm
