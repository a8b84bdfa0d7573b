#pragma once

#include <cmath>
#include <vector>
#include <Eigen/Dense>

#include "dtsm/types.hpp"

namespace dtsm {

// Full parameter vector of the estimation problem. lambda0/lambda1 always have
// factor dimension; under the restricted risk-price pattern only entry (0, 1)
// of lambda1 is free and everything else stays pinned at zero.
struct Theta {
  double sigma_e2 = 1e-6;
  double k_inf_q = 1e-3;
  Eigen::VectorXd g_q;
  Eigen::MatrixXd sigma_p;  // lower Cholesky, PC coordinates
  Eigen::VectorXd phi_z;    // diagonal latent feedback, length = latent dim
  Eigen::VectorXd lambda0;
  Eigen::MatrixXd lambda1;

  double lambda12() const { return lambda1(0, 1); }

  static Theta zero(const ModelSpec& spec);
};

// Bijection between Theta (minus sigma_e2, which moves by Gibbs) and an
// unconstrained coordinate vector:
//   log k_inf; eigenvalue head through atanh-style logit, then log-spacings;
//   log sigma_p diagonal with off-diagonals scaled by 1e4; logit phi_z;
//   risk-price entries raw.
class ThetaTransform {
 public:
  explicit ThetaTransform(const ModelSpec& spec);

  int dim() const { return dim_; }
  const ModelSpec& spec() const { return spec_; }

  Eigen::VectorXd to_unconstrained(const Theta& theta) const;
  Theta from_unconstrained(const Eigen::VectorXd& u) const;

  // Coordinate index blocks used by the block samplers.
  const std::vector<int>& q_block() const { return q_block_; }           // k_inf, g
  const std::vector<int>& sigma_block() const { return sigma_block_; }   // sigma_p
  const std::vector<int>& lambda_block() const { return lambda_block_; } // phi_z, risk prices
  // Index of the single restricted risk-price coordinate, -1 when maximally flexible.
  int lambda12_index() const { return lambda12_index_; }

 private:
  ModelSpec spec_;
  int dim_ = 0;
  std::vector<int> q_block_, sigma_block_, lambda_block_;
  int lambda12_index_ = -1;
};

// Independent zero-mean normal priors on the unconstrained coordinates.
// sigma_e2 is excluded (conjugate inverse-gamma handled by its Gibbs move).
struct PriorSpec {
  Eigen::VectorXd variance;

  static PriorSpec standard(const ThetaTransform& transform, int n_observations,
                            double default_variance = 1e6,
                            double phi_z_variance = 2.0);

  double log_density(const Eigen::VectorXd& u) const;
};

inline double logit_pm1(double x) { return std::log((1.0 + x) / (1.0 - x)); }
inline double inv_logit_pm1(double u) { return std::tanh(0.5 * u); }

}  // namespace dtsm
