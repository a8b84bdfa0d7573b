#pragma once

#include <cstdint>
#include <Eigen/Dense>

#include "dtsm/transforms.hpp"
#include "dtsm/types.hpp"

namespace dtsm {

struct SimulatedData {
  Eigen::MatrixXd yields;   // (T+1) x J, per-month decimals
  Eigen::MatrixXd factors;  // (T+1) x R, exactly w * y_t
  Eigen::MatrixXd latents;  // (T+1) x m, the true latent path
  PCWeights weights;
};

// Generates a synthetic panel from the model: latent AR(1) and factor VAR
// simulated from their joint stationary distribution, yields mapped through
// the loadings with isotropic measurement noise confined to the null space of
// the weighting matrix (so factors are observed exactly).
SimulatedData simulate_panel(const Theta& theta_true,
                             const Eigen::VectorXd& sigma_z_true,
                             const ModelSpec& spec, const PCWeights& weights,
                             int t_n, std::uint64_t seed);

}  // namespace dtsm
