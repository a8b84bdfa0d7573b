#pragma once

#include <cstdint>
#include <string>
#include <Eigen/Dense>

#include "dtsm/mle.hpp"
#include "dtsm/posterior.hpp"

namespace dtsm {

// Output of the in-sample latent-scale calibration. sigma_z is frozen
// afterwards; phi_z and c are kept for the record (and as starting values).
struct TuningRecord {
  Eigen::VectorXd sigma_z;
  Eigen::VectorXd phi_z;
  double c = 0.0;
  double loglik = 0.0;
  Theta yields_only_mle;
  int spec_latent_dim = 0;
};

struct TuneOptions {
  MleOptions mle;
  int restarts = 5;
  std::uint64_t seed = 77003ULL;
};

// Latent scale from the stationarity-matched parameterisation:
// sigma_z[i] = c * sqrt((1 - phi_z[i]^2) * residual_var[i]).
Eigen::VectorXd sigma_z_parameterisation(double c, const Eigen::VectorXd& phi_z,
                                         const Eigen::VectorXd& residual_var);

// Three-step in-sample procedure: (1) yields-only restricted MLE, (2) drift
// residuals and their variance at the masked coordinates, (3) simplex search
// over (phi_z, c) of the factor-dynamics likelihood with sigma_z tied to the
// parameterisation above. data.spec carries the latent mask of the target
// model; rows 0..t_idx form the training window.
TuningRecord tune_sigma_z(const EstimationData& data, int t_idx,
                          const TuneOptions& opts = {});

void save_tuning(const std::string& path, const TuningRecord& record);
TuningRecord load_tuning(const std::string& path, const ModelSpec& spec);

}  // namespace dtsm
