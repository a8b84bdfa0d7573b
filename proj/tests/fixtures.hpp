#pragma once

// Shared synthetic-model fixtures for the estimation-side tests.

#include <vector>

#include "dtsm/pca.hpp"
#include "dtsm/posterior.hpp"
#include "dtsm/simulate.hpp"
#include "dtsm/transforms.hpp"
#include "dtsm/types.hpp"

namespace fixtures {

inline dtsm::ModelSpec make_spec(std::vector<bool> mask,
                                 std::vector<int> maturities = {1, 11, 12, 23,
                                                                24, 35, 36, 59,
                                                                60, 84, 120}) {
  dtsm::ModelSpec spec;
  spec.n_factors = 3;
  spec.latent_mask = std::move(mask);
  spec.maturities = std::move(maturities);
  spec.restriction = dtsm::RiskPriceRestriction::kLambda12Only;
  return spec;
}

// Monthly-decimal parameter values of realistic magnitude.
inline dtsm::Theta true_theta(const dtsm::ModelSpec& spec) {
  dtsm::Theta th = dtsm::Theta::zero(spec);
  th.k_inf_q = 1.2e-5;
  th.g_q.resize(3);
  th.g_q << 0.997, 0.95, 0.88;
  th.sigma_p.setZero();
  th.sigma_p(0, 0) = 2.5e-4;
  th.sigma_p(1, 0) = -3e-5;
  th.sigma_p(1, 1) = 1.2e-4;
  th.sigma_p(2, 0) = 1e-5;
  th.sigma_p(2, 1) = -2e-5;
  th.sigma_p(2, 2) = 6e-5;
  th.phi_z.setConstant(0.9);
  th.lambda1(0, 1) = 0.08;
  th.sigma_e2 = 6.4e-9;
  return th;
}

inline Eigen::VectorXd true_sigma_z(const dtsm::ModelSpec& spec,
                                    double scale = 1.0e-4) {
  return Eigen::VectorXd::Constant(spec.latent_dim(), scale);
}

inline dtsm::EstimationData to_estimation_data(const dtsm::SimulatedData& sim,
                                               const dtsm::ModelSpec& spec) {
  dtsm::EstimationData data;
  data.yields = sim.yields;
  data.factors = sim.factors;
  data.weights = sim.weights;
  data.maturities = spec.maturities;
  data.spec = spec;
  data.validate();
  return data;
}

inline dtsm::EstimationData simulated_dataset(const dtsm::ModelSpec& spec,
                                              int t_n, std::uint64_t seed) {
  const dtsm::Theta th = true_theta(spec);
  const Eigen::VectorXd sz = true_sigma_z(spec);
  const dtsm::PCWeights w = dtsm::polynomial_weights(
      spec.n_factors, static_cast<int>(spec.maturities.size()));
  return to_estimation_data(
      dtsm::simulate_panel(th, sz, spec, w, t_n, seed), spec);
}

}  // namespace fixtures
