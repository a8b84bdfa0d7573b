#pragma once

#include <memory>
#include <vector>

#include "dtsm/mcmc.hpp"
#include "dtsm/mle.hpp"
#include "dtsm/posterior.hpp"
#include "dtsm/smc.hpp"

namespace dtsm {

// One parameter particle: theta, its filter state at the cloud's time index,
// the staged (not yet committed) state for the observation being absorbed,
// and the assembled pricing/dynamics cache shared between copies.
struct AtsmParticle {
  Theta theta;
  KalmanState state;
  KalmanState staged_state;
  double staged_log_u = 0.0;
  std::shared_ptr<const ModelParts> parts;
};

class AtsmSmcModel {
 public:
  using Particle = AtsmParticle;
  using Proposals = BlockProposals;

  AtsmSmcModel(std::shared_ptr<const EstimationData> data,
               Eigen::VectorXd sigma_z, int n_prior_obs, int jitter_sweeps = 5,
               double proposal_scale = 1.2, double proposal_dof = 5.0);

  void stage(Particle& p, int t) const;
  double staged_log_u(const Particle& p) const { return p.staged_log_u; }
  void commit(Particle& p, int t) const;
  Proposals make_proposals(const std::vector<Particle>& particles,
                           const Eigen::VectorXd& weights) const;
  void jitter(Particle& p, int t, double phi, const Proposals& proposals,
              Rng& rng) const;

  // Assembles the cache and runs the filter through t_idx.
  Particle make_particle(Theta theta, int t_idx) const;

  const EstimationData& data() const { return *data_; }
  const Eigen::VectorXd& sigma_z() const { return sigma_z_; }
  const ThetaTransform& transform() const { return transform_; }
  const PriorSpec& prior() const { return prior_; }

 private:
  std::shared_ptr<const EstimationData> data_;
  Eigen::VectorXd sigma_z_;
  ThetaTransform transform_;
  PriorSpec prior_;
  int jitter_sweeps_;
  double proposal_scale_;
  double proposal_dof_;
};

// Unconstrained-coordinate rows of a particle set; used for proposal moments
// and posterior summaries.
Eigen::MatrixXd unconstrained_rows(const std::vector<AtsmParticle>& particles,
                                   const ThetaTransform& transform);

// Long MCMC run used both for warm-starting the particle cloud and as an
// offline reference sampler. Returns kept draws after burn-in and thinning.
struct ChainOptions {
  int burn_in = 2000;
  int thin = 1;
  std::uint64_t seed = 99ULL;
};
std::vector<Theta> mcmc_chain(const EstimationData& data,
                              const Eigen::VectorXd& sigma_z,
                              const PriorSpec& prior,
                              const ThetaTransform& transform, int t_idx,
                              Theta init, const BlockProposals& proposals,
                              int n_keep, const ChainOptions& opts,
                              SweepDiagnostics* totals = nullptr);

}  // namespace dtsm
