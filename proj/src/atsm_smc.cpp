#include "dtsm/atsm_smc.hpp"

#include <stdexcept>

namespace dtsm {

AtsmSmcModel::AtsmSmcModel(std::shared_ptr<const EstimationData> data,
                           Eigen::VectorXd sigma_z, int n_prior_obs,
                           int jitter_sweeps, double proposal_scale,
                           double proposal_dof)
    : data_(std::move(data)),
      sigma_z_(std::move(sigma_z)),
      transform_(data_->spec),
      prior_(PriorSpec::standard(transform_, n_prior_obs)),
      jitter_sweeps_(jitter_sweeps),
      proposal_scale_(proposal_scale),
      proposal_dof_(proposal_dof) {
  data_->validate();
  if (sigma_z_.size() != data_->spec.latent_dim())
    throw std::invalid_argument("AtsmSmcModel: sigma_z length != latent dim");
}

void AtsmSmcModel::stage(Particle& p, int t) const {
  if (!p.parts)
    p.parts = std::make_shared<const ModelParts>(
        assemble_model(p.theta, sigma_z_, *data_));
  KalmanState next = p.state;
  const double log_q = q_term(*p.parts, *data_, t, p.theta.sigma_e2);
  const double log_p = log_increment(*p.parts, *data_, t, next);
  p.staged_state = std::move(next);
  p.staged_log_u = log_q + log_p;
}

void AtsmSmcModel::commit(Particle& p, int) const { p.state = p.staged_state; }

AtsmSmcModel::Proposals AtsmSmcModel::make_proposals(
    const std::vector<Particle>& particles, const Eigen::VectorXd& weights) const {
  return proposals_from_cloud(transform_, unconstrained_rows(particles, transform_),
                              weights, proposal_scale_, proposal_dof_);
}

void AtsmSmcModel::jitter(Particle& p, int t, double phi,
                          const Proposals& proposals, Rng& rng) const {
  Theta theta = p.theta;
  for (int sweep = 0; sweep < jitter_sweeps_; ++sweep)
    theta = mcmc_sweep(theta, *data_, sigma_z_, prior_, transform_, phi, t,
                       proposals, rng);
  p.theta = std::move(theta);
  p.parts = std::make_shared<const ModelParts>(
      assemble_model(p.theta, sigma_z_, *data_));
  p.state = filter_to(*p.parts, *data_, t - 1);
}

AtsmSmcModel::Particle AtsmSmcModel::make_particle(Theta theta, int t_idx) const {
  Particle p;
  p.theta = std::move(theta);
  p.parts = std::make_shared<const ModelParts>(
      assemble_model(p.theta, sigma_z_, *data_));
  p.state = filter_to(*p.parts, *data_, t_idx);
  return p;
}

Eigen::MatrixXd unconstrained_rows(const std::vector<AtsmParticle>& particles,
                                   const ThetaTransform& transform) {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(particles.size()),
                       transform.dim());
  for (std::size_t i = 0; i < particles.size(); ++i)
    rows.row(static_cast<Eigen::Index>(i)) =
        transform.to_unconstrained(particles[i].theta).transpose();
  return rows;
}

std::vector<Theta> mcmc_chain(const EstimationData& data,
                              const Eigen::VectorXd& sigma_z,
                              const PriorSpec& prior,
                              const ThetaTransform& transform, int t_idx,
                              Theta init, const BlockProposals& proposals,
                              int n_keep, const ChainOptions& opts,
                              SweepDiagnostics* totals) {
  Rng rng(stream_seed(opts.seed, 0x636861696eULL));
  std::vector<Theta> kept;
  kept.reserve(static_cast<std::size_t>(n_keep));
  Theta theta = std::move(init);
  SweepDiagnostics acc;
  const int total_sweeps = opts.burn_in + n_keep * opts.thin;
  for (int sweep = 0; sweep < total_sweeps; ++sweep) {
    SweepDiagnostics diag;
    theta = mcmc_sweep(theta, data, sigma_z, prior, transform, 1.0, t_idx,
                       proposals, rng, &diag);
    acc.accept_sigma += diag.accept_sigma;
    acc.accept_q += diag.accept_q;
    acc.accept_lambda += diag.accept_lambda;
    if (sweep >= opts.burn_in && (sweep - opts.burn_in) % opts.thin == 0 &&
        static_cast<int>(kept.size()) < n_keep)
      kept.push_back(theta);
  }
  if (totals) *totals = acc;
  return kept;
}

}  // namespace dtsm
