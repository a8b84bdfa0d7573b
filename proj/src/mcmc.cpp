#include "dtsm/mcmc.hpp"

#include <cmath>
#include <vector>

#include "dtsm/math.hpp"

namespace dtsm {
namespace {

Eigen::VectorXd block_values(const Eigen::VectorXd& u, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = u[idx[i]];
  return out;
}

void set_block(Eigen::VectorXd& u, const std::vector<int>& idx,
               const Eigen::VectorXd& values) {
  for (std::size_t i = 0; i < idx.size(); ++i)
    u[idx[i]] = values[static_cast<Eigen::Index>(i)];
}

}  // namespace

double gibbs_sigma_e2(const ResidualStats& stats, Rng& rng) {
  const double beta = std::max(stats.beta, 1e-14);
  return rng.inverse_gamma(0.5 * stats.alpha, 0.5 * beta);
}

Theta mcmc_sweep(Theta theta, const EstimationData& data,
                 const Eigen::VectorXd& sigma_z, const PriorSpec& prior,
                 const ThetaTransform& transform, double phi, int t_idx,
                 const BlockProposals& proposals, Rng& rng,
                 SweepDiagnostics* diag) {
  // (a) measurement-error variance from its full conditional
  {
    const ModelParts parts = assemble_model(theta, sigma_z, data);
    const ResidualStats stats = projected_residual_stats(parts, data, phi, t_idx);
    theta.sigma_e2 = gibbs_sigma_e2(stats, rng);
  }

  double current =
      log_posterior(theta, data, sigma_z, prior, transform, phi, t_idx);
  Eigen::VectorXd u = transform.to_unconstrained(theta);

  struct BlockRef {
    const std::vector<int>* idx;
    const MvtProposal* proposal;
    int* accept;
  };
  SweepDiagnostics local;
  const BlockRef blocks[] = {
      {&transform.sigma_block(), &proposals.sigma_block, &local.accept_sigma},
      {&transform.q_block(), &proposals.q_block, &local.accept_q},
      {&transform.lambda_block(), &proposals.lambda_block, &local.accept_lambda},
  };

  for (const auto& block : blocks) {
    if (block.idx->empty()) continue;
    const Eigen::VectorXd cand_vals = block.proposal->sample(rng);
    Eigen::VectorXd u_cand = u;
    set_block(u_cand, *block.idx, cand_vals);
    Theta cand = transform.from_unconstrained(u_cand);
    cand.sigma_e2 = theta.sigma_e2;
    const double cand_post =
        log_posterior(cand, data, sigma_z, prior, transform, phi, t_idx);
    const double log_ratio = cand_post - current +
                             block.proposal->log_pdf(block_values(u, *block.idx)) -
                             block.proposal->log_pdf(cand_vals);
    if (std::isfinite(cand_post) && std::log(rng.uniform()) < log_ratio) {
      theta = std::move(cand);
      u = u_cand;
      current = cand_post;
      *block.accept = 1;
    }
  }
  if (diag) *diag = local;
  return theta;
}

}  // namespace dtsm
