#include "dtsm/posterior.hpp"

#include <cmath>
#include <stdexcept>

#include "dtsm/math.hpp"

namespace dtsm {

void EstimationData::validate() const {
  spec.validate();
  if (yields.rows() != factors.rows())
    throw std::invalid_argument("EstimationData: yields/factors row mismatch");
  if (yields.cols() != static_cast<Eigen::Index>(maturities.size()))
    throw std::invalid_argument("EstimationData: yields columns != maturities");
  if (factors.cols() != spec.n_factors)
    throw std::invalid_argument("EstimationData: factor columns != n_factors");
  if (weights.w.rows() != spec.n_factors || weights.w.cols() != yields.cols())
    throw std::invalid_argument("EstimationData: weight matrix shape");
  if (weights.w_perp.rows() != yields.cols() - spec.n_factors)
    throw std::invalid_argument("EstimationData: w_perp shape");
}

ModelParts assemble_model(const Theta& theta, const Eigen::VectorXd& sigma_z,
                          const EstimationData& data) {
  ModelParts parts;
  parts.yield_model = build_yield_model(theta.k_inf_q, theta.g_q, theta.sigma_p,
                                        data.weights, data.maturities);
  parts.dyn.mu_p = parts.yield_model.qdyn.mu_q + theta.lambda0;
  parts.dyn.phi_p = parts.yield_model.qdyn.phi_q + theta.lambda1;
  parts.dyn.sigma_p = theta.sigma_p;
  parts.lat = LatentSpec::from_mask(data.spec.latent_mask, theta.phi_z, sigma_z);
  return parts;
}

double q_term(const ModelParts& parts, const EstimationData& data, int t,
              double sigma_e2) {
  return q_log_density(data.yields.row(t), data.factors.row(t),
                       parts.yield_model.lp, data.weights, sigma_e2);
}

double log_increment(const ModelParts& parts, const EstimationData& data, int t,
                     KalmanState& state) {
  if (t < 1 || t >= data.rows())
    throw std::invalid_argument("log_increment: time index out of range");
  auto step = kalman_step(state, data.factors.row(t - 1), data.factors.row(t),
                          parts.dyn, parts.lat);
  state = step.state;
  return step.log_density;
}

KalmanState filter_to(const ModelParts& parts, const EstimationData& data,
                      int t_idx) {
  KalmanState state = KalmanState::initial(parts.lat);
  for (int t = 1; t <= t_idx; ++t) {
    auto step = kalman_step(state, data.factors.row(t - 1), data.factors.row(t),
                            parts.dyn, parts.lat);
    state = step.state;
  }
  return state;
}

double log_likelihood(const Theta& theta, const EstimationData& data,
                      const Eigen::VectorXd& sigma_z, double phi, int t_idx) {
  if (t_idx < 0 || t_idx >= data.rows())
    throw std::invalid_argument("log_likelihood: t_idx out of range");
  const ModelParts parts = assemble_model(theta, sigma_z, data);

  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(2 * t_idx + 1));
  for (int t = 0; t < t_idx; ++t)
    terms.push_back(q_term(parts, data, t, theta.sigma_e2));
  KalmanState state = KalmanState::initial(parts.lat);
  for (int t = 1; t < t_idx; ++t)
    terms.push_back(log_increment(parts, data, t, state));

  double tail = q_term(parts, data, t_idx, theta.sigma_e2);
  if (t_idx >= 1) tail += log_increment(parts, data, t_idx, state);
  terms.push_back(phi * tail);
  return pairwise_sum(terms);
}

double log_posterior(const Theta& theta, const EstimationData& data,
                     const Eigen::VectorXd& sigma_z, const PriorSpec& prior,
                     const ThetaTransform& transform, double phi,
                     int t_idx) noexcept {
  try {
    const double loglik = log_likelihood(theta, data, sigma_z, phi, t_idx);
    const double logprior = prior.log_density(transform.to_unconstrained(theta)) -
                            std::log(theta.sigma_e2);
    const double value = loglik + logprior;
    return std::isfinite(value) ? value : kNegInf;
  } catch (const std::exception&) {
    return kNegInf;
  }
}

ResidualStats projected_residual_stats(const ModelParts& parts,
                                       const EstimationData& data, double phi,
                                       int t_idx) {
  const double m = static_cast<double>(data.yields.cols() - data.spec.n_factors);
  ResidualStats stats;
  std::vector<double> sq;
  sq.reserve(static_cast<std::size_t>(t_idx + 1));
  for (int t = 0; t <= t_idx; ++t) {
    const Eigen::VectorXd resid = data.yields.row(t).transpose() -
                                  parts.yield_model.lp.a_p -
                                  parts.yield_model.lp.b_p *
                                      data.factors.row(t).transpose();
    const double w = (t == t_idx) ? phi : 1.0;
    sq.push_back(w * (data.weights.w_perp * resid).squaredNorm());
    stats.alpha += w * m;
  }
  stats.beta = pairwise_sum(sq);
  return stats;
}

double concentrated_loglik(const Theta& theta, const EstimationData& data,
                           const Eigen::VectorXd& sigma_z, int t_idx,
                           double* sigma_e2_hat) {
  const ModelParts parts = assemble_model(theta, sigma_z, data);
  const ResidualStats stats = projected_residual_stats(parts, data, 1.0, t_idx);
  const double s2 = std::max(stats.beta / stats.alpha, 1e-18);
  if (sigma_e2_hat) *sigma_e2_hat = s2;
  const double q_part = -0.5 * stats.alpha * (kLog2Pi + std::log(s2) + 1.0);

  std::vector<double> p_terms;
  p_terms.reserve(static_cast<std::size_t>(t_idx));
  KalmanState state = KalmanState::initial(parts.lat);
  for (int t = 1; t <= t_idx; ++t)
    p_terms.push_back(log_increment(parts, data, t, state));
  return q_part + pairwise_sum(p_terms);
}

}  // namespace dtsm
