#include "dtsm/transforms.hpp"

#include <stdexcept>

#include "dtsm/math.hpp"

namespace dtsm {

Theta Theta::zero(const ModelSpec& spec) {
  const int r = spec.n_factors;
  Theta th;
  th.g_q = Eigen::VectorXd::Zero(r);
  th.sigma_p = Eigen::MatrixXd::Identity(r, r);
  th.phi_z = Eigen::VectorXd::Zero(spec.latent_dim());
  th.lambda0 = Eigen::VectorXd::Zero(r);
  th.lambda1 = Eigen::MatrixXd::Zero(r, r);
  return th;
}

ThetaTransform::ThetaTransform(const ModelSpec& spec) : spec_(spec) {
  spec_.validate();
  const int r = spec.n_factors;
  const int m = spec.latent_dim();
  int idx = 0;
  q_block_.push_back(idx++);                       // log k_inf
  for (int i = 0; i < r; ++i) q_block_.push_back(idx++);  // eigenvalue coords
  for (int i = 0; i < r; ++i)
    for (int j = 0; j <= i; ++j) sigma_block_.push_back(idx++);
  for (int i = 0; i < m; ++i) lambda_block_.push_back(idx++);
  if (spec.restriction == RiskPriceRestriction::kLambda12Only) {
    lambda12_index_ = idx;
    lambda_block_.push_back(idx++);
  } else {
    for (int i = 0; i < r; ++i) lambda_block_.push_back(idx++);  // lambda0
    for (int i = 0; i < r * r; ++i) lambda_block_.push_back(idx++);
  }
  dim_ = idx;
}

Eigen::VectorXd ThetaTransform::to_unconstrained(const Theta& theta) const {
  const int r = spec_.n_factors;
  const int m = spec_.latent_dim();
  if (theta.g_q.size() != r || theta.phi_z.size() != m)
    throw std::invalid_argument("ThetaTransform: theta dimension mismatch");
  if (!(theta.k_inf_q > 0.0))
    throw std::invalid_argument("ThetaTransform: k_inf_q must be positive");

  Eigen::VectorXd u(dim_);
  int idx = 0;
  u[idx++] = std::log(theta.k_inf_q);
  u[idx++] = logit_pm1(theta.g_q[0]);
  for (int i = 1; i < r; ++i) {
    const double gap = theta.g_q[i - 1] - theta.g_q[i];
    if (!(gap > 0.0))
      throw std::invalid_argument("ThetaTransform: eigenvalues must strictly decrease");
    u[idx++] = std::log(gap);
  }
  for (int i = 0; i < r; ++i)
    for (int j = 0; j <= i; ++j)
      u[idx++] = (i == j) ? std::log(theta.sigma_p(i, j))
                          : 1e4 * theta.sigma_p(i, j);
  for (int i = 0; i < m; ++i) u[idx++] = logit_pm1(theta.phi_z[i]);
  if (spec_.restriction == RiskPriceRestriction::kLambda12Only) {
    u[idx++] = theta.lambda1(0, 1);
  } else {
    for (int i = 0; i < r; ++i) u[idx++] = theta.lambda0[i];
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) u[idx++] = theta.lambda1(i, j);
  }
  return u;
}

Theta ThetaTransform::from_unconstrained(const Eigen::VectorXd& u) const {
  if (u.size() != dim_)
    throw std::invalid_argument("ThetaTransform: coordinate vector length mismatch");
  const int r = spec_.n_factors;
  const int m = spec_.latent_dim();
  Theta th = Theta::zero(spec_);
  int idx = 0;
  th.k_inf_q = std::exp(u[idx++]);
  th.g_q[0] = inv_logit_pm1(u[idx++]);
  for (int i = 1; i < r; ++i) th.g_q[i] = th.g_q[i - 1] - std::exp(u[idx++]);
  th.sigma_p.setZero();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j <= i; ++j) {
      th.sigma_p(i, j) = (i == j) ? std::exp(u[idx]) : u[idx] / 1e4;
      ++idx;
    }
  for (int i = 0; i < m; ++i) th.phi_z[i] = inv_logit_pm1(u[idx++]);
  if (spec_.restriction == RiskPriceRestriction::kLambda12Only) {
    th.lambda1(0, 1) = u[idx++];
  } else {
    for (int i = 0; i < r; ++i) th.lambda0[i] = u[idx++];
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) th.lambda1(i, j) = u[idx++];
  }
  return th;
}

PriorSpec PriorSpec::standard(const ThetaTransform& transform, int n_observations,
                              double default_variance, double phi_z_variance) {
  PriorSpec prior;
  prior.variance = Eigen::VectorXd::Constant(transform.dim(), default_variance);
  const int m = transform.spec().latent_dim();
  const auto& lam = transform.lambda_block();
  for (int i = 0; i < m; ++i) prior.variance[lam[static_cast<std::size_t>(i)]] = phi_z_variance;
  if (transform.lambda12_index() >= 0)
    prior.variance[transform.lambda12_index()] =
        static_cast<double>(n_observations);
  return prior;
}

double PriorSpec::log_density(const Eigen::VectorXd& u) const {
  if (u.size() != variance.size())
    throw std::invalid_argument("PriorSpec: dimension mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    acc += log_normal_pdf(u[i], 0.0, variance[i]);
  return acc;
}

}  // namespace dtsm
