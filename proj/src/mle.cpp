#include "dtsm/mle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dtsm/optim.hpp"
#include "dtsm/rng.hpp"

namespace dtsm {
namespace {

Eigen::VectorXd slice(const Eigen::VectorXd& u, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = u[idx[i]];
  return out;
}

Eigen::MatrixXd slice(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = m(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  return out;
}

// Lower Cholesky of a covariance with an eigenvalue floor so that degenerate
// clouds still produce usable proposals.
Eigen::MatrixXd robust_cholesky(Eigen::MatrixXd cov) {
  cov = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const double floor_val =
      std::max(1e-12, 1e-8 * std::max(es.eigenvalues().maxCoeff(), 0.0));
  const Eigen::VectorXd fixed = es.eigenvalues().cwiseMax(floor_val);
  const Eigen::MatrixXd spd = es.eigenvectors() * fixed.asDiagonal() *
                              es.eigenvectors().transpose();
  return Eigen::LLT<Eigen::MatrixXd>(spd).matrixL();
}

MvtProposal make_block(const Eigen::VectorXd& mean_full,
                       const Eigen::MatrixXd& cov_full,
                       const std::vector<int>& idx, double scale, double dof) {
  MvtProposal p;
  p.mu = slice(mean_full, idx);
  p.scale_chol = scale * robust_cholesky(slice(cov_full, idx));
  p.dof = dof;
  return p;
}

}  // namespace

Theta initial_theta_guess(const EstimationData& data, int t_idx) {
  const int r = data.spec.n_factors;
  const Eigen::MatrixXd p = data.factors.topRows(t_idx + 1);
  const Eigen::Index t_n = p.rows() - 1;

  // VAR(1): regress p_t on [1, p_{t-1}].
  Eigen::MatrixXd x(t_n, r + 1);
  x.col(0).setOnes();
  x.rightCols(r) = p.topRows(t_n);
  const Eigen::MatrixXd y = p.bottomRows(t_n);
  const Eigen::MatrixXd coef =
      (x.transpose() * x).ldlt().solve(x.transpose() * y);
  const Eigen::MatrixXd resid = y - x * coef;
  Eigen::MatrixXd cov = resid.transpose() * resid /
                        static_cast<double>(std::max<Eigen::Index>(t_n - r - 1, 1));
  cov += 1e-14 * Eigen::MatrixXd::Identity(r, r);

  Theta th = Theta::zero(data.spec);
  th.sigma_p = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();

  // Q eigenvalues: spread persistent defaults; keep ordered and inside (-1, 1).
  th.g_q.resize(r);
  for (int i = 0; i < r; ++i)
    th.g_q[i] = 0.997 - 0.06 * i;

  const double short_mean = data.yields.col(0).head(t_idx + 1).mean();
  th.k_inf_q = std::max(1e-7, short_mean * (1.0 - th.g_q[0]));
  th.phi_z.setConstant(0.3);
  th.sigma_e2 = 1e-8;
  return th;
}

MleResult mle_fit(const EstimationData& data, const Eigen::VectorXd& sigma_z,
                  int t_idx, const MleOptions& opts) {
  data.validate();
  if (t_idx < 60)
    throw std::invalid_argument("mle_fit: need at least 60 training observations");
  const ThetaTransform transform(data.spec);

  const ObjectiveFn negloglik = [&](const Eigen::VectorXd& u) -> double {
    try {
      const Theta th = transform.from_unconstrained(u);
      return -concentrated_loglik(th, data, sigma_z, t_idx, nullptr);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const Eigen::VectorXd u0 =
      transform.to_unconstrained(initial_theta_guess(data, t_idx));
  Rng rng(stream_seed(opts.seed, 0x4d4c45));
  OptimResult best;
  for (int attempt = 0; attempt < std::max(1, opts.restarts); ++attempt) {
    Eigen::VectorXd start = u0;
    if (attempt > 0)
      for (Eigen::Index i = 0; i < start.size(); ++i)
        start[i] += 0.3 * rng.normal();
    OptimResult res = bfgs_minimize(negloglik, start, opts.max_iter, 1e-7,
                                    opts.fd_step);
    if (res.value < best.value) best = res;
  }
  if (!std::isfinite(best.value))
    throw std::runtime_error("mle_fit: optimiser failed to find a finite likelihood");

  MleResult out;
  out.mode_u = best.x;
  out.converged = best.converged;
  out.loglik = -best.value;
  out.theta = transform.from_unconstrained(best.x);
  double s2 = 0.0;
  concentrated_loglik(out.theta, data, sigma_z, t_idx, &s2);
  out.theta.sigma_e2 = s2;

  out.hessian = -fd_hessian(negloglik, best.x, opts.hessian_step);
  out.proposals =
      proposals_from_hessian(transform, out.mode_u, out.hessian,
                             opts.proposal_scale, opts.proposal_dof,
                             &out.hessian_fallback);
  return out;
}

BlockProposals proposals_from_hessian(const ThetaTransform& transform,
                                      const Eigen::VectorXd& mode_u,
                                      const Eigen::MatrixXd& loglik_hessian,
                                      double scale, double dof,
                                      bool* used_fallback) {
  const Eigen::Index n = mode_u.size();
  Eigen::MatrixXd neg_h = -loglik_hessian;
  neg_h = 0.5 * (neg_h + neg_h.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(neg_h);
  Eigen::MatrixXd cov;
  bool fallback = false;
  if (llt.info() == Eigen::Success) {
    cov = llt.solve(Eigen::MatrixXd::Identity(n, n));
  } else {
    fallback = true;  // curvature unusable; keep marginal scales only
    cov = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      cov(i, i) = 1.0 / std::max(std::abs(neg_h(i, i)), 1e-6);
  }
  if (used_fallback) *used_fallback = fallback;

  BlockProposals props;
  props.sigma_block = make_block(mode_u, cov, transform.sigma_block(), scale, dof);
  props.q_block = make_block(mode_u, cov, transform.q_block(), scale, dof);
  props.lambda_block = make_block(mode_u, cov, transform.lambda_block(), scale, dof);
  return props;
}

BlockProposals proposals_from_cloud(const ThetaTransform& transform,
                                    const Eigen::MatrixXd& u_rows,
                                    const Eigen::VectorXd& weights,
                                    double scale, double dof) {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  weighted_moments(u_rows, weights, mean, cov);
  BlockProposals props;
  props.sigma_block = make_block(mean, cov, transform.sigma_block(), scale, dof);
  props.q_block = make_block(mean, cov, transform.q_block(), scale, dof);
  props.lambda_block = make_block(mean, cov, transform.lambda_block(), scale, dof);
  return props;
}

}  // namespace dtsm
