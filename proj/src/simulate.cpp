#include "dtsm/simulate.hpp"

#include <stdexcept>

#include "dtsm/kalman.hpp"
#include "dtsm/math.hpp"
#include "dtsm/posterior.hpp"
#include "dtsm/pricing.hpp"
#include "dtsm/rng.hpp"

namespace dtsm {

SimulatedData simulate_panel(const Theta& theta_true,
                             const Eigen::VectorXd& sigma_z_true,
                             const ModelSpec& spec, const PCWeights& weights,
                             int t_n, std::uint64_t seed) {
  spec.validate();
  const int r = spec.n_factors;
  const int m = spec.latent_dim();
  const auto j = static_cast<Eigen::Index>(spec.maturities.size());

  const YieldModel ym = build_yield_model(theta_true.k_inf_q, theta_true.g_q,
                                          theta_true.sigma_p, weights,
                                          spec.maturities);
  PDynamics dyn;
  dyn.mu_p = ym.qdyn.mu_q + theta_true.lambda0;
  dyn.phi_p = ym.qdyn.phi_q + theta_true.lambda1;
  dyn.sigma_p = theta_true.sigma_p;
  const LatentSpec lat =
      LatentSpec::from_mask(spec.latent_mask, theta_true.phi_z, sigma_z_true);

  // joint transition [P; Z] and its stationary moments
  const int d = r + m;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  a.topLeftCorner(r, r) = dyn.phi_p;
  if (m > 0) {
    a.topRightCorner(r, m) = lat.selection;
    a.bottomRightCorner(m, m) = lat.phi_z.asDiagonal();
  }
  if (a.eigenvalues().cwiseAbs().maxCoeff() >= 1.0)
    throw std::invalid_argument("simulate_panel: explosive joint dynamics");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
  c.head(r) = dyn.mu_p;
  Eigen::MatrixXd q_mat = Eigen::MatrixXd::Zero(d, d);
  q_mat.topLeftCorner(r, r) = dyn.sigma_p * dyn.sigma_p.transpose();
  if (m > 0)
    q_mat.bottomRightCorner(m, m) =
        Eigen::MatrixXd(sigma_z_true.array().square().matrix().asDiagonal());

  const Eigen::VectorXd stat_mean =
      (Eigen::MatrixXd::Identity(d, d) - a).partialPivLu().solve(c);
  // vec(V) = (I - A (x) A)^{-1} vec(Q), column-major vec
  Eigen::MatrixXd kron = Eigen::MatrixXd::Identity(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      for (int jj = 0; jj < d; ++jj)
        for (int l = 0; l < d; ++l)
          kron(i * d + k, jj * d + l) -= a(i, jj) * a(k, l);
  const Eigen::VectorXd q_vec =
      Eigen::Map<const Eigen::VectorXd>(q_mat.data(), d * d);
  const Eigen::VectorXd v_vec = kron.partialPivLu().solve(q_vec);
  Eigen::MatrixXd stat_cov = Eigen::Map<const Eigen::MatrixXd>(v_vec.data(), d, d);
  stat_cov = 0.5 * (stat_cov + stat_cov.transpose());

  Rng rng(stream_seed(seed, 0x73696dULL));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(stat_cov);
  const Eigen::MatrixXd stat_chol =
      es.eigenvectors() *
      es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  Eigen::VectorXd state = stat_mean + stat_chol * rng.normal_vector(d);

  SimulatedData out;
  out.weights = weights;
  out.yields.resize(t_n + 1, j);
  out.factors.resize(t_n + 1, r);
  out.latents.resize(t_n + 1, m);

  const double sigma_e = std::sqrt(std::max(theta_true.sigma_e2, 0.0));
  auto emit = [&](int t) {
    const Eigen::VectorXd p = state.head(r);
    const Eigen::VectorXd noise =
        sigma_e * (weights.w_perp.transpose() *
                   rng.normal_vector(j - r));
    const Eigen::VectorXd y = ym.lp.a_p + ym.lp.b_p * p + noise;
    out.yields.row(t) = y.transpose();
    out.factors.row(t) = (weights.w * y).transpose();
    if (m > 0) out.latents.row(t) = state.tail(m).transpose();
  };

  emit(0);
  for (int t = 1; t <= t_n; ++t) {
    Eigen::VectorXd next(d);
    next.head(r) = dyn.mu_p + dyn.phi_p * state.head(r) +
                   lat.selection * state.tail(m) +
                   dyn.sigma_p * rng.normal_vector(r);
    if (m > 0)
      next.tail(m) = lat.phi_z.cwiseProduct(state.tail(m)) +
                     sigma_z_true.cwiseProduct(rng.normal_vector(m));
    state = next;
    emit(t);
  }
  return out;
}

}  // namespace dtsm
