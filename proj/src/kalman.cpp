#include "dtsm/kalman.hpp"

#include <stdexcept>

#include "dtsm/math.hpp"

namespace dtsm {

LatentSpec LatentSpec::from_mask(const std::vector<bool>& mask,
                                 const Eigen::VectorXd& phi_z,
                                 const Eigen::VectorXd& sigma_z) {
  int m = 0;
  for (bool b : mask) m += b ? 1 : 0;
  if (phi_z.size() != m || sigma_z.size() != m)
    throw std::invalid_argument("LatentSpec: parameter length != mask count");
  LatentSpec lat;
  lat.phi_z = phi_z;
  lat.sigma_z = sigma_z;
  lat.selection = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mask.size()), m);
  int col = 0;
  for (std::size_t r = 0; r < mask.size(); ++r)
    if (mask[r]) lat.selection(static_cast<Eigen::Index>(r), col++) = 1.0;
  lat.validate();
  return lat;
}

void LatentSpec::validate() const {
  if (sigma_z.size() != phi_z.size() || selection.cols() != phi_z.size())
    throw std::invalid_argument("LatentSpec: inconsistent dimensions");
  for (Eigen::Index i = 0; i < phi_z.size(); ++i) {
    if (!(std::abs(phi_z[i]) < 1.0))
      throw std::invalid_argument("LatentSpec: |phi_z| >= 1");
    if (sigma_z[i] < 0.0)
      throw std::invalid_argument("LatentSpec: sigma_z < 0");
  }
}

KalmanState KalmanState::initial(const LatentSpec& lat) {
  KalmanState st;
  const int m = lat.dim();
  st.a_filt = Eigen::VectorXd::Zero(m);
  st.p_filt = lat.sigma_z.array().square().matrix().asDiagonal();
  st.t = 0;
  return st;
}

KalmanStepResult kalman_step(const KalmanState& state,
                             const Eigen::VectorXd& p_prev,
                             const Eigen::VectorXd& p_curr,
                             const PDynamics& dyn, const LatentSpec& lat) {
  const Eigen::Index r = p_curr.size();
  const Eigen::VectorXd s = p_curr - dyn.mu_p - dyn.phi_p * p_prev;

  // predict
  const Eigen::VectorXd a_pred = lat.phi_z.cwiseProduct(state.a_filt);
  Eigen::MatrixXd p_pred = lat.phi_z.asDiagonal() * state.p_filt *
                           lat.phi_z.asDiagonal();
  p_pred += Eigen::MatrixXd(lat.sigma_z.array().square().matrix().asDiagonal());

  // update
  const Eigen::MatrixXd& sel = lat.selection;
  const Eigen::VectorXd v = s - sel * a_pred;
  Eigen::MatrixXd f = sel * p_pred * sel.transpose() +
                      dyn.sigma_p * dyn.sigma_p.transpose();
  f = 0.5 * (f + f.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(f);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("kalman_step: prediction-error covariance not positive definite");

  const Eigen::VectorXd f_inv_v = llt.solve(v);
  const double logdet =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double log_density =
      -0.5 * static_cast<double>(r) * kLog2Pi - 0.5 * (logdet + v.dot(f_inv_v));

  KalmanStepResult out;
  out.state.t = state.t + 1;
  if (lat.dim() > 0) {
    const Eigen::MatrixXd k_gain = llt.solve(sel * p_pred).transpose();
    out.state.a_filt = a_pred + k_gain * v;
    Eigen::MatrixXd p_filt = p_pred - k_gain * sel * p_pred;
    out.state.p_filt = 0.5 * (p_filt + p_filt.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.state.p_filt,
                                                      Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw std::runtime_error("kalman_step: filtered covariance lost positive semidefiniteness");
  } else {
    out.state.a_filt = a_pred;
    out.state.p_filt = p_pred;
  }
  out.log_density = log_density;
  return out;
}

KalmanLoglik kalman_loglik(const Eigen::MatrixXd& factors, const PDynamics& dyn,
                           const LatentSpec& lat) {
  if (factors.rows() < 2)
    throw std::invalid_argument("kalman_loglik: need at least two factor rows");
  KalmanLoglik out;
  KalmanState state = KalmanState::initial(lat);
  std::vector<double> increments;
  increments.reserve(static_cast<std::size_t>(factors.rows() - 1));
  for (Eigen::Index t = 1; t < factors.rows(); ++t) {
    auto step = kalman_step(state, factors.row(t - 1), factors.row(t), dyn, lat);
    increments.push_back(step.log_density);
    state = step.state;
  }
  out.loglik = pairwise_sum(increments);
  out.final_state = state;
  return out;
}

Eigen::VectorXd draw_latent_state(const KalmanState& state, Rng& rng) {
  const Eigen::Index m = state.a_filt.size();
  if (m == 0) return state.a_filt;
  // p_filt can be singular (zero latent scale), so factor via eigenvalues.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(state.p_filt);
  const Eigen::VectorXd scale = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return state.a_filt +
         es.eigenvectors() * scale.cwiseProduct(rng.normal_vector(m));
}

Eigen::VectorXd step_latent(const Eigen::VectorXd& alpha, const LatentSpec& lat,
                            Rng& rng) {
  return lat.phi_z.cwiseProduct(alpha) +
         lat.sigma_z.cwiseProduct(rng.normal_vector(alpha.size()));
}

Eigen::VectorXd draw_factors(const Eigen::VectorXd& p_t,
                             const Eigen::VectorXd& alpha_next,
                             const PDynamics& dyn, const LatentSpec& lat,
                             Rng& rng) {
  return dyn.mu_p + dyn.phi_p * p_t + lat.selection * alpha_next +
         dyn.sigma_p * rng.normal_vector(p_t.size());
}

Eigen::VectorXd latent_predictive_draw(const KalmanState& state,
                                       const Eigen::VectorXd& p_t,
                                       const PDynamics& dyn,
                                       const LatentSpec& lat, Rng& rng) {
  const Eigen::VectorXd alpha = draw_latent_state(state, rng);
  const Eigen::VectorXd alpha_next = step_latent(alpha, lat, rng);
  return draw_factors(p_t, alpha_next, dyn, lat, rng);
}

}  // namespace dtsm
