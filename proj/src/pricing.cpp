#include "dtsm/pricing.hpp"

#include <cmath>
#include <stdexcept>

#include "dtsm/math.hpp"

namespace dtsm {
namespace {

void check_maturities(std::span<const int> maturities) {
  if (maturities.empty()) throw std::invalid_argument("maturities empty");
  int prev = 0;
  for (int n : maturities) {
    if (n <= prev) throw std::invalid_argument("maturities not strictly increasing");
    prev = n;
  }
  if (maturities.back() > 1200)
    throw std::invalid_argument("maturities beyond 1200 months");
}

// One pass of the log-price recursion. sigma may be any square factor; only
// sigma * sigma' enters.
LoadingsX loading_recursion(double k_inf, const Eigen::VectorXd& g,
                            const Eigen::MatrixXd& sigma,
                            std::span<const int> maturities) {
  const Eigen::Index r = g.size();
  const int max_n = maturities.back();
  const Eigen::MatrixXd omega = sigma * sigma.transpose();

  LoadingsX out;
  out.maturities.assign(maturities.begin(), maturities.end());
  const auto j = static_cast<Eigen::Index>(maturities.size());
  out.a_x.resize(j);
  out.b_x.resize(j, r);
  out.a_raw.resize(j);
  out.b_raw.resize(j, r);

  double a_n = 0.0;                                   // -delta_0
  Eigen::VectorXd b_n = -Eigen::VectorXd::Ones(r);    // -delta_1
  std::size_t slot = 0;
  for (int n = 1; n <= max_n; ++n) {
    if (!b_n.allFinite() || b_n.cwiseAbs().maxCoeff() > 1e10)
      throw std::runtime_error("loading recursion overflow at n=" + std::to_string(n) +
                               " (|g| >= 1 with long maturity?)");
    if (slot < maturities.size() && maturities[slot] == n) {
      out.a_raw[static_cast<Eigen::Index>(slot)] = a_n;
      out.b_raw.row(static_cast<Eigen::Index>(slot)) = b_n.transpose();
      out.a_x[static_cast<Eigen::Index>(slot)] = -a_n / n;
      out.b_x.row(static_cast<Eigen::Index>(slot)) = -b_n.transpose() / n;
      ++slot;
    }
    a_n += b_n[0] * k_inf + 0.5 * b_n.dot(omega * b_n);
    b_n = g.asDiagonal() * b_n - Eigen::VectorXd::Ones(r);
  }
  return out;
}

Eigen::MatrixXd solve_wbx(const Eigen::MatrixXd& wbx, double condition_cap) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(wbx);
  const auto& sv = svd.singularValues();
  if (sv[sv.size() - 1] <= 0.0 || sv[0] / sv[sv.size() - 1] > condition_cap)
    throw std::runtime_error(
        "rotate_to_pc: W * B_x is numerically singular (knife-edge weighting)");
  return wbx.partialPivLu().inverse();
}

}  // namespace

Eigen::MatrixXd compute_b_slopes(const Eigen::VectorXd& g_q,
                                 std::span<const int> maturities) {
  check_maturities(maturities);
  const Eigen::Index r = g_q.size();
  Eigen::MatrixXd b(static_cast<Eigen::Index>(maturities.size()), r);
  Eigen::VectorXd b_n = -Eigen::VectorXd::Ones(r);
  std::size_t slot = 0;
  for (int n = 1; n <= maturities.back(); ++n) {
    if (!b_n.allFinite() || b_n.cwiseAbs().maxCoeff() > 1e10)
      throw std::runtime_error("slope recursion overflow at n=" + std::to_string(n));
    if (slot < maturities.size() && maturities[slot] == n) {
      b.row(static_cast<Eigen::Index>(slot)) = -b_n.transpose() / n;
      ++slot;
    }
    b_n = g_q.asDiagonal() * b_n - Eigen::VectorXd::Ones(r);
  }
  return b;
}

LoadingsX compute_x_loadings(const QParams& q, std::span<const int> maturities) {
  q.validate();
  check_maturities(maturities);
  for (Eigen::Index i = 0; i + 1 < q.g_q.size(); ++i)
    if (q.g_q[i] == q.g_q[i + 1])
      throw std::invalid_argument("compute_x_loadings: eigenvalues must be distinct");
  return loading_recursion(q.k_inf_q, q.g_q, q.sigma, maturities);
}

LoadingsP rotate_to_pc(const LoadingsX& lx, const PCWeights& weights,
                       double condition_cap) {
  const Eigen::MatrixXd& w = weights.w;
  if (w.cols() != lx.b_x.rows())
    throw std::invalid_argument("rotate_to_pc: W columns != number of maturities");
  const Eigen::MatrixXd wbx_inv = solve_wbx(w * lx.b_x, condition_cap);
  LoadingsP lp;
  lp.b_p = lx.b_x * wbx_inv;
  lp.a_p = lx.a_x - lp.b_p * (w * lx.a_x);
  return lp;
}

PcQDynamics pc_q_dynamics(const LoadingsX& lx, const PCWeights& weights,
                          const QParams& q) {
  const Eigen::MatrixXd wbx = weights.w * lx.b_x;
  const Eigen::MatrixXd wbx_inv = solve_wbx(wbx, 1e10);
  Eigen::VectorXd mu_x = Eigen::VectorXd::Zero(q.g_q.size());
  mu_x[0] = q.k_inf_q;
  PcQDynamics dyn;
  dyn.phi_q = wbx * q.g_q.asDiagonal() * wbx_inv;
  dyn.mu_q = wbx * mu_x +
             (Eigen::MatrixXd::Identity(dyn.phi_q.rows(), dyn.phi_q.cols()) -
              dyn.phi_q) *
                 (weights.w * lx.a_x);
  return dyn;
}

Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& w) {
  const Eigen::Index r = w.rows(), j = w.cols();
  if (r >= j) throw std::invalid_argument("null_space_basis: need more columns than rows");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv[r - 1] <= 1e-12 * sv[0])
    throw std::invalid_argument("null_space_basis: rank-deficient weighting matrix");
  return svd.matrixV().rightCols(j - r).transpose();
}

double q_log_density(const Eigen::VectorXd& yields, const Eigen::VectorXd& factors,
                     const LoadingsP& lp, const PCWeights& weights,
                     double sigma_e2) {
  if (!(sigma_e2 > 0.0)) throw std::invalid_argument("q_log_density: sigma_e2 <= 0");
  if (yields.size() != lp.a_p.size() || factors.size() != lp.b_p.cols())
    throw std::invalid_argument("q_log_density: dimension mismatch");
  const Eigen::VectorXd resid = yields - lp.a_p - lp.b_p * factors;
  const Eigen::VectorXd projected = weights.w_perp * resid;
  const double m = static_cast<double>(projected.size());
  return -0.5 * m * (kLog2Pi + std::log(sigma_e2)) -
         0.5 * projected.squaredNorm() / sigma_e2;
}

YieldModel build_yield_model(double k_inf_q, const Eigen::VectorXd& g_q,
                             const Eigen::MatrixXd& sigma_p,
                             const PCWeights& weights,
                             std::span<const int> maturities,
                             double condition_cap) {
  check_maturities(maturities);
  for (Eigen::Index i = 0; i + 1 < g_q.size(); ++i)
    if (!(g_q[i] > g_q[i + 1]))
      throw std::invalid_argument("build_yield_model: eigenvalues must decrease");

  const Eigen::MatrixXd b_slopes = compute_b_slopes(g_q, maturities);
  const Eigen::MatrixXd wbx = weights.w * b_slopes;
  const Eigen::MatrixXd wbx_inv = solve_wbx(wbx, condition_cap);

  YieldModel model;
  model.sigma_x = wbx_inv * sigma_p;
  model.lx = loading_recursion(k_inf_q, g_q, model.sigma_x, maturities);
  // the slope recursion is sigma-free, so W * lx.b_x == wbx
  model.lp.b_p = model.lx.b_x * wbx_inv;
  model.lp.a_p = model.lx.a_x - model.lp.b_p * (weights.w * model.lx.a_x);

  Eigen::VectorXd mu_x = Eigen::VectorXd::Zero(g_q.size());
  mu_x[0] = k_inf_q;
  model.qdyn.phi_q = wbx * g_q.asDiagonal() * wbx_inv;
  model.qdyn.mu_q =
      wbx * mu_x + (Eigen::MatrixXd::Identity(g_q.size(), g_q.size()) -
                    model.qdyn.phi_q) *
                       (weights.w * model.lx.a_x);
  return model;
}

LoadingsP pc_loadings_at(double k_inf_q, const Eigen::VectorXd& g_q,
                         const Eigen::MatrixXd& sigma_p,
                         const PCWeights& weights,
                         std::span<const int> obs_maturities,
                         std::span<const int> eval_maturities,
                         double condition_cap) {
  check_maturities(eval_maturities);
  const Eigen::MatrixXd b_obs = compute_b_slopes(g_q, obs_maturities);
  const Eigen::MatrixXd wbx = weights.w * b_obs;
  const Eigen::MatrixXd wbx_inv = solve_wbx(wbx, condition_cap);
  const Eigen::MatrixXd sigma_x = wbx_inv * sigma_p;

  // union grid: intercepts are needed on both the observation grid (for the
  // rotation offset) and the evaluation grid
  std::vector<int> merged(obs_maturities.begin(), obs_maturities.end());
  merged.insert(merged.end(), eval_maturities.begin(), eval_maturities.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  const LoadingsX union_lx = loading_recursion(k_inf_q, g_q, sigma_x, merged);

  const auto row_of = [&](int n) {
    const auto it = std::lower_bound(merged.begin(), merged.end(), n);
    return static_cast<Eigen::Index>(it - merged.begin());
  };
  Eigen::VectorXd a_obs(static_cast<Eigen::Index>(obs_maturities.size()));
  for (std::size_t k = 0; k < obs_maturities.size(); ++k)
    a_obs[static_cast<Eigen::Index>(k)] = union_lx.a_x[row_of(obs_maturities[k])];
  const Eigen::VectorXd wa_obs = weights.w * a_obs;

  LoadingsP lp;
  const auto n_eval = static_cast<Eigen::Index>(eval_maturities.size());
  lp.a_p.resize(n_eval);
  lp.b_p.resize(n_eval, g_q.size());
  for (Eigen::Index k = 0; k < n_eval; ++k) {
    const Eigen::Index row = row_of(eval_maturities[static_cast<std::size_t>(k)]);
    lp.b_p.row(k) = union_lx.b_x.row(row) * wbx_inv;
    lp.a_p[k] = union_lx.a_x[row] - lp.b_p.row(k).dot(wa_obs);
  }
  return lp;
}

}  // namespace dtsm
