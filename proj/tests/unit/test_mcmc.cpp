#include <doctest.h>

#include <cmath>

#include "dtsm/math.hpp"
#include "dtsm/mcmc.hpp"
#include "fixtures.hpp"

using namespace dtsm;

TEST_CASE("inverse-gamma draw: moments and the zero-residual floor") {
  Rng rng(5);
  ResidualStats stats;
  stats.alpha = 400.0;  // e.g. 100 rows, four projected dimensions
  stats.beta = 2e-6;
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double draw = gibbs_sigma_e2(stats, rng);
    sum += draw;
    sum_sq += draw * draw;
  }
  const double mean = sum / n;
  const double expected_mean = stats.beta / (stats.alpha - 2.0);
  const double sd = std::sqrt(sum_sq / n - mean * mean);
  CHECK(std::abs(mean - expected_mean) < 3.0 * sd / std::sqrt(double(n)));

  ResidualStats zero;
  zero.alpha = 40.0;
  zero.beta = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double draw = gibbs_sigma_e2(zero, rng);
    CHECK(draw > 0.0);
    CHECK(draw < 1e-12);  // floored rate keeps the draw near zero
  }
}

TEST_CASE("successive-conditional simulation keeps the stationary law") {
  // With data regenerated from sigma_e2 each round, the Gibbs draw must leave
  // the prior InvGamma(a0/2, b0/2) marginal invariant.
  Rng rng(9);
  const double a0 = 6.0, b0 = 2e-6;
  const int t_obs = 8, m_dim = 4;
  double s2 = b0 / a0;
  const int n = 60000;
  double mean_inv = 0.0;
  int below_median_count = 0;
  // median of Gamma(3, rate b0/2): use the exact relation P(1/s2 <= q) with
  // a Monte Carlo reference from the prior itself
  Rng prior_rng(10);
  std::vector<double> prior_draws(20000);
  for (auto& d : prior_draws) d = prior_rng.inverse_gamma(a0 / 2.0, b0 / 2.0);
  std::sort(prior_draws.begin(), prior_draws.end());
  const double prior_median = prior_draws[prior_draws.size() / 2];

  for (int it = 0; it < n; ++it) {
    double beta = b0;
    for (int k = 0; k < t_obs * m_dim; ++k) {
      const double e = std::sqrt(s2) * rng.normal();
      beta += e * e;
    }
    ResidualStats stats;
    stats.alpha = a0 + t_obs * m_dim;
    stats.beta = beta;
    s2 = gibbs_sigma_e2(stats, rng);
    mean_inv += 1.0 / s2;
    if (s2 <= prior_median) ++below_median_count;
  }
  mean_inv /= n;
  // E[1/s2] under InvGamma(a0/2, b0/2) is a0/b0
  CHECK(mean_inv == doctest::Approx(a0 / b0).epsilon(0.05));
  const double frac = static_cast<double>(below_median_count) / n;
  CHECK(std::abs(frac - 0.5) < 0.02);
}

TEST_CASE("near-degenerate proposals on a flat region accept almost surely") {
  const ModelSpec spec = fixtures::make_spec({false, true, false});
  const EstimationData data = fixtures::simulated_dataset(spec, 90, 33);
  const ThetaTransform transform(spec);
  const PriorSpec prior = PriorSpec::standard(transform, 90);
  const Eigen::VectorXd sigma_z = fixtures::true_sigma_z(spec);
  Theta theta = fixtures::true_theta(spec);

  const Eigen::VectorXd u = transform.to_unconstrained(theta);
  auto tiny = [&](const std::vector<int>& idx) {
    MvtProposal p;
    p.mu.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
      p.mu[static_cast<Eigen::Index>(i)] = u[idx[i]];
    p.scale_chol = 1e-10 * Eigen::MatrixXd::Identity(
                               static_cast<Eigen::Index>(idx.size()),
                               static_cast<Eigen::Index>(idx.size()));
    p.dof = 5.0;
    return p;
  };
  BlockProposals props;
  props.sigma_block = tiny(transform.sigma_block());
  props.q_block = tiny(transform.q_block());
  props.lambda_block = tiny(transform.lambda_block());

  // starting each sweep at the proposal mean makes the independence-sampler
  // density correction nonnegative, so near-identical candidates must be
  // accepted; a sign error in the correction would halve this rate
  Rng rng(4);
  int accepted = 0, proposed = 0;
  const Theta at_mean = theta;
  for (int sweep = 0; sweep < 50; ++sweep) {
    SweepDiagnostics diag;
    Theta fresh = at_mean;
    fresh = mcmc_sweep(fresh, data, sigma_z, prior, transform, 1.0, 90, props,
                       rng, &diag);
    accepted += diag.accept_sigma + diag.accept_q + diag.accept_lambda;
    proposed += 3;
  }
  CHECK(accepted >= proposed - 2);
}

TEST_CASE("restricted risk-price coordinate matches a quadrature oracle") {
  // yields-only model, all other coordinates pinned by near-degenerate
  // proposals; the free coordinate's conditional posterior is 1-D.
  const ModelSpec spec = fixtures::make_spec({false, false, false});
  const EstimationData data = fixtures::simulated_dataset(spec, 120, 55);
  const ThetaTransform transform(spec);
  const int t_idx = 120;
  const PriorSpec prior = PriorSpec::standard(transform, t_idx + 1);
  const Eigen::VectorXd sigma_z(0);
  Theta theta = fixtures::true_theta(spec);
  const Eigen::VectorXd u0 = transform.to_unconstrained(theta);

  // conditional log-posterior of lambda12 given everything else
  const int lam_idx = transform.lambda12_index();
  const auto cond_logpost = [&](double lam) {
    Eigen::VectorXd u = u0;
    u[lam_idx] = lam;
    const Theta th = transform.from_unconstrained(u);
    Theta with_s2 = th;
    with_s2.sigma_e2 = theta.sigma_e2;
    return log_posterior(with_s2, data, sigma_z, prior, transform, 1.0, t_idx);
  };

  // quadrature on a wide grid around the truth
  const int grid_n = 4001;
  const double lo = theta.lambda12() - 0.5, hi = theta.lambda12() + 0.5;
  Eigen::VectorXd logp(grid_n), lam(grid_n);
  for (int i = 0; i < grid_n; ++i) {
    lam[i] = lo + (hi - lo) * i / (grid_n - 1.0);
    logp[i] = cond_logpost(lam[i]);
  }
  const double shift = logp.maxCoeff();
  const Eigen::VectorXd density = (logp.array() - shift).exp();
  const double norm = density.sum();
  const double quad_mean = (density.cwiseProduct(lam)).sum() / norm;
  const double quad_sd = std::sqrt(
      (density.cwiseProduct((lam.array() - quad_mean).square().matrix())).sum() /
      norm);

  // sampler with pinned nuisance blocks and a healthy proposal on lambda12
  auto pin = [&](const std::vector<int>& idx) {
    MvtProposal p;
    p.mu.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
      p.mu[static_cast<Eigen::Index>(i)] = u0[idx[i]];
    p.scale_chol = 1e-12 * Eigen::MatrixXd::Identity(
                               static_cast<Eigen::Index>(idx.size()),
                               static_cast<Eigen::Index>(idx.size()));
    p.dof = 5.0;
    return p;
  };
  BlockProposals props;
  props.sigma_block = pin(transform.sigma_block());
  props.q_block = pin(transform.q_block());
  props.lambda_block.mu = Eigen::VectorXd::Constant(1, quad_mean);
  props.lambda_block.scale_chol =
      Eigen::MatrixXd::Identity(1, 1) * (2.0 * quad_sd);
  props.lambda_block.dof = 5.0;

  Rng rng(8);
  double sum_lam = 0.0;
  const int n_sweeps = 20000;
  for (int sweep = 0; sweep < n_sweeps; ++sweep) {
    theta = mcmc_sweep(theta, data, sigma_z, prior, transform, 1.0, t_idx,
                       props, rng);
    sum_lam += theta.lambda12();
  }
  const double mcmc_mean = sum_lam / n_sweeps;
  // 2% of the oracle value, floored by the chain's own Monte Carlo error
  const double tolerance = std::max(0.02 * std::abs(quad_mean),
                                    4.0 * quad_sd / std::sqrt(n_sweeps / 20.0));
  CHECK(std::abs(mcmc_mean - quad_mean) < tolerance);
}
