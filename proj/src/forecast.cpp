#include "dtsm/forecast.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "dtsm/math.hpp"
#include "dtsm/smc.hpp"

namespace dtsm {

double yield_at_maturity(const Eigen::RowVectorXd& yields,
                         std::span<const int> maturities, int n,
                         bool allow_interpolation) {
  const auto it = std::lower_bound(maturities.begin(), maturities.end(), n);
  if (it != maturities.end() && *it == n)
    return yields[static_cast<Eigen::Index>(it - maturities.begin())];
  if (!allow_interpolation)
    throw std::invalid_argument("yield_at_maturity: maturity " +
                                std::to_string(n) + " not on the grid");
  if (it == maturities.begin() || it == maturities.end())
    throw std::invalid_argument("yield_at_maturity: maturity " +
                                std::to_string(n) + " outside the grid");
  const auto hi = static_cast<Eigen::Index>(it - maturities.begin());
  const int n_hi = *it, n_lo = *(it - 1);
  const double frac = static_cast<double>(n - n_lo) / (n_hi - n_lo);
  return (1.0 - frac) * yields[hi - 1] + frac * yields[hi];
}

double observed_excess_return(const Eigen::MatrixXd& yields,
                              std::span<const int> maturities, int t, int n,
                              int h, bool allow_interpolation) {
  if (h < 1 || n < h) throw std::invalid_argument("observed_excess_return: need n >= h >= 1");
  if (n == h) return 0.0;  // funding and holding legs cancel identically
  if (t + h >= yields.rows())
    throw std::invalid_argument("observed_excess_return: future row missing");
  const double y_sell =
      yield_at_maturity(yields.row(t + h), maturities, n - h, allow_interpolation);
  const double y_buy = yield_at_maturity(yields.row(t), maturities, n, allow_interpolation);
  const double y_fund = yield_at_maturity(yields.row(t), maturities, h, allow_interpolation);
  return -(n - h) * y_sell + n * y_buy - h * y_fund;
}

double eh_benchmark(std::span<const double> realized_history) {
  if (realized_history.empty())
    throw std::invalid_argument("eh_benchmark: empty history");
  return pairwise_sum(realized_history) /
         static_cast<double>(realized_history.size());
}

PredictiveDraws predict_excess_returns(const std::vector<AtsmParticle>& particles,
                                       const Eigen::VectorXd& log_weights,
                                       const EstimationData& data,
                                       const Eigen::VectorXd& p_t,
                                       std::span<const int> eval_maturities,
                                       int horizon, std::uint64_t seed,
                                       int n_threads) {
  if (horizon < 1) throw std::invalid_argument("predict: horizon >= 1");
  for (int n : eval_maturities)
    if (n < horizon) throw std::invalid_argument("predict: maturity below horizon");
  const int n_particles = static_cast<int>(particles.size());
  const auto n_mats = static_cast<Eigen::Index>(eval_maturities.size());

  // loadings needed at {h} + {n-h} + {n}; zero-maturity legs never appear
  // because n == h contributes a hard zero
  std::vector<int> needed{horizon};
  for (int n : eval_maturities) {
    if (n == horizon) continue;
    needed.push_back(n - horizon);
    needed.push_back(n);
  }
  std::sort(needed.begin(), needed.end());
  needed.erase(std::unique(needed.begin(), needed.end()), needed.end());
  const auto slot_of = [&](int n) {
    return static_cast<Eigen::Index>(
        std::lower_bound(needed.begin(), needed.end(), n) - needed.begin());
  };

  PredictiveDraws out;
  out.maturities.assign(eval_maturities.begin(), eval_maturities.end());
  out.horizon = horizon;
  out.rx_draws.resize(n_particles, n_mats);
  Eigen::VectorXd log_w = log_weights;

  std::atomic<int> failures{0};
  parallel_for(n_particles, n_threads, [&](int i) {
    const auto& particle = particles[static_cast<std::size_t>(i)];
    Rng rng(stream_seed(seed, 0x66637374ULL, static_cast<std::uint64_t>(i)));
    try {
      const LoadingsP lp =
          pc_loadings_at(particle.theta.k_inf_q, particle.theta.g_q,
                         particle.theta.sigma_p, data.weights, data.maturities,
                         needed);
      const ModelParts& parts = *particle.parts;
      Eigen::VectorXd alpha = draw_latent_state(particle.state, rng);
      Eigen::VectorXd p_path = p_t;
      for (int k = 0; k < horizon; ++k) {
        alpha = step_latent(alpha, parts.lat, rng);
        p_path = draw_factors(p_path, alpha, parts.dyn, parts.lat, rng);
      }
      for (Eigen::Index c = 0; c < n_mats; ++c) {
        const int n = out.maturities[static_cast<std::size_t>(c)];
        if (n == horizon) {
          out.rx_draws(i, c) = 0.0;
          continue;
        }
        const Eigen::Index i_sell = slot_of(n - horizon);
        const Eigen::Index i_buy = slot_of(n);
        const Eigen::Index i_fund = slot_of(horizon);
        const double y_sell = lp.a_p[i_sell] + lp.b_p.row(i_sell).dot(p_path);
        const double y_buy = lp.a_p[i_buy] + lp.b_p.row(i_buy).dot(p_t);
        const double y_fund = lp.a_p[i_fund] + lp.b_p.row(i_fund).dot(p_t);
        out.rx_draws(i, c) =
            -(n - horizon) * y_sell + n * y_buy - horizon * y_fund;
      }
    } catch (const std::exception&) {
      log_w[i] = kNegInf;
      out.rx_draws.row(i).setZero();
      failures.fetch_add(1);
    }
  });
  if (failures.load() == n_particles)
    throw std::runtime_error("predict_excess_returns: every particle failed");

  out.weights = normalized_weights(log_w);
  out.point = out.rx_draws.transpose() * out.weights;
  return out;
}

ExcessReturnSample predict_excess_return(const std::vector<AtsmParticle>& particles,
                                         const Eigen::VectorXd& log_weights,
                                         const EstimationData& data,
                                         const Eigen::VectorXd& p_t,
                                         int maturity, int horizon,
                                         std::uint64_t seed) {
  const int mats[] = {maturity};
  const PredictiveDraws draws = predict_excess_returns(
      particles, log_weights, data, p_t, mats, horizon, seed, 0);
  ExcessReturnSample sample;
  sample.maturity = maturity;
  sample.horizon = horizon;
  sample.weights = draws.weights;
  sample.draws = draws.rx_draws.col(0);
  sample.point = draws.point[0];
  return sample;
}

double r2_os(const Eigen::VectorXd& realized, const Eigen::VectorXd& model,
             const Eigen::VectorXd& benchmark) {
  if (realized.size() != model.size() || realized.size() != benchmark.size() ||
      realized.size() == 0)
    throw std::invalid_argument("r2_os: misaligned series");
  const double sse_model = (realized - model).squaredNorm();
  const double sse_bench = (realized - benchmark).squaredNorm();
  if (!(sse_bench > 0.0))
    throw std::invalid_argument("r2_os: benchmark has zero squared error");
  return 1.0 - sse_model / sse_bench;
}

Eigen::VectorXd cw_adjusted_differential(const Eigen::VectorXd& realized,
                                         const Eigen::VectorXd& model,
                                         const Eigen::VectorXd& benchmark) {
  if (realized.size() != model.size() || realized.size() != benchmark.size())
    throw std::invalid_argument("cw_adjusted_differential: misaligned series");
  const Eigen::ArrayXd e_bench = (realized - benchmark).array();
  const Eigen::ArrayXd e_model = (realized - model).array();
  const Eigen::ArrayXd spread = (benchmark - model).array();
  return (e_bench.square() - e_model.square() + spread.square()).matrix();
}

double newey_west_lrv(const Eigen::VectorXd& series, int lags) {
  const Eigen::Index t_n = series.size();
  if (t_n < 2) throw std::invalid_argument("newey_west_lrv: series too short");
  if (lags >= t_n) lags = static_cast<int>(t_n) - 1;
  const double mean = series.mean();
  const Eigen::VectorXd centered = series.array() - mean;
  double lrv = centered.squaredNorm() / t_n;
  for (int l = 1; l <= lags; ++l) {
    double gamma_l = 0.0;
    for (Eigen::Index t = l; t < t_n; ++t)
      gamma_l += centered[t] * centered[t - l];
    gamma_l /= t_n;
    lrv += 2.0 * (1.0 - static_cast<double>(l) / (lags + 1.0)) * gamma_l;
  }
  return lrv;
}

DmResult dm_cw_test(const Eigen::VectorXd& differential, int horizon) {
  if (differential.size() < 10)
    throw std::invalid_argument("dm_cw_test: need at least 10 observations");
  const double t_n = static_cast<double>(differential.size());
  const double mean = differential.mean();
  const double lrv = newey_west_lrv(differential, std::max(horizon, 0));
  DmResult res;
  if (lrv <= 0.0) {
    if (mean == 0.0) return res;  // identical forecasts: statistic 0, p 0.5
    throw std::invalid_argument("dm_cw_test: zero long-run variance");
  }
  res.statistic = mean / std::sqrt(lrv / t_n);
  res.p_value = 0.5 * std::erfc(res.statistic / std::sqrt(2.0));
  return res;
}

}  // namespace dtsm
