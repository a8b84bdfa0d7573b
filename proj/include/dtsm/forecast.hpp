#pragma once

#include <span>
#include <vector>
#include <Eigen/Dense>

#include "dtsm/atsm_smc.hpp"
#include "dtsm/posterior.hpp"

namespace dtsm {

// Linear interpolation of a yield curve row in maturity. Exact grid hits do
// not interpolate. Throws when interpolation is disabled or out of range.
double yield_at_maturity(const Eigen::RowVectorXd& yields,
                         std::span<const int> maturities, int n,
                         bool allow_interpolation);

// Observed log excess return of the n-month bond over an h-month holding
// period starting at row t: -(n-h) y_{t+h}^{n-h} + n y_t^n - h y_t^h,
// all in per-month decimal units.
double observed_excess_return(const Eigen::MatrixXd& yields,
                              std::span<const int> maturities, int t, int n,
                              int h, bool allow_interpolation = false);

// Expanding-window mean of completed holding-period returns; the benchmark
// forecast made at time t for horizon h uses entries 1..t-h of the series
// rx[j] = rx_{j, j+h}.
double eh_benchmark(std::span<const double> realized_history);

// Weighted particle sample of predicted excess returns at one horizon.
struct ExcessReturnSample {
  int maturity = 0;
  int horizon = 0;
  Eigen::VectorXd weights;  // normalised
  Eigen::VectorXd draws;
  double point = 0.0;
};

// Batched draws across maturities sharing one latent trajectory per particle.
struct PredictiveDraws {
  std::vector<int> maturities;
  int horizon = 0;
  Eigen::VectorXd weights;   // normalised, length N
  Eigen::MatrixXd rx_draws;  // N x maturities
  Eigen::VectorXd point;     // weighted column means
};

// Per particle: rebuild loadings at {h, n-h, n} for every requested maturity,
// draw the factor path h steps ahead (one trajectory reused across
// maturities), and evaluate the model excess return. Deterministic given the
// seed; particle i uses an independent stream.
PredictiveDraws predict_excess_returns(const std::vector<AtsmParticle>& particles,
                                       const Eigen::VectorXd& log_weights,
                                       const EstimationData& data,
                                       const Eigen::VectorXd& p_t,
                                       std::span<const int> eval_maturities,
                                       int horizon, std::uint64_t seed,
                                       int n_threads = 0);

ExcessReturnSample predict_excess_return(const std::vector<AtsmParticle>& particles,
                                         const Eigen::VectorXd& log_weights,
                                         const EstimationData& data,
                                         const Eigen::VectorXd& p_t,
                                         int maturity, int horizon,
                                         std::uint64_t seed);

// Out-of-sample R^2 of the model against a benchmark over aligned series.
double r2_os(const Eigen::VectorXd& realized, const Eigen::VectorXd& model,
             const Eigen::VectorXd& benchmark);

// Adjusted loss differential for nested forecast comparison: positive values
// favour the model over the benchmark.
Eigen::VectorXd cw_adjusted_differential(const Eigen::VectorXd& realized,
                                         const Eigen::VectorXd& model,
                                         const Eigen::VectorXd& benchmark);

// Bartlett-kernel long-run variance of a series' mean.
double newey_west_lrv(const Eigen::VectorXd& series, int lags);

struct DmResult {
  double statistic = 0.0;
  double p_value = 0.5;  // one-sided, small favours the model
};

// One-sided test of mean(differential) > 0 with horizon-lag long-run variance.
// Reported as an index rather than a formal test.
DmResult dm_cw_test(const Eigen::VectorXd& differential, int horizon);

}  // namespace dtsm
