#pragma once

#include <optional>
#include <span>
#include <vector>
#include <Eigen/Dense>

#include "dtsm/forecast.hpp"

namespace dtsm {

// OLS with intercept, adjusted R^2 and Bartlett-kernel (Newey-West)
// t-statistics. coef[0] is the intercept.
struct RegressionResult {
  Eigen::VectorXd coef;
  Eigen::VectorXd nw_se;
  Eigen::VectorXd nw_tstat;
  double r2_adj = 0.0;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
};

RegressionResult ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                     int nw_lags);

// Per latent column: fitted (spanned) and residual (hidden) parts of the
// regression of the latent posterior means on the PC factors.
struct HiddenComponent {
  Eigen::MatrixXd spanned;
  Eigen::MatrixXd hidden;
  std::vector<RegressionResult> regressions;
};

HiddenComponent hidden_component(const Eigen::MatrixXd& latent_means,
                                 const Eigen::MatrixXd& factors);

// Explanatory-power gain from appending one latent column to PC-only
// regressions of realised excess returns, per (horizon, maturity) cell.
struct DeltaR2Cell {
  int horizon = 0;
  int maturity = 0;
  double r2_base = 0.0;  // per cent
  double r2_augmented = 0.0;
  double delta = 0.0;
  double p_value = 0.5;
};

std::vector<DeltaR2Cell> delta_r2_table(
    const Eigen::MatrixXd& yields, std::span<const int> grid_maturities,
    const Eigen::MatrixXd& factors,
    const std::optional<Eigen::VectorXd>& latent_series,
    std::span<const int> horizons, std::span<const int> eval_maturities,
    bool allow_interpolation = false);

}  // namespace dtsm
