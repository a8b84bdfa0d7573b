#include "dtsm/regression.hpp"

#include <cmath>
#include <stdexcept>

#include "dtsm/math.hpp"

namespace dtsm {

RegressionResult ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                     int nw_lags) {
  const Eigen::Index t_n = y.size();
  if (x.rows() != t_n) throw std::invalid_argument("ols: row mismatch");
  const Eigen::Index k = x.cols() + 1;
  if (t_n <= k) throw std::invalid_argument("ols: too few observations");

  Eigen::MatrixXd design(t_n, k);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < k)
    throw std::invalid_argument("ols: collinear regressors (rank deficient)");

  RegressionResult res;
  res.coef = qr.solve(y);
  res.fitted = design * res.coef;
  res.residuals = y - res.fitted;

  const double sse = res.residuals.squaredNorm();
  const double sst = (y.array() - y.mean()).matrix().squaredNorm();
  res.r2_adj = 1.0 - (sse / static_cast<double>(t_n - k)) /
                         (sst / static_cast<double>(t_n - 1));

  // Bartlett-kernel sandwich; zero lags gives the heteroskedasticity-only form
  const Eigen::MatrixXd bread =
      (design.transpose() * design).ldlt().solve(
          Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  const Eigen::MatrixXd g =
      design.array().colwise() * res.residuals.array();  // t x k score rows
  meat = g.transpose() * g;
  const int lags = std::min<int>(nw_lags, static_cast<int>(t_n) - 1);
  for (int l = 1; l <= lags; ++l) {
    const double w = 1.0 - static_cast<double>(l) / (lags + 1.0);
    const Eigen::MatrixXd cross =
        g.bottomRows(t_n - l).transpose() * g.topRows(t_n - l);
    meat += w * (cross + cross.transpose());
  }
  const Eigen::MatrixXd cov = bread * meat * bread;
  res.nw_se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  res.nw_tstat.resize(k);
  for (Eigen::Index i = 0; i < k; ++i)
    res.nw_tstat[i] = res.nw_se[i] > 0.0 ? res.coef[i] / res.nw_se[i] : 0.0;
  return res;
}

HiddenComponent hidden_component(const Eigen::MatrixXd& latent_means,
                                 const Eigen::MatrixXd& factors) {
  if (latent_means.rows() != factors.rows())
    throw std::invalid_argument("hidden_component: row mismatch");
  HiddenComponent out;
  out.spanned.resize(latent_means.rows(), latent_means.cols());
  out.hidden.resize(latent_means.rows(), latent_means.cols());
  for (Eigen::Index j = 0; j < latent_means.cols(); ++j) {
    RegressionResult reg = ols(latent_means.col(j), factors, 0);
    out.spanned.col(j) = reg.fitted;
    out.hidden.col(j) = reg.residuals;
    out.regressions.push_back(std::move(reg));
  }
  return out;
}

std::vector<DeltaR2Cell> delta_r2_table(
    const Eigen::MatrixXd& yields, std::span<const int> grid_maturities,
    const Eigen::MatrixXd& factors,
    const std::optional<Eigen::VectorXd>& latent_series,
    std::span<const int> horizons, std::span<const int> eval_maturities,
    bool allow_interpolation) {
  if (factors.rows() != yields.rows())
    throw std::invalid_argument("delta_r2_table: row mismatch");
  std::vector<DeltaR2Cell> cells;
  for (const int h : horizons) {
    const Eigen::Index t_n = yields.rows() - h;
    if (t_n < factors.cols() + 4) continue;
    for (const int n : eval_maturities) {
      Eigen::VectorXd rx(t_n);
      for (Eigen::Index t = 0; t < t_n; ++t)
        rx[t] = observed_excess_return(yields, grid_maturities,
                                       static_cast<int>(t), n, h,
                                       allow_interpolation);
      DeltaR2Cell cell;
      cell.horizon = h;
      cell.maturity = n;
      const Eigen::MatrixXd x_base = factors.topRows(t_n);
      const RegressionResult base = ols(rx, x_base, 0);
      cell.r2_base = 100.0 * base.r2_adj;
      if (latent_series) {
        Eigen::MatrixXd x_aug(t_n, factors.cols() + 1);
        x_aug.leftCols(factors.cols()) = x_base;
        x_aug.rightCols(1) = latent_series->head(t_n);
        try {
          const RegressionResult aug = ols(rx, x_aug, 0);
          cell.r2_augmented = 100.0 * aug.r2_adj;
          cell.delta = cell.r2_augmented - cell.r2_base;
          const Eigen::VectorXd diff =
              cw_adjusted_differential(rx, aug.fitted, base.fitted);
          try {
            cell.p_value = dm_cw_test(diff, h).p_value;
          } catch (const std::invalid_argument&) {
            cell.p_value = 0.5;
          }
        } catch (const std::invalid_argument&) {
          // redundant latent column: no fit gain, one extra penalty slot
          const double sse = base.residuals.squaredNorm();
          const double sst = (rx.array() - rx.mean()).matrix().squaredNorm();
          const double k_aug = static_cast<double>(x_aug.cols()) + 1.0;
          cell.r2_augmented =
              100.0 * (1.0 - (sse / (t_n - k_aug)) / (sst / (t_n - 1.0)));
          cell.delta = cell.r2_augmented - cell.r2_base;
          cell.p_value = 0.5;
        }
      } else {
        cell.r2_augmented = cell.r2_base;
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

}  // namespace dtsm
