#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>
#include <Eigen/Dense>

#include "dtsm/rng.hpp"

namespace dtsm {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Pairwise summation: result independent of worker partitioning, which keeps
// parallel reductions deterministic.
inline double pairwise_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

inline double pairwise_sum(const Eigen::VectorXd& xs) {
  return pairwise_sum(std::span<const double>(xs.data(), xs.size()));
}

inline double log_sum_exp(const Eigen::VectorXd& logx) {
  const double m = logx.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf (or a nan propagates)
  Eigen::VectorXd shifted = (logx.array() - m).exp();
  return m + std::log(pairwise_sum(shifted));
}

// ESS of log-weights: (sum w)^2 / sum w^2, computed with max-shift.
inline double ess_from_log_weights(const Eigen::VectorXd& logw) {
  const double m = logw.maxCoeff();
  if (!std::isfinite(m)) throw std::runtime_error("ess: all weights are zero");
  Eigen::VectorXd w = (logw.array() - m).exp();
  const double s1 = pairwise_sum(w);
  Eigen::VectorXd w2 = w.array().square();
  const double s2 = pairwise_sum(w2);
  return s1 * s1 / s2;
}

// Normalised weights from log-weights.
inline Eigen::VectorXd normalized_weights(const Eigen::VectorXd& logw) {
  const double m = logw.maxCoeff();
  Eigen::VectorXd w = (logw.array() - m).exp();
  const double s = pairwise_sum(w);
  if (!(s > 0.0)) throw std::runtime_error("weights: zero total mass");
  return w / s;
}

inline double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

// Log-density of N(mean, cov) evaluated at x; cov must be SPD.
inline double log_mvnormal_pdf(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& cov) {
  const Eigen::Index d = x.size();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("log_mvnormal_pdf: covariance not positive definite");
  const Eigen::VectorXd z = llt.matrixL().solve(x - mean);
  const double logdet =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (d * kLog2Pi + logdet + z.squaredNorm());
}

// Multivariate t with location mu, scale matrix S (SPD) and dof nu.
struct MvtProposal {
  Eigen::VectorXd mu;
  Eigen::MatrixXd scale_chol;  // lower Cholesky of S
  double dof = 5.0;

  Eigen::Index dim() const { return mu.size(); }

  double log_pdf(const Eigen::VectorXd& x) const {
    const double d = static_cast<double>(mu.size());
    const Eigen::VectorXd z =
        scale_chol.triangularView<Eigen::Lower>().solve(x - mu);
    const double logdet = scale_chol.diagonal().array().log().sum();
    return std::lgamma(0.5 * (dof + d)) - std::lgamma(0.5 * dof) -
           0.5 * d * std::log(dof * M_PI) - logdet -
           0.5 * (dof + d) * std::log1p(z.squaredNorm() / dof);
  }

  Eigen::VectorXd sample(Rng& rng) const {
    const Eigen::VectorXd z = rng.normal_vector(mu.size());
    const double u = rng.chi_squared(dof);
    return mu + scale_chol * z * std::sqrt(dof / u);
  }
};

// Weighted mean and covariance of row-stacked samples. Weights need not be
// normalised. Covariance uses the probability-weighted (biased) form.
inline void weighted_moments(const Eigen::MatrixXd& rows,
                             const Eigen::VectorXd& weights,
                             Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
  const double wsum = pairwise_sum(weights);
  if (!(wsum > 0.0)) throw std::runtime_error("weighted_moments: zero mass");
  const Eigen::VectorXd wn = weights / wsum;
  mean = rows.transpose() * wn;
  Eigen::MatrixXd centered = rows.rowwise() - mean.transpose();
  cov = centered.transpose() * wn.asDiagonal() * centered;
  cov = 0.5 * (cov + cov.transpose());
}

// Weighted quantile by sorting; q in [0,1].
inline double weighted_quantile(const Eigen::VectorXd& values,
                                const Eigen::VectorXd& weights, double q) {
  const Eigen::Index n = values.size();
  std::vector<Eigen::Index> idx(n);
  for (Eigen::Index i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
  const double total = pairwise_sum(weights);
  double acc = 0.0;
  for (Eigen::Index k : idx) {
    acc += weights[k];
    if (acc >= q * total) return values[k];
  }
  return values[idx.back()];
}

// Lower Cholesky with a descriptive failure.
inline Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": matrix not positive definite");
  return llt.matrixL();
}

}  // namespace dtsm
