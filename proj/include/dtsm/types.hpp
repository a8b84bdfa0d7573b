#pragma once

#include <stdexcept>
#include <string>
#include <vector>
#include <Eigen/Dense>

namespace dtsm {

enum class RiskPriceRestriction {
  kMaxFlex,      // all entries of lambda_0, lambda_1 free (M0)
  kLambda12Only  // lambda_0 = 0, lambda_1 zero except entry (1,2) (M1)
};

// Model family selector: R observed PC factors, a mask picking which factor
// equations carry an unspanned latent term, and the risk-price restriction.
struct ModelSpec {
  int n_factors = 3;
  std::vector<bool> latent_mask;  // length n_factors; all-false = yields-only
  std::vector<int> maturities;    // months, strictly increasing
  RiskPriceRestriction restriction = RiskPriceRestriction::kLambda12Only;

  int latent_dim() const {
    int m = 0;
    for (bool b : latent_mask) m += b ? 1 : 0;
    return m;
  }

  std::string name() const {
    if (latent_dim() == 0)
      return restriction == RiskPriceRestriction::kMaxFlex ? "M0" : "M1";
    std::string s = "LF";
    for (bool b : latent_mask) s += b ? '1' : '0';
    return s;
  }

  void validate() const {
    if (n_factors < 1) throw std::invalid_argument("ModelSpec: n_factors >= 1");
    if (static_cast<int>(latent_mask.size()) != n_factors)
      throw std::invalid_argument("ModelSpec: latent_mask length != n_factors");
    if (maturities.empty())
      throw std::invalid_argument("ModelSpec: maturities empty");
    for (std::size_t j = 0; j + 1 < maturities.size(); ++j)
      if (maturities[j] >= maturities[j + 1])
        throw std::invalid_argument("ModelSpec: maturities not strictly increasing");
    if (maturities.front() < 1 || maturities.back() > 1200)
      throw std::invalid_argument("ModelSpec: maturities out of [1, 1200] months");
  }
};

// Risk-neutral pricing parameters in the canonical normalisation: short rate
// is the sum of the states, Q-drift (k_inf, 0, ..., 0), Q-feedback diagonal
// with real distinct eigenvalues g.
struct QParams {
  double k_inf_q = 0.0;      // monthly decimal units
  Eigen::VectorXd g_q;       // strictly decreasing eigenvalues
  Eigen::MatrixXd sigma;     // lower-triangular innovation Cholesky factor
  double sigma_e2 = 0.0;     // measurement-error variance

  void validate() const {
    const Eigen::Index r = g_q.size();
    if (r < 1) throw std::invalid_argument("QParams: empty g_q");
    for (Eigen::Index i = 0; i + 1 < r; ++i) {
      if (!(g_q[i] > g_q[i + 1]))
        throw std::invalid_argument("QParams: eigenvalues must be strictly decreasing");
    }
    if (sigma.rows() != r || sigma.cols() != r)
      throw std::invalid_argument("QParams: sigma dimension mismatch");
    for (Eigen::Index i = 0; i < r; ++i) {
      if (!(sigma(i, i) > 0.0))
        throw std::invalid_argument("QParams: sigma diagonal must be positive");
      for (Eigen::Index j = i + 1; j < r; ++j)
        if (sigma(i, j) != 0.0)
          throw std::invalid_argument("QParams: sigma must be lower triangular");
    }
    if (sigma_e2 < 0.0) throw std::invalid_argument("QParams: sigma_e2 < 0");
  }
};

// PC weighting matrix W (rows = components, columns = maturities) and an
// orthonormal basis of its null space.
struct PCWeights {
  Eigen::MatrixXd w;       // R x J
  Eigen::MatrixXd w_perp;  // (J-R) x J, orthonormal rows, w * w_perp' = 0
};

}  // namespace dtsm
