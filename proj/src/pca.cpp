#include "dtsm/pca.hpp"

#include <stdexcept>

#include "dtsm/pricing.hpp"

namespace dtsm {

PcaResult pca_weights(const Eigen::MatrixXd& training_yields, int n_components) {
  const Eigen::Index t_n = training_yields.rows();
  const Eigen::Index j = training_yields.cols();
  if (t_n < n_components + 1)
    throw std::invalid_argument("pca_weights: training window too short");
  if (n_components < 1 || n_components >= j)
    throw std::invalid_argument("pca_weights: need 1 <= R < J");

  const Eigen::RowVectorXd mean = training_yields.colwise().mean();
  const Eigen::MatrixXd centered = training_yields.rowwise() - mean;
  Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(t_n - 1);
  cov = 0.5 * (cov + cov.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("pca_weights: eigendecomposition failed");
  if (es.eigenvalues()[j - 1] <= 0.0)
    throw std::runtime_error("pca_weights: degenerate yield covariance");

  PcaResult out;
  out.eigenvalues = es.eigenvalues().reverse();
  out.weights.w.resize(n_components, j);
  for (int k = 0; k < n_components; ++k) {
    Eigen::VectorXd v = es.eigenvectors().col(j - 1 - k);
    if (v.sum() < 0.0) v = -v;
    out.weights.w.row(k) = v.transpose();
  }
  out.weights.w_perp = null_space_basis(out.weights.w);
  const double total = out.eigenvalues.sum();
  out.explained_variance = out.eigenvalues.head(n_components) / total;
  return out;
}

PCWeights polynomial_weights(int n_components, int n_maturities) {
  Eigen::MatrixXd basis(n_maturities, n_components);
  for (int j = 0; j < n_maturities; ++j) {
    const double x =
        n_maturities == 1 ? 0.0 : -1.0 + 2.0 * j / (n_maturities - 1.0);
    double p = 1.0;
    for (int k = 0; k < n_components; ++k) {
      basis(j, k) = p;
      p *= x;
    }
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  Eigen::MatrixXd q = qr.householderQ() *
                      Eigen::MatrixXd::Identity(n_maturities, n_components);
  PCWeights weights;
  weights.w.resize(n_components, n_maturities);
  for (int k = 0; k < n_components; ++k) {
    Eigen::VectorXd v = q.col(k);
    if (v.sum() < 0.0) v = -v;
    if (k > 0 && std::abs(v.sum()) < 1e-12 && v[n_maturities - 1] < 0.0) v = -v;
    weights.w.row(k) = v.transpose();
  }
  weights.w_perp = null_space_basis(weights.w);
  return weights;
}

}  // namespace dtsm
