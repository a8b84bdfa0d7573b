#pragma once

#include <Eigen/Dense>

#include "dtsm/types.hpp"

namespace dtsm {

struct PcaResult {
  PCWeights weights;
  Eigen::VectorXd eigenvalues;         // all J, descending
  Eigen::VectorXd explained_variance;  // top-R shares
};

// Top-R eigenvectors of the sample covariance of the training yields
// (rows = time). Each loading row is sign-normalised to a positive sum.
PcaResult pca_weights(const Eigen::MatrixXd& training_yields, int n_components);

// Deterministic orthonormal weighting rows built from polynomial shapes
// (level, slope, curvature, ...); used by the simulation harness.
PCWeights polynomial_weights(int n_components, int n_maturities);

}  // namespace dtsm
