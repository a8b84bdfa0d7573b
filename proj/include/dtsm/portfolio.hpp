#pragma once

#include <Eigen/Dense>

namespace dtsm {

// Allocation regime: weight bounds and risk aversion. The unbounded regime
// still caps |w| internally so expected utility stays finite; a binding cap
// is reported.
struct AllocationScenario {
  double lower = -1.0;
  double upper = 2.0;
  double gamma = 5.0;
  bool unbounded = false;

  static AllocationScenario bounded(double lo, double hi, double gamma = 5.0) {
    return {lo, hi, gamma, false};
  }
  static AllocationScenario unrestricted(double gamma = 5.0) {
    return {-kWeightCap, kWeightCap, gamma, true};
  }

  static constexpr double kWeightCap = 1e3;
};

// Gross risky return clamp keeping wealth and utility finite in the
// unrestricted regime.
inline constexpr double kGrossReturnFloor = 1e-4;
inline constexpr double kGrossReturnCeiling = 1e4;

struct WeightResult {
  double weight = 0.0;
  bool cap_binding = false;
};

// argmax over w of sum_j w_j * U((1-w) e^rf + w e^{rf + rx_j}) with power
// utility; bracketing grid followed by golden-section refinement. Ties
// resolve to w = 0.
WeightResult optimal_weight(const Eigen::VectorXd& weights,
                            const Eigen::VectorXd& rx_draws, double rf,
                            const AllocationScenario& scenario);

// Realised power utility of the chosen weight at the realised excess return.
double realized_utility(double weight, double rf, double realized_rx,
                        double gamma);

// Certainty-equivalent return per holding period (not annualised):
// (sum U_model / sum U_bench)^(1/(1-gamma)) - 1.
double cer(const Eigen::VectorXd& model_utilities,
           const Eigen::VectorXd& benchmark_utilities, double gamma);

}  // namespace dtsm
