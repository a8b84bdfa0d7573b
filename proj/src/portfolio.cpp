#include "dtsm/portfolio.hpp"

#include <cmath>
#include <stdexcept>

#include "dtsm/math.hpp"
#include "dtsm/optim.hpp"

namespace dtsm {
namespace {

double power_utility(double wealth, double gamma) {
  if (wealth <= 0.0) return kNegInf;
  return std::pow(wealth, 1.0 - gamma) / (1.0 - gamma);
}

double clamp_gross(double rf, double rx) {
  const double riskless = std::exp(rf);
  return std::min(std::max(std::exp(rf + rx), riskless * kGrossReturnFloor),
                  riskless * kGrossReturnCeiling);
}

}  // namespace

WeightResult optimal_weight(const Eigen::VectorXd& weights,
                            const Eigen::VectorXd& rx_draws, double rf,
                            const AllocationScenario& scenario) {
  if (weights.size() != rx_draws.size() || weights.size() == 0)
    throw std::invalid_argument("optimal_weight: empty or misaligned sample");
  if (!(scenario.gamma > 1.0))
    throw std::invalid_argument("optimal_weight: gamma must exceed 1");
  if (!(scenario.lower < scenario.upper))
    throw std::invalid_argument("optimal_weight: bad bounds");
  const double wsum = pairwise_sum(weights);
  if (!(wsum > 0.0)) throw std::invalid_argument("optimal_weight: zero mass");

  const double riskless = std::exp(rf);
  Eigen::VectorXd gross(rx_draws.size());
  for (Eigen::Index j = 0; j < rx_draws.size(); ++j)
    gross[j] = clamp_gross(rf, rx_draws[j]);

  const auto objective = [&](double w) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < rx_draws.size(); ++j) {
      const double wealth = (1.0 - w) * riskless + w * gross[j];
      const double u = power_utility(wealth, scenario.gamma);
      if (u == kNegInf) return kNegInf;
      acc += weights[j] * u;
    }
    return acc / wsum;
  };

  // bracket with a uniform grid, then refine within the best cell pair
  constexpr int kGridPoints = 256;
  const double lo = scenario.lower, hi = scenario.upper;
  int best = 0;
  double best_val = kNegInf;
  for (int k = 0; k < kGridPoints; ++k) {
    const double w = lo + (hi - lo) * k / (kGridPoints - 1.0);
    const double v = objective(w);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  if (best_val == kNegInf)
    throw std::runtime_error("optimal_weight: no feasible weight keeps wealth positive");
  const double cell = (hi - lo) / (kGridPoints - 1.0);
  const double ref_lo = std::max(lo, lo + cell * (best - 1));
  const double ref_hi = std::min(hi, lo + cell * (best + 1));
  double w_star = golden_section_maximize(objective, ref_lo, ref_hi, 1e-6);

  // indifference: a flat objective resolves to the riskless portfolio
  const double at_zero = objective(std::min(std::max(0.0, lo), hi));
  if (std::abs(objective(w_star) - at_zero) <=
      1e-14 * std::max(1.0, std::abs(at_zero)))
    w_star = std::min(std::max(0.0, lo), hi);

  WeightResult res;
  res.weight = w_star;
  res.cap_binding =
      scenario.unbounded &&
      std::abs(w_star) > 0.999 * AllocationScenario::kWeightCap;
  return res;
}

double realized_utility(double weight, double rf, double realized_rx,
                        double gamma) {
  if (!(gamma > 1.0)) throw std::invalid_argument("realized_utility: gamma > 1");
  const double wealth =
      (1.0 - weight) * std::exp(rf) + weight * clamp_gross(rf, realized_rx);
  const double u = power_utility(wealth, gamma);
  if (u == kNegInf)
    throw std::runtime_error("realized_utility: non-positive wealth");
  return u;
}

double cer(const Eigen::VectorXd& model_utilities,
           const Eigen::VectorXd& benchmark_utilities, double gamma) {
  if (model_utilities.size() != benchmark_utilities.size() ||
      model_utilities.size() == 0)
    throw std::invalid_argument("cer: misaligned ledgers");
  const double num = pairwise_sum(model_utilities);
  const double den = pairwise_sum(benchmark_utilities);
  if (!(num < 0.0) || !(den < 0.0))
    throw std::invalid_argument("cer: utility sums must both be negative");
  return std::pow(num / den, 1.0 / (1.0 - gamma)) - 1.0;
}

}  // namespace dtsm
