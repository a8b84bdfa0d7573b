#include "dtsm/smc.hpp"

namespace dtsm {

std::vector<int> multinomial_ancestors(const Eigen::VectorXd& weights, int n,
                                       Rng& rng) {
  const Eigen::Index m = weights.size();
  Eigen::VectorXd cdf(m);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    acc += weights[i];
    cdf[i] = acc;
  }
  if (!(acc > 0.0))
    throw std::invalid_argument("multinomial_ancestors: zero total weight");
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform() * acc;
    const double* pos = std::lower_bound(cdf.data(), cdf.data() + m, u);
    out[static_cast<std::size_t>(k)] =
        static_cast<int>(std::min<Eigen::Index>(pos - cdf.data(), m - 1));
  }
  return out;
}

std::vector<int> systematic_ancestors(const Eigen::VectorXd& weights, int n,
                                      Rng& rng) {
  const Eigen::Index m = weights.size();
  const double total = pairwise_sum(weights);
  if (!(total > 0.0))
    throw std::invalid_argument("systematic_ancestors: zero total weight");
  std::vector<int> out(static_cast<std::size_t>(n));
  const double step = total / n;
  double u = rng.uniform() * step;
  double acc = weights[0];
  Eigen::Index i = 0;
  for (int k = 0; k < n; ++k) {
    while (u > acc && i + 1 < m) acc += weights[++i];
    out[static_cast<std::size_t>(k)] = static_cast<int>(i);
    u += step;
  }
  return out;
}

}  // namespace dtsm
