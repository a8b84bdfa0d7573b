#include "dtsm/tuning.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "dtsm/kalman.hpp"
#include "dtsm/optim.hpp"
#include "dtsm/rng.hpp"

namespace dtsm {

Eigen::VectorXd sigma_z_parameterisation(double c, const Eigen::VectorXd& phi_z,
                                         const Eigen::VectorXd& residual_var) {
  return c * ((1.0 - phi_z.array().square()) * residual_var.array()).sqrt();
}

TuningRecord tune_sigma_z(const EstimationData& data, int t_idx,
                          const TuneOptions& opts) {
  data.validate();
  const int m = data.spec.latent_dim();
  if (m == 0)
    throw std::invalid_argument("tune_sigma_z: model has no latent factors");

  // step 1: restricted yields-only fit on the training window
  EstimationData yields_only = data;
  yields_only.spec.latent_mask.assign(data.spec.latent_mask.size(), false);
  yields_only.spec.restriction = RiskPriceRestriction::kLambda12Only;
  const MleResult mle =
      mle_fit(yields_only, Eigen::VectorXd::Zero(0), t_idx, opts.mle);

  // step 2: drift residuals at the fitted dynamics; variance at the masked slots
  const ModelParts parts =
      assemble_model(mle.theta, Eigen::VectorXd::Zero(0), yields_only);
  Eigen::MatrixXd s_hat(t_idx, data.spec.n_factors);
  for (int t = 1; t <= t_idx; ++t)
    s_hat.row(t - 1) = data.factors.row(t).transpose() - parts.dyn.mu_p -
                       parts.dyn.phi_p * data.factors.row(t - 1).transpose();
  const Eigen::RowVectorXd means = s_hat.colwise().mean();
  Eigen::VectorXd var_all =
      ((s_hat.rowwise() - means).colwise().squaredNorm() /
       static_cast<double>(t_idx - 1))
          .transpose();
  Eigen::VectorXd masked_var(m);
  int slot = 0;
  for (int r = 0; r < data.spec.n_factors; ++r)
    if (data.spec.latent_mask[static_cast<std::size_t>(r)])
      masked_var[slot++] = var_all[r];

  // step 3: factor-dynamics likelihood over (phi_z, c); coordinates are
  // (logit phi_z, log c)
  const ObjectiveFn objective = [&](const Eigen::VectorXd& x) -> double {
    Eigen::VectorXd phi(m);
    for (int i = 0; i < m; ++i) phi[i] = inv_logit_pm1(x[i]);
    const double c = std::exp(x[m]);
    try {
      LatentSpec lat = LatentSpec::from_mask(
          data.spec.latent_mask, phi,
          sigma_z_parameterisation(c, phi, masked_var));
      const auto ll =
          kalman_loglik(data.factors.topRows(t_idx + 1), parts.dyn, lat);
      return -ll.loglik;
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  Rng rng(stream_seed(opts.seed, 0x545a));
  OptimResult best;
  for (int attempt = 0; attempt < std::max(1, opts.restarts); ++attempt) {
    Eigen::VectorXd x0(m + 1);
    if (attempt == 0) {
      x0.head(m).setConstant(logit_pm1(0.5));
      x0[m] = std::log(0.5);
    } else {
      for (int i = 0; i < m; ++i) x0[i] = logit_pm1(rng.uniform(-0.9, 0.9));
      x0[m] = rng.uniform(std::log(0.05), std::log(2.0));
    }
    OptimResult res = nelder_mead_minimize(objective, x0, 0.8);
    if (res.value < best.value) best = res;
  }
  if (!std::isfinite(best.value))
    throw std::runtime_error("tune_sigma_z: likelihood search failed (best incumbent kept none)");

  TuningRecord record;
  record.phi_z.resize(m);
  for (int i = 0; i < m; ++i) record.phi_z[i] = inv_logit_pm1(best.x[i]);
  record.c = std::exp(best.x[m]);
  record.sigma_z =
      sigma_z_parameterisation(record.c, record.phi_z, masked_var);
  record.loglik = -best.value;
  record.yields_only_mle = mle.theta;
  record.spec_latent_dim = m;
  return record;
}

void save_tuning(const std::string& path, const TuningRecord& record) {
  nlohmann::ordered_json j;
  j["sigma_z"] = std::vector<double>(record.sigma_z.begin(), record.sigma_z.end());
  j["phi_z_init"] = std::vector<double>(record.phi_z.begin(), record.phi_z.end());
  j["c"] = record.c;
  j["loglik"] = record.loglik;
  nlohmann::ordered_json mle_j;
  mle_j["sigma_e2"] = record.yields_only_mle.sigma_e2;
  mle_j["k_inf_q"] = record.yields_only_mle.k_inf_q;
  mle_j["g_q"] = std::vector<double>(record.yields_only_mle.g_q.begin(),
                                     record.yields_only_mle.g_q.end());
  std::vector<double> sp;
  for (Eigen::Index i = 0; i < record.yields_only_mle.sigma_p.rows(); ++i)
    for (Eigen::Index k = 0; k <= i; ++k)
      sp.push_back(record.yields_only_mle.sigma_p(i, k));
  mle_j["sigma_p_lower"] = sp;
  mle_j["lambda12"] = record.yields_only_mle.lambda12();
  j["yields_only_mle"] = mle_j;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_tuning: cannot write " + path);
  out << j.dump(2) << '\n';
}

TuningRecord load_tuning(const std::string& path, const ModelSpec& spec) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_tuning: cannot open " + path);
  nlohmann::json j;
  in >> j;
  TuningRecord record;
  const auto sz = j.at("sigma_z").get<std::vector<double>>();
  const auto pz = j.at("phi_z_init").get<std::vector<double>>();
  record.sigma_z = Eigen::Map<const Eigen::VectorXd>(sz.data(),
                                                     static_cast<Eigen::Index>(sz.size()));
  record.phi_z = Eigen::Map<const Eigen::VectorXd>(pz.data(),
                                                   static_cast<Eigen::Index>(pz.size()));
  record.c = j.at("c").get<double>();
  record.loglik = j.at("loglik").get<double>();
  record.spec_latent_dim = static_cast<int>(sz.size());
  if (record.spec_latent_dim != spec.latent_dim())
    throw std::runtime_error("load_tuning: record latent dimension does not match model " +
                             spec.name());
  const auto& mle_j = j.at("yields_only_mle");
  ModelSpec spec0 = spec;
  spec0.latent_mask.assign(spec.latent_mask.size(), false);
  spec0.restriction = RiskPriceRestriction::kLambda12Only;
  Theta th = Theta::zero(spec0);
  th.sigma_e2 = mle_j.at("sigma_e2").get<double>();
  th.k_inf_q = mle_j.at("k_inf_q").get<double>();
  const auto g = mle_j.at("g_q").get<std::vector<double>>();
  th.g_q = Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
  const auto sp = mle_j.at("sigma_p_lower").get<std::vector<double>>();
  std::size_t pos = 0;
  for (Eigen::Index i = 0; i < th.sigma_p.rows(); ++i)
    for (Eigen::Index k = 0; k <= i; ++k) th.sigma_p(i, k) = sp.at(pos++);
  th.lambda1(0, 1) = mle_j.at("lambda12").get<double>();
  record.yields_only_mle = th;
  return record;
}

}  // namespace dtsm
