// Acceptance suite: every criterion prints one line
//   [PASS|FAIL] criterion <k>: <name> (<details>)
// and the process exits with the number of failures. Individual criteria can
// be selected with --criterion <k>.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include "dtsm/app.hpp"
#include "dtsm/forecast.hpp"
#include "dtsm/math.hpp"
#include "dtsm/mle.hpp"
#include "dtsm/pca.hpp"
#include "dtsm/portfolio.hpp"
#include "dtsm/posterior.hpp"
#include "dtsm/regression.hpp"
#include "dtsm/simulate.hpp"
#include "dtsm/smc.hpp"
#include "dtsm/tuning.hpp"
#include "fixture_gaussian_model.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dtsm;

namespace {

struct Criterion {
  int id;
  const char* name;
  std::function<bool(std::string&)> run;
};

double elapsed_s(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// ---------------------------------------------------------------- criterion 1
bool kalman_oracle(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(2024);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    PDynamics dyn;
    dyn.mu_p = 1e-3 * rng.normal_vector(3);
    dyn.phi_p = Eigen::MatrixXd::Zero(3, 3);
    for (int i = 0; i < 3; ++i) {
      dyn.phi_p(i, i) = rng.uniform(0.1, 0.85);
      for (int j = 0; j < 3; ++j)
        if (i != j) dyn.phi_p(i, j) = rng.uniform(-0.08, 0.08);
    }
    dyn.sigma_p = oracles::random_cholesky(3, rng, 1e-3, 5e-3);
    std::vector<bool> mask{rep % 2 == 0, rep % 3 != 1, rep % 5 != 2};
    if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; }))
      mask[0] = true;
    const int m = static_cast<int>(std::count(mask.begin(), mask.end(), true));
    Eigen::VectorXd phi_z(m), sigma_z(m);
    for (int i = 0; i < m; ++i) {
      phi_z[i] = rng.uniform(-0.9, 0.95);
      sigma_z[i] = rng.uniform(2e-4, 4e-3);
    }
    const LatentSpec lat = LatentSpec::from_mask(mask, phi_z, sigma_z);
    const int t_n = 5 + static_cast<int>(rng.uniform(0.0, 15.99));
    Eigen::MatrixXd p(t_n + 1, 3);
    p.row(0) = (1e-3 * rng.normal_vector(3)).transpose();
    for (int t = 1; t <= t_n; ++t)
      p.row(t) = (dyn.mu_p + dyn.phi_p * p.row(t - 1).transpose() +
                  3e-3 * rng.normal_vector(3))
                     .transpose();
    const double filter_ll = kalman_loglik(p, dyn, lat).loglik;
    const double oracle_ll = oracles::stacked_gaussian_loglik(p, dyn, lat);
    worst = std::max(worst,
                     std::abs(filter_ll - oracle_ll) / std::abs(oracle_ll));
  }
  const double secs = elapsed_s(start);
  std::ostringstream os;
  os << "worst relative error " << worst << ", " << secs << " s";
  detail = os.str();
  return worst < 1e-8 && secs < 10.0;
}

// ---------------------------------------------------------------- criterion 2
bool pricing_oracle(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  Rng master(555);
  double worst_z = 0.0;
  bool ok = true;
  const int total_paths = 1000000;
  const int n_threads = std::max(2u, std::thread::hardware_concurrency());
  for (int rep = 0; rep < 10; ++rep) {
    QParams q;
    q.g_q = oracles::random_decreasing_eigenvalues(3, master);
    q.sigma = oracles::random_cholesky(3, master);
    q.k_inf_q = master.uniform(1e-4, 8e-4);
    q.sigma_e2 = 0.0;
    Eigen::VectorXd x0(3);
    x0 << master.uniform(-2e-3, 4e-3), master.uniform(-2e-3, 2e-3),
        master.uniform(-1e-3, 1e-3);
    const std::vector<int> mats{12, 24, 36};
    const auto lx = compute_x_loadings(q, mats);

    for (std::size_t k = 0; k < mats.size(); ++k) {
      // pool independent Monte Carlo chunks across threads
      const int chunk = total_paths / n_threads;
      std::vector<oracles::McPrice> chunks(static_cast<std::size_t>(n_threads));
      std::vector<std::thread> pool;
      for (int w = 0; w < n_threads; ++w)
        pool.emplace_back([&, w] {
          chunks[static_cast<std::size_t>(w)] = oracles::mc_bond_price(
              q.k_inf_q, q.g_q, q.sigma, x0, mats[k], chunk,
              stream_seed(9100, static_cast<std::uint64_t>(rep), k,
                          static_cast<std::uint64_t>(w)));
        });
      for (auto& th : pool) th.join();
      double price = 0.0, var = 0.0;
      for (const auto& c : chunks) {
        price += c.price;
        var += c.se * c.se;
      }
      price /= n_threads;
      const double se = std::sqrt(var) / n_threads;

      const double model_price =
          std::exp(lx.a_raw[static_cast<Eigen::Index>(k)] +
                   lx.b_raw.row(static_cast<Eigen::Index>(k)).dot(x0));
      const double z = std::abs(model_price - price) / se;
      worst_z = std::max(worst_z, z);
      if (z >= 3.0) ok = false;
    }
  }
  const double secs = elapsed_s(start);
  std::ostringstream os;
  os << "worst |z| " << worst_z << " over 10 draws x {12,24,36}m, " << secs
     << " s";
  detail = os.str();
  return ok && secs < 120.0;
}

// ---------------------------------------------------------------- criterion 3
bool rotation_identities(std::string& detail) {
  Rng rng(77);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    QParams q;
    q.g_q = oracles::random_decreasing_eigenvalues(3, rng);
    q.sigma = oracles::random_cholesky(3, rng);
    q.k_inf_q = rng.uniform(1e-5, 8e-4);
    q.sigma_e2 = 0.0;
    const std::vector<int> mats{6, 12, 24, 36, 60, 84, 120};
    const auto lx = compute_x_loadings(q, mats);
    Eigen::MatrixXd gauss(7, 7);
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) gauss(i, j) = rng.normal();
    PCWeights weights;
    const Eigen::MatrixXd q_full =
        Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();
    weights.w = q_full.leftCols(3).transpose();
    weights.w_perp = null_space_basis(weights.w);
    const auto lp = rotate_to_pc(lx, weights);
    worst = std::max(worst, (weights.w * lp.b_p - Eigen::MatrixXd::Identity(3, 3))
                                .cwiseAbs()
                                .maxCoeff());
    worst = std::max(worst, (weights.w * lp.a_p).cwiseAbs().maxCoeff());
  }
  std::ostringstream os;
  os << "worst identity deviation " << worst;
  detail = os.str();
  return worst < 1e-10;
}

// shared helpers for the estimation criteria -------------------------------

struct SimulatedRun {
  ModelSpec spec;
  EstimationData data;
  Theta truth;
  Eigen::VectorXd sigma_z_true;
};

SimulatedRun make_lf010_run(int t_total, std::uint64_t seed) {
  SimulatedRun run;
  run.spec = fixtures::make_spec({false, true, false});
  run.truth = fixtures::true_theta(run.spec);
  run.sigma_z_true = fixtures::true_sigma_z(run.spec);
  run.data = fixtures::simulated_dataset(run.spec, t_total, seed);
  return run;
}

Cloud<AtsmParticle> warm_start_cloud(const AtsmSmcModel& model,
                                     const MleResult& mle, int n_particles,
                                     int train_end, int burn, int thin,
                                     std::uint64_t seed) {
  ChainOptions opts;
  opts.burn_in = burn;
  opts.thin = thin;
  opts.seed = seed;
  const std::vector<Theta> draws =
      mcmc_chain(model.data(), model.sigma_z(), model.prior(),
                 model.transform(), train_end, mle.theta, mle.proposals,
                 n_particles, opts);
  Cloud<AtsmParticle> cloud;
  cloud.master_seed = seed;
  cloud.t = train_end;
  cloud.log_weights = Eigen::VectorXd::Zero(n_particles);
  cloud.particles.resize(static_cast<std::size_t>(n_particles));
  parallel_for(n_particles, 0, [&](int i) {
    cloud.particles[static_cast<std::size_t>(i)] =
        model.make_particle(draws[static_cast<std::size_t>(i)], train_end);
  });
  return cloud;
}

// weighted natural-coordinate rows: sigma_e2, k_inf, g, chol, phi_z, lambda12
Eigen::MatrixXd natural_rows(const std::vector<AtsmParticle>& particles) {
  const int r = static_cast<int>(particles[0].theta.g_q.size());
  const int m = static_cast<int>(particles[0].theta.phi_z.size());
  const int dim = 2 + r + r * (r + 1) / 2 + m + 1;
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(particles.size()), dim);
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const Theta& th = particles[i].theta;
    int c = 0;
    rows(static_cast<Eigen::Index>(i), c++) = th.sigma_e2;
    rows(static_cast<Eigen::Index>(i), c++) = th.k_inf_q;
    for (int k = 0; k < r; ++k) rows(static_cast<Eigen::Index>(i), c++) = th.g_q[k];
    for (int a = 0; a < r; ++a)
      for (int b = 0; b <= a; ++b)
        rows(static_cast<Eigen::Index>(i), c++) = th.sigma_p(a, b);
    for (int k = 0; k < m; ++k)
      rows(static_cast<Eigen::Index>(i), c++) = th.phi_z[k];
    rows(static_cast<Eigen::Index>(i), c++) = th.lambda1(0, 1);
  }
  return rows;
}

// ---------------------------------------------------------------- criterion 4
bool ibis_vs_mcmc(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const int t_total = 200, train_end = 150, n_particles = 1000;
  SimulatedRun run = make_lf010_run(t_total, 4242);

  TuneOptions tune_opts;
  tune_opts.seed = 31;
  const TuningRecord tuning = tune_sigma_z(run.data, train_end, tune_opts);

  auto shared = std::make_shared<EstimationData>(run.data);
  AtsmSmcModel model(shared, tuning.sigma_z, train_end + 1);
  MleOptions mle_opts;
  mle_opts.seed = 32;
  const MleResult mle = mle_fit(run.data, tuning.sigma_z, train_end, mle_opts);

  Cloud<AtsmParticle> cloud =
      warm_start_cloud(model, mle, n_particles, train_end, 3000, 3, 33);
  SmcConfig cfg;
  cfg.n_particles = n_particles;
  cfg.master_seed = 34;
  cloud.master_seed = 34;
  while (cloud.t < t_total) smc_assimilate(model, cloud, cfg);

  // offline reference: long chain targeting the posterior at t_total, with
  // proposals refreshed from the IBIS cloud for healthy acceptance
  const Eigen::VectorXd w = cloud.normalized();
  const BlockProposals ref_props = proposals_from_cloud(
      model.transform(), unconstrained_rows(cloud.particles, model.transform()),
      w, 1.5, 5.0);
  ChainOptions chain_opts;
  chain_opts.burn_in = 20000;
  chain_opts.thin = 1;
  chain_opts.seed = 35;
  const std::vector<Theta> chain =
      mcmc_chain(run.data, tuning.sigma_z, model.prior(), model.transform(),
                 t_total, mle.theta, ref_props, 180000, chain_opts);

  // coordinates: lambda12, phi_z, chol diagonal
  const auto coord = [](const Theta& th, int k) {
    switch (k) {
      case 0: return th.lambda1(0, 1);
      case 1: return th.phi_z[0];
      case 2: return th.sigma_p(0, 0);
      case 3: return th.sigma_p(1, 1);
      default: return th.sigma_p(2, 2);
    }
  };
  const char* names[] = {"lambda12", "phi_z", "chol11", "chol22", "chol33"};

  bool ok = true;
  std::ostringstream os;
  const double cloud_ess = ess_from_log_weights(cloud.log_weights);
  for (int k = 0; k < 5; ++k) {
    double ibis_mean = 0.0, ibis_m2 = 0.0;
    for (int i = 0; i < cloud.size(); ++i) {
      const double v = coord(cloud.particles[static_cast<std::size_t>(i)].theta, k);
      ibis_mean += w[i] * v;
      ibis_m2 += w[i] * v * v;
    }
    const double ibis_sd = std::sqrt(std::max(ibis_m2 - ibis_mean * ibis_mean, 0.0));
    const double ibis_se = ibis_sd / std::sqrt(cloud_ess);

    // batch means over the chain
    const int n_batches = 50;
    const std::size_t batch = chain.size() / n_batches;
    double chain_mean = 0.0;
    std::vector<double> batch_means(n_batches, 0.0);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n_batches) * batch; ++i) {
      const double v = coord(chain[i], k);
      chain_mean += v;
      batch_means[i / batch] += v;
    }
    chain_mean /= static_cast<double>(n_batches * batch);
    double bvar = 0.0;
    for (double& bm : batch_means) {
      bm /= static_cast<double>(batch);
      bvar += (bm - chain_mean) * (bm - chain_mean);
    }
    bvar /= (n_batches - 1.0);
    const double chain_se = std::sqrt(bvar / n_batches);

    const double se = std::sqrt(ibis_se * ibis_se + chain_se * chain_se);
    const double z = std::abs(ibis_mean - chain_mean) / se;
    os << names[k] << " z=" << std::round(z * 100) / 100 << " ";
    if (z >= 3.0) ok = false;
  }
  os << "(" << elapsed_s(start) << " s)";
  detail = os.str();
  return ok && elapsed_s(start) < 1800.0;
}

// ---------------------------------------------------------------- criterion 5
bool evidence_oracle(std::string& detail) {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    fixtures::GaussianMeanModel model;
    model.obs_var = 1.0;
    model.prior_var = 25.0;
    const int t_n = 40;
    model.obs.resize(t_n + 1);
    Rng rng(seed * 13 + 1);
    for (int t = 0; t <= t_n; ++t) model.obs[t] = 1.1 + rng.normal();

    auto cloud = init_cloud<fixtures::GaussianMeanModel::Particle>(
        800, seed * 29 + 3, [&](int, Rng& r) {
          fixtures::GaussianMeanModel::Particle p;
          p.mu = 5.0 * r.normal();
          return p;
        });
    cloud.t = -1;
    SmcConfig cfg;
    cfg.n_particles = 800;
    cfg.master_seed = seed * 101 + 7;
    cloud.master_seed = cfg.master_seed;
    for (int t = 0; t <= t_n; ++t) smc_assimilate(model, cloud, cfg);

    const double quad = model.quadrature_log_evidence(t_n);
    worst = std::max(worst, std::abs(cloud.log_evidence - quad) / std::abs(quad));
  }
  std::ostringstream os;
  os << "worst relative log-evidence error " << worst << " over 10 seeds";
  detail = os.str();
  return worst < 0.005;
}

// ---------------------------------------------------------------- criterion 6
bool parameter_recovery(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const int t_total = 276, train_end = 216, n_particles = 400;
  int covered = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SimulatedRun run = make_lf010_run(t_total, 7000 + seed);
    TuneOptions tune_opts;
    tune_opts.seed = seed * 3 + 1;
    tune_opts.mle.restarts = 1;
    const TuningRecord tuning = tune_sigma_z(run.data, train_end, tune_opts);

    auto shared = std::make_shared<EstimationData>(run.data);
    AtsmSmcModel model(shared, tuning.sigma_z, train_end + 1);
    MleOptions mle_opts;
    mle_opts.seed = seed * 5 + 2;
    mle_opts.restarts = 1;
    const MleResult mle = mle_fit(run.data, tuning.sigma_z, train_end, mle_opts);
    Cloud<AtsmParticle> cloud = warm_start_cloud(
        model, mle, n_particles, train_end, 2000, 2, seed * 7 + 3);
    SmcConfig cfg;
    cfg.n_particles = n_particles;
    cfg.master_seed = seed * 11 + 4;
    cloud.master_seed = cfg.master_seed;
    while (cloud.t < t_total) smc_assimilate(model, cloud, cfg);

    const Eigen::MatrixXd rows = natural_rows(cloud.particles);
    const Eigen::VectorXd w = cloud.normalized();
    Eigen::VectorXd truth_coords(rows.cols());
    {
      std::vector<AtsmParticle> one(1);
      one[0].theta = run.truth;
      truth_coords = natural_rows(one).row(0);
    }
    for (Eigen::Index k = 0; k < rows.cols(); ++k) {
      const double lo = weighted_quantile(rows.col(k), w, 0.025);
      const double hi = weighted_quantile(rows.col(k), w, 0.975);
      total += 1;
      if (truth_coords[k] >= lo && truth_coords[k] <= hi) covered += 1;
    }
  }
  const double rate = static_cast<double>(covered) / total;
  std::ostringstream os;
  os << "coverage " << covered << "/" << total << " = " << rate << " ("
     << elapsed_s(start) << " s)";
  detail = os.str();
  return rate >= 0.85;
}

// ---------------------------------------------------------------- criterion 7
bool forecast_positivity(std::string& detail) {
  const int t_oos = 120, n_replicas = 100, h = 1;
  int positive = 0;
  std::ostringstream os;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SimulatedRun run = make_lf010_run(140 + t_oos + h, 9000 + seed);
    auto shared = std::make_shared<EstimationData>(run.data);
    AtsmSmcModel model(shared, run.sigma_z_true, 141);
    AtsmParticle proto = model.make_particle(run.truth, 140);

    std::vector<double> realized, points, eh_points;
    KalmanState state = proto.state;
    for (int t = 140; t + h <= 140 + t_oos + h - 1; ++t) {
      if (t > 140) {
        auto step = kalman_step(state, run.data.factors.row(t - 1),
                                run.data.factors.row(t), proto.parts->dyn,
                                proto.parts->lat);
        state = step.state;
      }
      AtsmParticle at_t = proto;
      at_t.state = state;
      std::vector<AtsmParticle> cloud(n_replicas, at_t);
      const auto draws = predict_excess_returns(
          cloud, Eigen::VectorXd::Zero(n_replicas), run.data,
          run.data.factors.row(t), std::vector<int>{24}, h,
          stream_seed(555, seed, static_cast<std::uint64_t>(t)), 0);
      points.push_back(draws.point[0]);
      realized.push_back(observed_excess_return(run.data.yields,
                                                run.data.maturities, t, 24, h,
                                                false));
      std::vector<double> history;
      for (int j = 1; j + h <= t; ++j)
        history.push_back(observed_excess_return(
            run.data.yields, run.data.maturities, j, 24, h, false));
      eh_points.push_back(eh_benchmark(history));
    }
    const auto sz = static_cast<Eigen::Index>(points.size());
    const double r2 = r2_os(
        Eigen::Map<const Eigen::VectorXd>(realized.data(), sz),
        Eigen::Map<const Eigen::VectorXd>(points.data(), sz),
        Eigen::Map<const Eigen::VectorXd>(eh_points.data(), sz));
    if (r2 > 0.0) positive += 1;
  }
  os << positive << "/20 seeds with positive out-of-sample R^2 at 24m, h=1";
  detail = os.str();
  return positive >= 18;
}

// ---------------------------------------------------------------- criterion 8
bool utility_optimizer(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  std::atomic<int> failures{0};
  std::atomic<std::uint64_t> worst_bits{0};  // max abs deviation, encoded
  const auto record = [&](double dev) {
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof dev);
    std::uint64_t cur = worst_bits.load();
    std::memcpy(&bits, &dev, sizeof bits);
    while (bits > cur && !worst_bits.compare_exchange_weak(cur, bits)) {
    }
  };

  const auto grid_argmax = [](const Eigen::VectorXd& weights,
                              const Eigen::VectorXd& rx, double rf,
                              const AllocationScenario& sc) {
    const double riskless = std::exp(rf);
    Eigen::VectorXd gross(rx.size());
    for (Eigen::Index j = 0; j < rx.size(); ++j)
      gross[j] = std::min(std::max(std::exp(rf + rx[j]), riskless * 1e-4),
                          riskless * 1e4);
    constexpr int kPoints = 1000001;
    double best_w = sc.lower, best_v = -1e308;
    for (int k = 0; k < kPoints; ++k) {
      const double w = sc.lower + (sc.upper - sc.lower) * k / (kPoints - 1.0);
      double acc = 0.0;
      bool feasible = true;
      for (Eigen::Index j = 0; j < rx.size(); ++j) {
        const double wealth = (1.0 - w) * riskless + w * gross[j];
        if (wealth <= 0.0) {
          feasible = false;
          break;
        }
        const double w2 = wealth * wealth;  // gamma = 5 exact power
        acc += weights[j] * (-0.25) / (w2 * w2);
      }
      if (feasible && acc > best_v) {
        best_v = acc;
        best_w = w;
      }
    }
    return best_w;
  };

  const int n_cases = 1000;
  parallel_for(n_cases, 0, [&](int rep) {
    Rng rng(stream_seed(31337, static_cast<std::uint64_t>(rep)));
    const AllocationScenario sc = (rep % 2 == 0)
                                      ? AllocationScenario::bounded(-1.0, 2.0)
                                      : AllocationScenario::bounded(-1.0, 5.0);
    const bool two_point = rep < n_cases / 2;
    const int n = two_point ? 2 : 4 + (rep % 9);
    Eigen::VectorXd w(n), rx(n);
    for (int i = 0; i < n; ++i) {
      w[i] = two_point ? 1.0 : rng.uniform(0.05, 1.0);
      rx[i] = rng.uniform(-0.025, 0.025);
    }
    const double rf = rng.uniform(0.0, 0.005);
    const auto res = optimal_weight(w, rx, rf, sc);
    const double oracle = grid_argmax(w, rx, rf, sc);
    const double dev = std::abs(res.weight - oracle);
    record(dev);
    if (dev > 1e-4) failures.fetch_add(1);
  });
  double worst;
  {
    const std::uint64_t bits = worst_bits.load();
    std::memcpy(&worst, &bits, sizeof worst);
  }

  // certainty-equivalent identities
  Rng rng(99);
  double worst_identity = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 10 + rep % 30;
    Eigen::VectorXd a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = -std::exp(rng.uniform(-2.0, 0.5));
      b[i] = -std::exp(rng.uniform(-2.0, 0.5));
    }
    worst_identity = std::max(worst_identity, std::abs(cer(a, a, 5.0)));
    const double swap_gap =
        std::abs((1.0 + cer(a, b, 5.0)) * (1.0 + cer(b, a, 5.0)) - 1.0);
    worst_identity = std::max(worst_identity, swap_gap);
  }

  std::ostringstream os;
  os << failures.load() << "/1000 beyond 1e-4 (worst " << worst
     << "), worst identity gap " << worst_identity << ", " << elapsed_s(start)
     << " s";
  detail = os.str();
  return failures.load() == 0 && worst_identity < 1e-10;
}

// ---------------------------------------------------------------- criterion 9
bool hidden_component_identities(std::string& detail) {
  Rng rng(4096);
  double worst_recon = 0.0, worst_orth = 0.0;
  int detected = 0;
  const int n_seeds = 20;
  for (int seed = 0; seed < n_seeds; ++seed) {
    const int t_n = 200;
    Eigen::MatrixXd p(t_n, 3);
    for (int t = 0; t < t_n; ++t)
      for (int k = 0; k < 3; ++k) p(t, k) = rng.normal();
    Eigen::MatrixXd z(t_n, 1);
    for (int t = 0; t < t_n; ++t) z(t, 0) = 0.4 * p(t, 1) + rng.normal();
    const auto hc = hidden_component(z, p);
    worst_recon = std::max(worst_recon,
                           (hc.spanned + hc.hidden - z).cwiseAbs().maxCoeff());
    for (int k = 0; k < 3; ++k) {
      const double dot = std::abs(
          (hc.hidden.col(0).array() * (p.col(k).array() - p.col(k).mean()))
              .sum());
      worst_orth = std::max(worst_orth, dot / t_n);
    }

    // planted-signal detection through the excess-return table
    const ModelSpec spec = fixtures::make_spec({false, true, false});
    const EstimationData data =
        fixtures::simulated_dataset(spec, 200, 5100 + static_cast<std::uint64_t>(seed));
    Eigen::VectorXd latent(data.rows());
    for (Eigen::Index i = 0; i < latent.size(); ++i) latent[i] = rng.normal();
    Eigen::MatrixXd yields_mod = data.yields;
    Eigen::VectorXd rx(data.rows() - 1);
    for (Eigen::Index t = 0; t + 1 < data.rows(); ++t)
      rx[t] = observed_excess_return(data.yields, data.maturities,
                                     static_cast<int>(t), 24, 1, false);
    const double scale = 1.5 * std::sqrt(rx.squaredNorm() / rx.size());
    for (Eigen::Index t = 0; t + 1 < data.rows(); ++t)
      yields_mod(t + 1, 3) -= scale * latent[t] / 23.0;  // 23m column
    const auto cells = delta_r2_table(yields_mod, data.maturities, data.factors,
                                      latent, std::vector<int>{1},
                                      std::vector<int>{24}, false);
    if (cells.size() == 1 && cells[0].delta > 0.0) detected += 1;
  }
  std::ostringstream os;
  os << "reconstruction " << worst_recon << ", orthogonality " << worst_orth
     << ", planted-signal detection " << detected << "/" << n_seeds;
  detail = os.str();
  return worst_recon < 1e-12 && worst_orth < 1e-10 && detected >= 18;
}

// --------------------------------------------------------------- criterion 10
bool sequentiality(std::string& detail) {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "dtsm_acceptance_seq";
  fs::remove_all(base);
  fs::create_directories(base);

  // the drivers narrate progress; keep the acceptance output to one line
  std::ofstream sink((base / "driver_output.log").string());
  auto* cout_buf = std::cout.rdbuf(sink.rdbuf());
  auto* cerr_buf = std::cerr.rdbuf(sink.rdbuf());
  struct RestoreStreams {
    std::streambuf *out, *err;
    ~RestoreStreams() {
      std::cout.rdbuf(out);
      std::cerr.rdbuf(err);
    }
  } restore{cout_buf, cerr_buf};

  // synthetic panel shared by both runs
  RunConfig sim_cfg;
  sim_cfg.n_factors = 3;
  sim_cfg.latent_mask = "010";
  sim_cfg.seed = 12;
  sim_cfg.sim_length = 96;
  sim_cfg.output_dir = (base / "data").string();
  cmd_simulate(sim_cfg);

  const auto run_cfg = [&](const std::string& out) {
    RunConfig cfg;
    cfg.n_factors = 3;
    cfg.latent_mask = "010";
    cfg.yields_csv = (base / "data" / "sim_yields.csv").string();
    cfg.weights_mode = "file";
    cfg.weights_csv = (base / "data" / "sim_weights.csv").string();
    cfg.train_end = "1991-01";  // row 72
    cfg.test_end = "1993-01";   // row 96
    cfg.n_particles = 80;
    cfg.warm_mcmc_burn = 300;
    cfg.warm_mcmc_thin = 2;
    cfg.eval_maturities = {24, 60};
    cfg.horizons = {1};
    cfg.seed = 2718;
    cfg.output_dir = out;
    return cfg;
  };

  // run A: one shot
  RunConfig cfg_a = run_cfg((base / "a").string());
  cmd_estimate(cfg_a, false);
  cmd_forecast(cfg_a);
  cmd_backtest(cfg_a);
  cmd_report(cfg_a);

  // run B: same configuration, interrupted after t=84 and resumed
  RunConfig cfg_b = run_cfg((base / "b").string());
  {
    // copy tuning so both runs share the identical cached record
    fs::create_directories(cfg_b.output_dir);
    fs::copy_file(fs::path(cfg_a.output_dir) / "tuning.json",
                  fs::path(cfg_b.output_dir) / "tuning.json");
  }
  cmd_estimate(cfg_b, false);
  {
    // drop the tail checkpoints to mimic an interrupted run
    const fs::path ckpts = fs::path(cfg_b.output_dir) / "checkpoints";
    for (const auto& entry : fs::directory_iterator(ckpts)) {
      int t = -1;
      std::sscanf(entry.path().filename().string().c_str(), "ckpt_t%d.bin", &t);
      if (t > 84) fs::remove(entry.path());
    }
  }
  cmd_estimate(cfg_b, true);
  cmd_forecast(cfg_b);
  cmd_backtest(cfg_b);
  cmd_report(cfg_b);

  const auto file_bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
  };
  bool ok = true;
  std::ostringstream os;
  for (const char* name :
       {"checkpoints/ckpt_t00096.bin", "forecast_summary.json",
        "backtest_summary.json", "report.json", "evidence.csv",
        "manifest.json"}) {
    const bool same = file_bytes(fs::path(cfg_a.output_dir) / name) ==
                      file_bytes(fs::path(cfg_b.output_dir) / name);
    if (!same) {
      ok = false;
      os << name << " differs; ";
    }
  }
  if (ok) os << "final checkpoint, summaries and report byte-identical";
  detail = os.str();
  fs::remove_all(base);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  int only = -1;
  for (int i = 1; i + 1 < argc; i += 2)
    if (std::string(argv[i]) == "--criterion") only = std::atoi(argv[i + 1]);

  std::vector<Criterion> criteria{
      {1, "Kalman filter matches the dense stacked-Gaussian density", kalman_oracle},
      {2, "model prices match risk-neutral Monte Carlo", pricing_oracle},
      {3, "factor rotation identities", rotation_identities},
      {4, "sequential posterior matches a long offline chain", ibis_vs_mcmc},
      {5, "evidence matches 1-D quadrature on the conjugate fixture", evidence_oracle},
      {6, "credible-interval coverage of simulated truths", parameter_recovery},
      {7, "true-model forecasts beat the expanding mean", forecast_positivity},
      {8, "allocation optimizer matches the dense grid; CER identities", utility_optimizer},
      {9, "hidden-component identities and planted-signal detection", hidden_component_identities},
      {10, "resume equivalence and byte-identical reports", sequentiality},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (only > 0 && criterion.id != only) continue;
    std::string message;
    bool passed = false;
    try {
      passed = criterion.run(message);
    } catch (const std::exception& e) {
      message = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s (%s)\n", passed ? "PASS" : "FAIL",
                criterion.id, criterion.name, message.c_str());
    std::fflush(stdout);
    if (!passed) ++failures;
  }
  return failures;
}
