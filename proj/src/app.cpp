#include "dtsm/app.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "dtsm/mle.hpp"
#include "dtsm/pca.hpp"
#include "dtsm/simulate.hpp"

namespace dtsm {
namespace fs = std::filesystem;

namespace {

int resolve_threads(int configured) {
  if (configured > 0) return configured;
  if (const char* env = std::getenv("DTSM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

PCWeights load_weights_csv(const std::string& path,
                           const std::vector<int>& maturities) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open weights csv " + path);
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) row.push_back(std::stod(field));
    if (row.size() != maturities.size())
      throw std::runtime_error(path + ": weight row length != panel maturities");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no weight rows");
  PCWeights w;
  w.w.resize(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(maturities.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      w.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  w.w_perp = null_space_basis(w.w);
  return w;
}

void write_weights_csv(const std::string& path, const Eigen::MatrixXd& w) {
  std::ofstream out(path);
  char buf[32];
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", w(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace

RunContext load_context(const RunConfig& config, bool require_tuning) {
  RunContext ctx;
  ctx.config = config;
  ctx.n_threads = resolve_threads(config.threads);
  if (config.yields_csv.empty())
    throw ConfigError("data.yields_csv is required");
  ctx.panel = load_yield_panel(config.yields_csv, config.percent_override);

  ctx.train_end = ctx.panel.last_index_on_or_before(config.train_end);
  if (ctx.train_end < 61)
    throw ConfigError("training window ends too early (need > 60 rows, have " +
                      std::to_string(ctx.train_end + 1) + ")");
  ctx.test_end = config.test_end.empty()
                     ? ctx.panel.rows() - 1
                     : ctx.panel.last_index_on_or_before(config.test_end);
  if (ctx.test_end <= ctx.train_end)
    throw ConfigError("data.test_end must lie after data.train_end");

  const ModelSpec spec = config.model_spec(ctx.panel.maturities);

  auto data = std::make_shared<EstimationData>();
  data->spec = spec;
  data->maturities = ctx.panel.maturities;
  data->yields = ctx.panel.yields / 12.0;  // per-month decimals internally
  if (config.weights_mode == "file") {
    if (config.weights_csv.empty())
      throw ConfigError("data.weights_csv required when weights_mode = file");
    data->weights = load_weights_csv(config.weights_csv, ctx.panel.maturities);
    if (data->weights.w.rows() != spec.n_factors)
      throw ConfigError("weights file rows != model.n_factors");
  } else {
    data->weights =
        pca_weights(data->yields.topRows(ctx.train_end + 1), spec.n_factors)
            .weights;
  }
  data->factors = data->yields * data->weights.w.transpose();
  data->validate();
  ctx.data = std::move(data);

  if (spec.latent_dim() > 0) {
    if (fs::exists(ctx.tuning_path())) {
      ctx.tuning = load_tuning(ctx.tuning_path(), spec);
      ctx.has_tuning = true;
      ctx.sigma_z = ctx.tuning.sigma_z;
    } else if (require_tuning) {
      std::cerr << "[tune] no cached record, running the in-sample calibration\n";
      TuneOptions opts;
      opts.seed = stream_seed(config.seed, 0x74756e65ULL);
      ctx.tuning = tune_sigma_z(*ctx.data, ctx.train_end, opts);
      ctx.has_tuning = true;
      ctx.sigma_z = ctx.tuning.sigma_z;
      fs::create_directories(config.output_dir);
      save_tuning(ctx.tuning_path(), ctx.tuning);
    }
  } else {
    ctx.sigma_z = Eigen::VectorXd(0);
  }
  return ctx;
}

int cmd_simulate(const RunConfig& config) {
  fs::create_directories(config.output_dir);
  // synthetic-generator parameter values; overridable knobs in [simulate]
  std::vector<int> maturities{1, 11, 12, 23, 24, 35, 36, 59, 60, 84, 120};
  ModelSpec spec = config.model_spec(maturities);

  Theta truth = Theta::zero(spec);
  truth.k_inf_q = 1.2e-5;
  truth.g_q.resize(spec.n_factors);
  for (int i = 0; i < spec.n_factors; ++i)
    truth.g_q[i] = 0.997 - (i == 0 ? 0.0 : 0.047 + 0.07 * (i - 1));
  truth.sigma_p.setZero();
  const double diags[] = {2.5e-4, 1.2e-4, 6e-5, 4e-5, 3e-5};
  for (int i = 0; i < spec.n_factors; ++i)
    truth.sigma_p(i, i) = diags[std::min(i, 4)];
  if (spec.n_factors >= 2) truth.sigma_p(1, 0) = -3e-5;
  if (spec.n_factors >= 3) {
    truth.sigma_p(2, 0) = 1e-5;
    truth.sigma_p(2, 1) = -2e-5;
  }
  truth.phi_z.setConstant(config.sim_phi_z);
  if (spec.restriction == RiskPriceRestriction::kLambda12Only)
    truth.lambda1(0, 1) = config.sim_lambda12;
  truth.sigma_e2 = 6.4e-9;
  const Eigen::VectorXd sigma_z =
      Eigen::VectorXd::Constant(spec.latent_dim(), config.sim_sigma_z);

  const PCWeights weights =
      polynomial_weights(spec.n_factors, static_cast<int>(maturities.size()));
  const SimulatedData sim = simulate_panel(truth, sigma_z, spec, weights,
                                           config.sim_length, config.seed);

  YieldPanel panel;
  panel.maturities = maturities;
  panel.yields = 12.0 * sim.yields;  // store per-annum decimals
  panel.provenance = "simulated";
  const int start = parse_iso_month(config.sim_start);
  for (int t = 0; t <= config.sim_length; ++t) {
    panel.month_index.push_back(start + t);
    panel.dates.push_back(format_iso_month(start + t));
  }
  save_yield_panel(config.output_dir + "/sim_yields.csv", panel);
  write_weights_csv(config.output_dir + "/sim_weights.csv", weights.w);

  // ground truth for recovery studies
  nlohmann::ordered_json truth_json;
  truth_json["k_inf_q"] = truth.k_inf_q;
  truth_json["g_q"] = std::vector<double>(truth.g_q.begin(), truth.g_q.end());
  std::vector<double> sp;
  for (int i = 0; i < spec.n_factors; ++i)
    for (int j = 0; j <= i; ++j) sp.push_back(truth.sigma_p(i, j));
  truth_json["sigma_p_lower"] = sp;
  truth_json["sigma_e2"] = truth.sigma_e2;
  truth_json["lambda12"] = truth.lambda12();
  truth_json["phi_z"] = std::vector<double>(truth.phi_z.begin(), truth.phi_z.end());
  truth_json["sigma_z"] = std::vector<double>(sigma_z.begin(), sigma_z.end());
  truth_json["model"] = spec.name();
  std::ofstream(config.output_dir + "/sim_truth.json")
      << truth_json.dump(2) << '\n';

  std::ofstream latents(config.output_dir + "/sim_latents.csv");
  latents << "date";
  for (int j = 0; j < spec.latent_dim(); ++j) latents << ",z" << (j + 1);
  latents << '\n';
  for (int t = 0; t <= config.sim_length; ++t) {
    latents << panel.dates[static_cast<std::size_t>(t)];
    for (int j = 0; j < spec.latent_dim(); ++j)
      latents << ',' << sim.latents(t, j);
    latents << '\n';
  }
  std::cout << "simulated " << spec.name() << " panel: T+1="
            << config.sim_length + 1 << " rows, J=" << maturities.size()
            << " maturities -> " << config.output_dir << "\n";
  return 0;
}

int cmd_tune(const RunConfig& config) {
  RunContext ctx = load_context(config, false);
  if (ctx.data->spec.latent_dim() == 0) {
    std::cerr << "model " << ctx.model_name() << " has no latent factors\n";
    return 2;
  }
  TuneOptions opts;
  opts.seed = stream_seed(config.seed, 0x74756e65ULL);
  const TuningRecord record = tune_sigma_z(*ctx.data, ctx.train_end, opts);
  fs::create_directories(config.output_dir);
  save_tuning(ctx.tuning_path(), record);
  std::cout << "tuned " << ctx.model_name() << ": c=" << record.c
            << " sigma_z=[";
  for (Eigen::Index i = 0; i < record.sigma_z.size(); ++i)
    std::cout << (i ? " " : "") << record.sigma_z[i];
  std::cout << "] loglik=" << record.loglik << " -> " << ctx.tuning_path()
            << "\n";
  return 0;
}

int cmd_estimate(const RunConfig& config, bool resume) {
  RunContext ctx = load_context(config, true);
  const auto& data = *ctx.data;
  AtsmSmcModel model(ctx.data, ctx.sigma_z, ctx.train_end + 1,
                     config.jitter_sweeps);
  fs::create_directories(ctx.checkpoints_dir());

  Cloud<AtsmParticle> cloud;
  const int latest = resume ? latest_checkpoint(ctx.checkpoints_dir()) : -1;
  if (latest >= ctx.train_end) {
    cloud = load_cloud(checkpoint_path(ctx.checkpoints_dir(), latest), model,
                       config.hash());
    std::cout << "resumed from checkpoint t=" << latest << "\n";
  } else {
    std::cout << "[warm start] fitting the training window (t <= "
              << ctx.train_end << ")\n";
    MleOptions mle_opts;
    mle_opts.seed = stream_seed(config.seed, 0x6d6c65ULL);
    const MleResult mle = mle_fit(data, ctx.sigma_z, ctx.train_end, mle_opts);
    std::cout << "[warm start] loglik=" << mle.loglik
              << (mle.hessian_fallback ? " (diagonal curvature fallback)" : "")
              << "\n";
    ChainOptions chain_opts;
    chain_opts.burn_in = config.warm_mcmc_burn;
    chain_opts.thin = config.warm_mcmc_thin;
    chain_opts.seed = stream_seed(config.seed, 0x7761726dULL);
    const std::vector<Theta> draws = mcmc_chain(
        data, ctx.sigma_z, model.prior(), model.transform(), ctx.train_end,
        mle.theta, mle.proposals, config.n_particles, chain_opts);

    cloud.master_seed = config.seed;
    cloud.t = ctx.train_end;
    cloud.log_weights = Eigen::VectorXd::Zero(config.n_particles);
    cloud.particles.resize(static_cast<std::size_t>(config.n_particles));
    std::atomic<int> fail{0};
    parallel_for(config.n_particles, ctx.n_threads, [&](int i) {
      try {
        cloud.particles[static_cast<std::size_t>(i)] =
            model.make_particle(draws[static_cast<std::size_t>(i)], ctx.train_end);
      } catch (const std::exception&) {
        fail.fetch_add(1);
      }
    });
    if (fail.load() > 0)
      throw std::runtime_error("warm start: failed to initialise particles");
    save_cloud(checkpoint_path(ctx.checkpoints_dir(), cloud.t), cloud,
               data.spec, config.hash());
  }

  SmcConfig smc_cfg;
  smc_cfg.n_particles = config.n_particles;
  smc_cfg.ess_trigger_frac = config.ess_trigger;
  smc_cfg.jitter_sweeps = config.jitter_sweeps;
  smc_cfg.systematic_resampling = config.systematic_resampling;
  smc_cfg.master_seed = config.seed;
  smc_cfg.n_threads = ctx.n_threads;

  if (cloud.t >= ctx.test_end) {
    std::cout << "nothing to assimilate (cloud at t=" << cloud.t << ")\n";
  }
  while (cloud.t < ctx.test_end) {
    const auto report = smc_assimilate(model, cloud, smc_cfg);
    const bool last = cloud.t >= ctx.test_end;
    if ((cloud.t - ctx.train_end) % config.checkpoint_every == 0 || last)
      save_cloud(checkpoint_path(ctx.checkpoints_dir(), cloud.t), cloud,
                 data.spec, config.hash());
    std::cout << "t=" << report.t << " ("
              << ctx.panel.dates[static_cast<std::size_t>(report.t)]
              << ") log_m=" << report.log_m
              << " ess=" << report.ess_after_reweight
              << (report.tempered ? " tempered" : "")
              << (report.quarantined ? " quarantined=" +
                                           std::to_string(report.quarantined)
                                     : "")
              << "\n";
  }

  // manifest + evidence trace
  nlohmann::ordered_json manifest;
  manifest["model"] = ctx.model_name();
  manifest["config_hash"] = config.hash();
  manifest["seed"] = config.seed;
  manifest["schema"] = "dtsm-run-v1";
  manifest["train_end_index"] = ctx.train_end;
  manifest["test_end_index"] = ctx.test_end;
  manifest["train_end_date"] = ctx.panel.dates[static_cast<std::size_t>(ctx.train_end)];
  manifest["test_end_date"] = ctx.panel.dates[static_cast<std::size_t>(ctx.test_end)];
  manifest["n_particles"] = config.n_particles;
  manifest["log_evidence"] = cloud.log_evidence;
  manifest["proposal_refresh"] = "once per tempering stage, after each resample";
  std::vector<std::string> ckpts;
  for (int t = ctx.train_end; t <= cloud.t; ++t) {
    if (fs::exists(checkpoint_path(ctx.checkpoints_dir(), t)))
      ckpts.push_back(checkpoint_path("checkpoints", t));  // run-relative
  }
  manifest["checkpoints"] = ckpts;
  {
    nlohmann::ordered_json temper = nlohmann::ordered_json::array();
    for (const auto& event : cloud.temper_events) {
      nlohmann::ordered_json e;
      e["t"] = event.t;
      std::vector<double> phis;
      for (const auto& s : event.stages) phis.push_back(s.phi);
      e["phi"] = phis;
      temper.push_back(e);
    }
    manifest["temper_events"] = temper;
  }
  std::ofstream(config.output_dir + "/manifest.json") << manifest.dump(2) << '\n';

  std::ofstream evidence(config.output_dir + "/evidence.csv");
  evidence << "t,date,log_m\n";
  for (std::size_t k = 0; k < cloud.log_m_history.size(); ++k) {
    const int t = ctx.train_end + 1 + static_cast<int>(k);
    evidence << t << ',' << ctx.panel.dates[static_cast<std::size_t>(t)] << ','
             << cloud.log_m_history[k] << '\n';
  }
  std::cout << "estimate complete: t=" << cloud.t
            << " log_evidence=" << cloud.log_evidence << "\n";
  return 0;
}

}  // namespace dtsm
