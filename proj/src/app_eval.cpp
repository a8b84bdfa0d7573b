#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "dtsm/app.hpp"
#include "dtsm/forecast.hpp"
#include "dtsm/portfolio.hpp"
#include "dtsm/regression.hpp"

namespace dtsm {
namespace fs = std::filesystem;
using njson = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct OriginRecord {
  int t = 0;
  double realized = 0.0;
  double model_point = 0.0;
  double eh_point = 0.0;
};

// realized rx_{j, j+h} for j = 1..t-h (monthly units)
std::vector<double> realized_history(const EstimationData& data, int t, int n,
                                     int h, bool interpolate) {
  std::vector<double> out;
  for (int j = 1; j + h <= t; ++j)
    out.push_back(observed_excess_return(data.yields, data.maturities, j, n, h,
                                         interpolate));
  return out;
}

std::uint64_t predict_seed(std::uint64_t master, int t, int h) {
  return stream_seed(master, 0x70726564ULL, static_cast<std::uint64_t>(t),
                     static_cast<std::uint64_t>(h));
}

struct BenchmarkSeries {
  std::vector<int> t;
  std::vector<double> model_point;
  std::vector<double> utility;  // backtest ledgers only
};

BenchmarkSeries load_benchmark_forecast(const std::string& dir, int n, int h) {
  BenchmarkSeries out;
  const std::string path =
      dir + "/forecast_n" + std::to_string(n) + "_h" + std::to_string(h) + ".csv";
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("benchmark forecast missing: " + path +
                             " (run forecast on the benchmark model first)");
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 4) continue;
    out.t.push_back(std::stoi(fields[0]));
    out.model_point.push_back(std::stod(fields[3]));
  }
  return out;
}

BenchmarkSeries load_benchmark_ledger(const std::string& dir, int scenario_idx,
                                      int n, int h) {
  BenchmarkSeries out;
  const std::string path = dir + "/ledger_s" + std::to_string(scenario_idx) +
                           "_n" + std::to_string(n) + "_h" + std::to_string(h) +
                           ".csv";
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("benchmark ledger missing: " + path +
                             " (run backtest on the benchmark model first)");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 6) continue;
    out.t.push_back(std::stoi(fields[0]));
    out.utility.push_back(std::stod(fields[5]));
  }
  return out;
}

}  // namespace

int cmd_forecast(const RunConfig& config) {
  RunContext ctx = load_context(config, true);
  AtsmSmcModel model(ctx.data, ctx.sigma_z, ctx.train_end + 1,
                     config.jitter_sweeps);
  const auto& data = *ctx.data;
  fs::create_directories(config.output_dir);

  const int last_ckpt = latest_checkpoint(ctx.checkpoints_dir());
  if (last_ckpt < ctx.train_end)
    throw std::runtime_error("no checkpoints found; run estimate first");

  // per (maturity, horizon) origin records
  std::map<std::pair<int, int>, std::vector<OriginRecord>> records;

  for (int t = ctx.train_end; t <= last_ckpt; ++t) {
    const std::string path = checkpoint_path(ctx.checkpoints_dir(), t);
    if (!fs::exists(path))
      throw std::runtime_error("missing checkpoint at t=" + std::to_string(t) +
                               "; rerun estimate with checkpoint_every=1");
    const Cloud<AtsmParticle> cloud = load_cloud(path, model, config.hash());
    for (const int h : config.horizons) {
      if (t + h > ctx.test_end) continue;
      const auto draws = predict_excess_returns(
          cloud.particles, cloud.log_weights, data, data.factors.row(t),
          config.eval_maturities, h, predict_seed(config.seed, t, h),
          ctx.n_threads);
      for (std::size_t c = 0; c < config.eval_maturities.size(); ++c) {
        const int n = config.eval_maturities[c];
        OriginRecord rec;
        rec.t = t;
        rec.realized = observed_excess_return(data.yields, data.maturities, t,
                                              n, h, config.interpolate);
        rec.model_point = draws.point[static_cast<Eigen::Index>(c)];
        const auto history = realized_history(data, t, n, h, config.interpolate);
        rec.eh_point = eh_benchmark(history);
        records[{n, h}].push_back(rec);
      }
    }
    if ((t - ctx.train_end) % 12 == 0)
      std::cerr << "[forecast] origin " << t << " done\n";
  }

  njson summary;
  summary["model"] = ctx.model_name();
  summary["config_hash"] = config.hash();
  njson horizons_json;
  for (const int h : config.horizons) {
    njson panel_a, panel_b;
    bool any = false;
    for (const int n : config.eval_maturities) {
      const auto it = records.find({n, h});
      if (it == records.end() || it->second.size() < 10) continue;
      any = true;
      const auto& recs = it->second;
      const auto count = static_cast<Eigen::Index>(recs.size());
      Eigen::VectorXd realized(count), model_pt(count), eh_pt(count);
      for (Eigen::Index i = 0; i < count; ++i) {
        realized[i] = recs[static_cast<std::size_t>(i)].realized;
        model_pt[i] = recs[static_cast<std::size_t>(i)].model_point;
        eh_pt[i] = recs[static_cast<std::size_t>(i)].eh_point;
      }
      njson cell;
      cell["r2os_pct"] = 100.0 * r2_os(realized, model_pt, eh_pt);
      cell["p_value"] =
          dm_cw_test(cw_adjusted_differential(realized, model_pt, eh_pt), h)
              .p_value;
      cell["n_forecasts"] = recs.size();
      panel_a[std::to_string(n)] = cell;

      if (!config.benchmark_run.empty()) {
        const BenchmarkSeries bench =
            load_benchmark_forecast(config.benchmark_run, n, h);
        std::map<int, double> bench_by_t;
        for (std::size_t i = 0; i < bench.t.size(); ++i)
          bench_by_t[bench.t[i]] = bench.model_point[i];
        std::vector<double> r_al, m_al, b_al;
        for (const auto& rec : recs) {
          const auto bit = bench_by_t.find(rec.t);
          if (bit == bench_by_t.end()) continue;
          r_al.push_back(rec.realized);
          m_al.push_back(rec.model_point);
          b_al.push_back(bit->second);
        }
        if (r_al.size() >= 10) {
          const auto sz = static_cast<Eigen::Index>(r_al.size());
          Eigen::VectorXd rv = Eigen::Map<Eigen::VectorXd>(r_al.data(), sz);
          Eigen::VectorXd mv = Eigen::Map<Eigen::VectorXd>(m_al.data(), sz);
          Eigen::VectorXd bv = Eigen::Map<Eigen::VectorXd>(b_al.data(), sz);
          njson bcell;
          bcell["r2os_pct"] = 100.0 * r2_os(rv, mv, bv);
          bcell["p_value"] =
              dm_cw_test(cw_adjusted_differential(rv, mv, bv), h).p_value;
          bcell["n_forecasts"] = r_al.size();
          panel_b[std::to_string(n)] = bcell;
        }
      }

      // per-origin csv
      std::ofstream csv(config.output_dir + "/forecast_n" + std::to_string(n) +
                        "_h" + std::to_string(h) + ".csv");
      csv << "t,date,realized,model_point,eh_point\n";
      for (const auto& rec : recs)
        csv << rec.t << ','
            << ctx.panel.dates[static_cast<std::size_t>(rec.t)] << ','
            << fmt(rec.realized) << ',' << fmt(rec.model_point) << ','
            << fmt(rec.eh_point) << '\n';
    }
    if (any) {
      njson h_json;
      h_json["vs_eh"] = panel_a;
      if (!panel_b.empty()) h_json["vs_benchmark"] = panel_b;
      horizons_json[std::to_string(h)] = h_json;
    }
  }
  summary["horizons"] = horizons_json;
  summary["benchmark_run"] = config.benchmark_run;
  summary["maturity_interpolation"] = config.interpolate;
  summary["note"] =
      "p-values are one-sided comparison indices, not formal hypothesis tests";
  std::ofstream(config.output_dir + "/forecast_summary.json")
      << summary.dump(2) << '\n';
  std::cout << "forecast summary -> " << config.output_dir
            << "/forecast_summary.json\n";
  return 0;
}

int cmd_backtest(const RunConfig& config) {
  RunContext ctx = load_context(config, true);
  AtsmSmcModel model(ctx.data, ctx.sigma_z, ctx.train_end + 1,
                     config.jitter_sweeps);
  const auto& data = *ctx.data;
  fs::create_directories(config.output_dir);
  const auto scenarios = config.allocation_scenarios();

  const int last_ckpt = latest_checkpoint(ctx.checkpoints_dir());
  if (last_ckpt < ctx.train_end)
    throw std::runtime_error("no checkpoints found; run estimate first");

  struct Cell {
    std::vector<int> t;
    std::vector<double> w_model, u_model, w_eh, u_eh, realized, rf;
    int caps = 0;
  };
  std::map<std::tuple<int, int, int>, Cell> cells;  // (scenario, n, h)

  for (int t = ctx.train_end; t <= last_ckpt; ++t) {
    const std::string path = checkpoint_path(ctx.checkpoints_dir(), t);
    if (!fs::exists(path))
      throw std::runtime_error("missing checkpoint at t=" + std::to_string(t));
    const Cloud<AtsmParticle> cloud = load_cloud(path, model, config.hash());
    for (const int h : config.horizons) {
      if (t + h > ctx.test_end) continue;
      const auto draws = predict_excess_returns(
          cloud.particles, cloud.log_weights, data, data.factors.row(t),
          config.eval_maturities, h, predict_seed(config.seed, t, h),
          ctx.n_threads);
      const double rf =
          h * yield_at_maturity(data.yields.row(t), data.maturities, h,
                                config.interpolate);
      for (std::size_t c = 0; c < config.eval_maturities.size(); ++c) {
        const int n = config.eval_maturities[c];
        if (n <= h) continue;
        const double realized = observed_excess_return(
            data.yields, data.maturities, t, n, h, config.interpolate);
        const auto history = realized_history(data, t, n, h, config.interpolate);
        if (history.empty()) continue;
        Eigen::VectorXd eh_draws;
        if (config.eh_weight_mode == "point") {
          eh_draws = Eigen::VectorXd::Constant(1, eh_benchmark(history));
        } else {
          eh_draws = Eigen::Map<const Eigen::VectorXd>(
              history.data(), static_cast<Eigen::Index>(history.size()));
        }
        const Eigen::VectorXd eh_weights =
            Eigen::VectorXd::Ones(eh_draws.size());

        for (std::size_t s = 0; s < scenarios.size(); ++s) {
          const auto& scenario = scenarios[s];
          const auto wm = optimal_weight(
              draws.weights, draws.rx_draws.col(static_cast<Eigen::Index>(c)),
              rf, scenario);
          const auto we = optimal_weight(eh_weights, eh_draws, rf, scenario);
          Cell& cell = cells[{static_cast<int>(s), n, h}];
          cell.t.push_back(t);
          cell.rf.push_back(rf);
          cell.realized.push_back(realized);
          cell.w_model.push_back(wm.weight);
          cell.u_model.push_back(
              realized_utility(wm.weight, rf, realized, scenario.gamma));
          cell.w_eh.push_back(we.weight);
          cell.u_eh.push_back(
              realized_utility(we.weight, rf, realized, scenario.gamma));
          cell.caps += (wm.cap_binding || we.cap_binding) ? 1 : 0;
        }
      }
    }
  }

  njson summary;
  summary["model"] = ctx.model_name();
  summary["config_hash"] = config.hash();
  summary["eh_weight_mode"] = config.eh_weight_mode;
  njson scenarios_json = njson::array();
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    njson scen;
    scen["name"] = config.scenarios[s];
    scen["gamma"] = scenarios[s].gamma;
    njson by_horizon;
    for (const int h : config.horizons) {
      njson by_maturity;
      for (const int n : config.eval_maturities) {
        const auto it = cells.find({static_cast<int>(s), n, h});
        if (it == cells.end() || it->second.t.size() < 10) continue;
        const Cell& cell = it->second;
        const auto count = static_cast<Eigen::Index>(cell.t.size());
        const Eigen::VectorXd um =
            Eigen::Map<const Eigen::VectorXd>(cell.u_model.data(), count);
        const Eigen::VectorXd ue =
            Eigen::Map<const Eigen::VectorXd>(cell.u_eh.data(), count);
        njson entry;
        const double cer_period = cer(um, ue, scenarios[s].gamma);
        entry["cer_vs_eh_annual_pct"] = 100.0 * cer_period * 12.0 / h;
        entry["p_value_vs_eh"] = dm_cw_test(um - ue, h).p_value;
        entry["n_periods"] = cell.t.size();
        entry["cap_bindings"] = cell.caps;

        if (!config.benchmark_run.empty()) {
          const BenchmarkSeries bench = load_benchmark_ledger(
              config.benchmark_run, static_cast<int>(s), n, h);
          std::map<int, double> ub_by_t;
          for (std::size_t i = 0; i < bench.t.size(); ++i)
            ub_by_t[bench.t[i]] = bench.utility[i];
          std::vector<double> um_al, ub_al;
          for (std::size_t i = 0; i < cell.t.size(); ++i) {
            const auto bit = ub_by_t.find(cell.t[i]);
            if (bit == ub_by_t.end()) continue;
            um_al.push_back(cell.u_model[i]);
            ub_al.push_back(bit->second);
          }
          if (um_al.size() >= 10) {
            const auto sz = static_cast<Eigen::Index>(um_al.size());
            const Eigen::VectorXd uma =
                Eigen::Map<const Eigen::VectorXd>(um_al.data(), sz);
            const Eigen::VectorXd uba =
                Eigen::Map<const Eigen::VectorXd>(ub_al.data(), sz);
            entry["cer_vs_benchmark_annual_pct"] =
                100.0 * cer(uma, uba, scenarios[s].gamma) * 12.0 / h;
            entry["p_value_vs_benchmark"] = dm_cw_test(uma - uba, h).p_value;
          }
        }
        by_maturity[std::to_string(n)] = entry;

        std::ofstream csv(config.output_dir + "/ledger_s" + std::to_string(s) +
                          "_n" + std::to_string(n) + "_h" + std::to_string(h) +
                          ".csv");
        csv << "t,date,rf,realized,w_model,u_model,w_eh,u_eh\n";
        for (std::size_t i = 0; i < cell.t.size(); ++i)
          csv << cell.t[i] << ','
              << ctx.panel.dates[static_cast<std::size_t>(cell.t[i])] << ','
              << fmt(cell.rf[i]) << ',' << fmt(cell.realized[i]) << ','
              << fmt(cell.w_model[i]) << ',' << fmt(cell.u_model[i]) << ','
              << fmt(cell.w_eh[i]) << ',' << fmt(cell.u_eh[i]) << '\n';
      }
      if (!by_maturity.empty()) by_horizon[std::to_string(h)] = by_maturity;
    }
    scen["horizons"] = by_horizon;
    scenarios_json.push_back(scen);
  }
  summary["scenarios"] = scenarios_json;
  summary["note"] =
      "p-values are one-sided comparison indices, not formal hypothesis tests";
  std::ofstream(config.output_dir + "/backtest_summary.json")
      << summary.dump(2) << '\n';
  std::cout << "backtest summary -> " << config.output_dir
            << "/backtest_summary.json\n";
  return 0;
}

int cmd_analyze(const RunConfig& config) {
  RunContext ctx = load_context(config, true);
  AtsmSmcModel model(ctx.data, ctx.sigma_z, ctx.train_end + 1,
                     config.jitter_sweeps);
  const auto& data = *ctx.data;
  fs::create_directories(config.output_dir);
  const int m_dim = data.spec.latent_dim();
  if (m_dim == 0) {
    std::cerr << "model " << ctx.model_name() << " has no latent factors\n";
    return 2;
  }

  const int last_ckpt = latest_checkpoint(ctx.checkpoints_dir());
  if (last_ckpt < ctx.train_end)
    throw std::runtime_error("no checkpoints found; run estimate first");
  const Cloud<AtsmParticle> cloud = load_cloud(
      checkpoint_path(ctx.checkpoints_dir(), last_ckpt), model, config.hash());

  // weighted filtered latent path: row s holds the mean of Z_s (filtered at
  // the final-cloud parameter posterior; no smoothing pass)
  const Eigen::VectorXd w = cloud.normalized();
  Eigen::MatrixXd z_series = Eigen::MatrixXd::Zero(last_ckpt, m_dim);
  std::vector<Eigen::MatrixXd> per_thread(static_cast<std::size_t>(cloud.size()));
  parallel_for(cloud.size(), ctx.n_threads, [&](int i) {
    const auto& particle = cloud.particles[static_cast<std::size_t>(i)];
    Eigen::MatrixXd path(last_ckpt, m_dim);
    KalmanState state = KalmanState::initial(particle.parts->lat);
    for (int t = 1; t <= last_ckpt; ++t) {
      const auto step = kalman_step(state, data.factors.row(t - 1),
                                    data.factors.row(t), particle.parts->dyn,
                                    particle.parts->lat);
      state = step.state;
      path.row(t - 1) = state.a_filt.transpose();  // alpha_t = Z_{t-1}
    }
    per_thread[static_cast<std::size_t>(i)] = std::move(path);
  });
  for (int i = 0; i < cloud.size(); ++i)
    z_series += w[i] * per_thread[static_cast<std::size_t>(i)];

  {
    std::ofstream csv(config.output_dir + "/latent_filtered.csv");
    csv << "date";
    for (int j = 0; j < m_dim; ++j) csv << ",z" << (j + 1);
    csv << '\n';
    for (int s = 0; s < last_ckpt; ++s) {
      csv << ctx.panel.dates[static_cast<std::size_t>(s)];
      for (int j = 0; j < m_dim; ++j) csv << ',' << fmt(z_series(s, j));
      csv << '\n';
    }
  }

  const Eigen::MatrixXd factors_aligned = data.factors.topRows(last_ckpt);
  njson analysis;
  analysis["model"] = ctx.model_name();
  analysis["latent_estimate"] = "filtered means (no smoothing pass)";
  analysis["regressions_include_intercept"] = true;

  // spanning regressions of each latent on the PCs
  njson spanning = njson::array();
  const HiddenComponent hc = hidden_component(z_series, factors_aligned);
  for (int j = 0; j < m_dim; ++j) {
    njson entry;
    entry["latent"] = j + 1;
    entry["r2_adj"] = hc.regressions[static_cast<std::size_t>(j)].r2_adj;
    std::vector<double> coef(
        hc.regressions[static_cast<std::size_t>(j)].coef.begin(),
        hc.regressions[static_cast<std::size_t>(j)].coef.end());
    entry["coef"] = coef;
    spanning.push_back(entry);
  }
  analysis["spanning"] = spanning;

  // explanatory-power gains per latent
  njson delta = njson::array();
  for (int j = 0; j < m_dim; ++j) {
    const Eigen::VectorXd z_col = z_series.col(j);
    const auto table = delta_r2_table(
        data.yields.topRows(last_ckpt), data.maturities, factors_aligned,
        z_col, config.horizons, config.eval_maturities, config.interpolate);
    for (const auto& cell : table) {
      njson c;
      c["latent"] = j + 1;
      c["horizon"] = cell.horizon;
      c["maturity"] = cell.maturity;
      c["r2_base_pct"] = cell.r2_base;
      c["r2_augmented_pct"] = cell.r2_augmented;
      c["delta_pct"] = cell.delta;
      c["p_value"] = cell.p_value;
      delta.push_back(c);
    }
  }
  analysis["delta_r2"] = delta;

  {
    std::ofstream csv(config.output_dir + "/hidden_component.csv");
    csv << "date";
    for (int j = 0; j < m_dim; ++j)
      csv << ",z" << (j + 1) << ",spanned" << (j + 1) << ",hidden" << (j + 1);
    csv << '\n';
    for (int s = 0; s < last_ckpt; ++s) {
      csv << ctx.panel.dates[static_cast<std::size_t>(s)];
      for (int j = 0; j < m_dim; ++j)
        csv << ',' << fmt(z_series(s, j)) << ',' << fmt(hc.spanned(s, j)) << ','
            << fmt(hc.hidden(s, j));
      csv << '\n';
    }
  }

  // macro links: hidden component regressed on one variable at a time
  if (!config.macro_csv.empty()) {
    MacroSeries macro = load_macro_csv(config.macro_csv);
    // optional sign normalisation "VAR:REF ..." pairs
    if (!config.normalize_sign_with.empty()) {
      std::stringstream ss(config.normalize_sign_with);
      std::string pair;
      while (ss >> pair) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos)
          throw ConfigError("analysis.normalize_sign_with: want VAR:REF pairs");
        const std::string var = pair.substr(0, colon);
        const std::string ref = pair.substr(colon + 1);
        const auto vi = std::find(macro.names.begin(), macro.names.end(), var);
        const auto ri = std::find(macro.names.begin(), macro.names.end(), ref);
        if (vi == macro.names.end() || ri == macro.names.end())
          throw ConfigError("analysis.normalize_sign_with: unknown series " + pair);
        const auto vc = static_cast<Eigen::Index>(vi - macro.names.begin());
        const auto rc = static_cast<Eigen::Index>(ri - macro.names.begin());
        double cov = 0.0;
        int count = 0;
        for (Eigen::Index r = 0; r < macro.values.rows(); ++r) {
          const double a = macro.values(r, vc), b = macro.values(r, rc);
          if (std::isnan(a) || std::isnan(b)) continue;
          cov += a * b;
          ++count;
        }
        if (count > 2 && cov < 0.0) macro.values.col(vc) *= -1.0;
      }
    }

    njson macro_json = njson::array();
    for (std::size_t name_idx = 0; name_idx < macro.names.size(); ++name_idx) {
      // align macro months with panel rows
      std::map<int, double> by_month;
      for (std::size_t r = 0; r < macro.month_index.size(); ++r) {
        const double v = macro.values(static_cast<Eigen::Index>(r),
                                      static_cast<Eigen::Index>(name_idx));
        if (!std::isnan(v)) by_month[macro.month_index[r]] = v;
      }
      std::vector<double> x_vals;
      std::vector<int> rows;
      for (int s = 0; s < last_ckpt; ++s) {
        const auto it = by_month.find(ctx.panel.month_index[static_cast<std::size_t>(s)]);
        if (it == by_month.end()) continue;
        rows.push_back(s);
        x_vals.push_back(it->second);
      }
      if (rows.size() < 24) continue;
      Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), 1);
      for (std::size_t k = 0; k < rows.size(); ++k) x(static_cast<Eigen::Index>(k), 0) = x_vals[k];
      for (int j = 0; j < m_dim; ++j) {
        Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k)
          y[static_cast<Eigen::Index>(k)] = hc.hidden(rows[k], j);
        const RegressionResult reg = ols(y, x, config.nw_lags);
        njson entry;
        entry["macro"] = macro.names[name_idx];
        entry["latent"] = j + 1;
        entry["r2_adj"] = reg.r2_adj;
        entry["coef"] = reg.coef[1];
        entry["nw_tstat"] = reg.nw_tstat[1];
        entry["n_obs"] = rows.size();
        macro_json.push_back(entry);
      }
    }
    analysis["macro_links"] = macro_json;
    analysis["nw_lags"] = config.nw_lags;
  }

  std::ofstream(config.output_dir + "/analysis.json") << analysis.dump(2) << '\n';
  std::cout << "analysis -> " << config.output_dir << "/analysis.json\n";
  return 0;
}

int cmd_report(const RunConfig& config) {
  njson report;
  report["schema"] = "dtsm-report-v1";
  report["config_hash"] = config.hash();
  const auto read_json = [&](const std::string& name) -> njson {
    const std::string path = config.output_dir + "/" + name;
    std::ifstream in(path);
    if (!in) return njson();
    njson j;
    in >> j;
    return j;
  };
  const njson manifest = read_json("manifest.json");
  if (!manifest.empty()) report["run"] = manifest;
  const njson forecast = read_json("forecast_summary.json");
  if (!forecast.empty()) report["statistical_performance"] = forecast;
  const njson backtest = read_json("backtest_summary.json");
  if (!backtest.empty()) report["economic_performance"] = backtest;
  const njson analysis = read_json("analysis.json");
  if (!analysis.empty()) report["latent_analysis"] = analysis;
  if (report.size() <= 2)
    throw std::runtime_error("report: no command outputs found in " +
                             config.output_dir);
  std::ofstream(config.output_dir + "/report.json") << report.dump(2) << '\n';
  std::cout << "report -> " << config.output_dir << "/report.json\n";
  return 0;
}

}  // namespace dtsm
