#pragma once

#include <memory>
#include <string>

#include "dtsm/checkpoint.hpp"
#include "dtsm/config.hpp"
#include "dtsm/data.hpp"
#include "dtsm/tuning.hpp"

namespace dtsm {

// Everything a command needs: the panel (annual decimals), the estimation
// bundle (monthly units, weights, factors) and the sample split.
struct RunContext {
  RunConfig config;
  YieldPanel panel;
  std::shared_ptr<EstimationData> data;
  int train_end = 0;  // row index of the last training observation
  int test_end = 0;   // row index of the last usable observation
  Eigen::VectorXd sigma_z;
  TuningRecord tuning;
  bool has_tuning = false;
  int n_threads = 1;

  std::string model_name() const { return data->spec.name(); }
  std::string checkpoints_dir() const {
    return config.output_dir + "/checkpoints";
  }
  std::string tuning_path() const { return config.output_dir + "/tuning.json"; }
};

RunContext load_context(const RunConfig& config, bool require_tuning);

int cmd_simulate(const RunConfig& config);
int cmd_tune(const RunConfig& config);
int cmd_estimate(const RunConfig& config, bool resume);
int cmd_forecast(const RunConfig& config);
int cmd_backtest(const RunConfig& config);
int cmd_analyze(const RunConfig& config);
int cmd_report(const RunConfig& config);

}  // namespace dtsm
