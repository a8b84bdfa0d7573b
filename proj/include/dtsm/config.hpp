#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dtsm/portfolio.hpp"
#include "dtsm/types.hpp"

namespace dtsm {

// Raised on malformed configuration; the driver maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Run settings parsed from a sectioned key = value file.
struct RunConfig {
  // [model]
  int n_factors = 3;
  std::string latent_mask = "000";
  std::string restriction = "lambda12";  // lambda12 | maxflex

  // [data]
  std::string yields_csv;
  std::string weights_mode = "pca";  // pca | file
  std::string weights_csv;
  std::string train_end = "2007-12";
  std::string test_end;  // empty: use the full panel
  std::optional<bool> percent_override;

  // [smc]
  int n_particles = 2000;
  double ess_trigger = 0.7;
  int jitter_sweeps = 5;
  bool systematic_resampling = false;
  int warm_mcmc_burn = 2000;
  int warm_mcmc_thin = 2;

  // [forecast]
  std::vector<int> eval_maturities{24, 36, 48, 60, 84, 120};
  std::vector<int> horizons{1};
  bool interpolate = false;

  // [portfolio]
  double gamma = 5.0;
  std::vector<std::string> scenarios{"bounded:-1:2", "bounded:-1:5", "unbounded"};
  std::string eh_weight_mode = "empirical";  // empirical | point
  std::string benchmark_run;                 // output dir of a reference model run

  // [analysis]
  int nw_lags = 12;
  std::string macro_csv;
  std::string normalize_sign_with;

  // [simulate]
  int sim_length = 408;
  std::string sim_start = "1985-01";
  double sim_sigma_z = 1e-4;
  double sim_phi_z = 0.9;
  double sim_lambda12 = 0.08;

  // [run]
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  int checkpoint_every = 1;
  int threads = 0;  // 0: DTSM_THREADS env or hardware

  static RunConfig load(const std::string& path);

  ModelSpec model_spec(const std::vector<int>& maturities) const;
  std::vector<AllocationScenario> allocation_scenarios() const;

  // stable printable form; its FNV-1a hash keys manifests and resumability
  std::string canonical_text() const;
  std::uint64_t hash() const;
};

}  // namespace dtsm
