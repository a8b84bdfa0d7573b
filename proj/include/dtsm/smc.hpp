#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>
#include <Eigen/Dense>

#include "dtsm/math.hpp"
#include "dtsm/rng.hpp"

namespace dtsm {

struct SmcConfig {
  int n_particles = 2000;
  double ess_trigger_frac = 0.7;
  int jitter_sweeps = 5;
  double bisect_tol_frac = 1e-3;  // of n_particles
  int bisect_max_iter = 60;
  double forced_min_step = 1e-3;  // when no tempering step can reach the trigger
  bool systematic_resampling = false;
  double quarantine_abort_frac = 0.01;
  std::uint64_t master_seed = 1;
  int n_threads = 0;  // 0 = hardware concurrency
};

// Effective sample size of natural-scale weights.
inline double ess(const Eigen::VectorXd& weights) {
  const double s1 = pairwise_sum(weights);
  if (!(s1 > 0.0)) throw std::invalid_argument("ess: weights sum to zero");
  Eigen::VectorXd sq = weights.array().square();
  return s1 * s1 / pairwise_sum(sq);
}

// Deterministic chunked parallel-for; chunk boundaries depend only on n and
// the thread count, and workers never share mutable state.
inline void parallel_for(int n, int n_threads,
                         const std::function<void(int)>& body) {
  int workers = n_threads > 0
                    ? n_threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  workers = std::min(workers, n);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

// Multinomial ancestor draws: inverse-CDF lookups of iid uniforms.
std::vector<int> multinomial_ancestors(const Eigen::VectorXd& weights, int n,
                                       Rng& rng);
// Systematic variant: one uniform, stratified positions.
std::vector<int> systematic_ancestors(const Eigen::VectorXd& weights, int n,
                                      Rng& rng);

struct TemperStage {
  double phi = 0.0;
  double ess_before = 0.0;
};

struct TemperEvent {
  int t = 0;
  std::vector<TemperStage> stages;
};

struct AssimilationReport {
  int t = 0;
  double log_m = 0.0;
  double ess_after_reweight = 0.0;
  bool tempered = false;
  int quarantined = 0;
  std::string first_error;
};

template <class Particle>
struct Cloud {
  std::vector<Particle> particles;
  Eigen::VectorXd log_weights;
  int t = 0;
  double log_evidence = 0.0;
  std::vector<double> log_m_history;      // first entry corresponds to t0 + 1
  std::vector<TemperEvent> temper_events;
  std::uint64_t master_seed = 1;

  int size() const { return static_cast<int>(particles.size()); }
  Eigen::VectorXd normalized() const { return normalized_weights(log_weights); }
};

template <class Particle>
Cloud<Particle> init_cloud(int n_particles, std::uint64_t master_seed,
                           const std::function<Particle(int, Rng&)>& make) {
  if (n_particles < 2) throw std::invalid_argument("init_cloud: need >= 2 particles");
  Cloud<Particle> cloud;
  cloud.master_seed = master_seed;
  cloud.particles.reserve(static_cast<std::size_t>(n_particles));
  for (int i = 0; i < n_particles; ++i) {
    Rng rng(stream_seed(master_seed, 0x696e6974ULL, static_cast<std::uint64_t>(i)));
    cloud.particles.push_back(make(i, rng));
  }
  cloud.log_weights = Eigen::VectorXd::Zero(n_particles);
  return cloud;
}

namespace detail {

template <class Particle>
void apply_ancestors(std::vector<Particle>& particles,
                     const std::vector<int>& ancestors) {
  std::vector<Particle> next;
  next.reserve(particles.size());
  for (int a : ancestors) next.push_back(particles[static_cast<std::size_t>(a)]);
  particles = std::move(next);
}

}  // namespace detail

// Model concept:
//   using Particle = ...;
//   void stage(Particle&, int t) const;            // compute pending increment; may throw
//   double staged_log_u(const Particle&) const;
//   void commit(Particle&, int t) const;           // adopt the staged filter state
//   using Proposals = ...;
//   Proposals make_proposals(const std::vector<Particle>&, const Eigen::VectorXd& w) const;
//   void jitter(Particle&, int t, double phi, const Proposals&, Rng&) const;
//
// Absorbs observation cloud.t + 1. Weighted reweighting, evidence recording,
// and when the ESS trigger fires, the staged tempering loop: reweight by a
// partial power of the increment, resample, jitter with MCMC sweeps at the
// tempered target, recompute increments, repeat until the full increment is on.
template <class Model>
AssimilationReport smc_assimilate(const Model& model,
                                  Cloud<typename Model::Particle>& cloud,
                                  const SmcConfig& cfg) {
  using Particle [[maybe_unused]] = typename Model::Particle;
  const int n = cloud.size();
  const int t = cloud.t + 1;
  const double trigger = cfg.ess_trigger_frac * static_cast<double>(n);

  AssimilationReport report;
  report.t = t;

  Eigen::VectorXd log_u(n);
  std::vector<std::string> errors(static_cast<std::size_t>(n));
  auto stage_all = [&] {
    std::atomic<int> bad{0};
    parallel_for(n, cfg.n_threads, [&](int i) {
      try {
        model.stage(cloud.particles[static_cast<std::size_t>(i)], t);
        log_u[i] = model.staged_log_u(cloud.particles[static_cast<std::size_t>(i)]);
        if (!std::isfinite(log_u[i]) && log_u[i] != kNegInf)
          throw std::runtime_error("non-finite increment");
      } catch (const std::exception& e) {
        log_u[i] = kNegInf;
        errors[static_cast<std::size_t>(i)] = e.what();
        bad.fetch_add(1);
      }
    });
    return bad.load();
  };

  int quarantined = stage_all();
  report.quarantined = quarantined;
  for (const auto& msg : errors)
    if (!msg.empty()) { report.first_error = msg; break; }
  if (quarantined > cfg.quarantine_abort_frac * n)
    throw std::runtime_error("smc_assimilate: " + std::to_string(quarantined) +
                             " of " + std::to_string(n) +
                             " particles failed at t=" + std::to_string(t) +
                             " (" + report.first_error + ")");

  // evidence increment from the pre-tempering weights
  Eigen::VectorXd log_w_inc = cloud.log_weights + log_u;
  report.log_m = log_sum_exp(log_w_inc) - log_sum_exp(cloud.log_weights);
  cloud.log_m_history.push_back(report.log_m);
  cloud.log_evidence += report.log_m;

  report.ess_after_reweight = ess_from_log_weights(log_w_inc);
  if (report.ess_after_reweight >= trigger) {
    parallel_for(n, cfg.n_threads, [&](int i) {
      if (log_u[i] != kNegInf)
        model.commit(cloud.particles[static_cast<std::size_t>(i)], t);
    });
    cloud.log_weights = log_w_inc;
    cloud.t = t;
    return report;
  }

  // adaptive tempering
  report.tempered = true;
  TemperEvent event;
  event.t = t;
  Eigen::VectorXd log_w_base = cloud.log_weights;
  double phi_prev = 0.0;
  int stage_id = 0;
  while (true) {
    // 0 * (-inf) would poison the reweighting, so dead particles stay -inf
    const auto tempered_logw = [&](double x) {
      Eigen::VectorXd lw(n);
      const double step = x - phi_prev;
      for (int i = 0; i < n; ++i)
        lw[i] = (log_u[i] == kNegInf || log_w_base[i] == kNegInf)
                    ? kNegInf
                    : log_w_base[i] + step * log_u[i];
      return lw;
    };
    const auto ess_at = [&](double x) {
      return ess_from_log_weights(tempered_logw(x));
    };
    double phi;
    if (ess_at(1.0) >= trigger) {
      phi = 1.0;
    } else if (ess_at(phi_prev) < trigger) {
      // even a zero-width step is degenerate; force minimal progress
      phi = std::min(1.0, phi_prev + cfg.forced_min_step);
    } else {
      double lo = phi_prev, hi = 1.0;
      for (int it = 0; it < cfg.bisect_max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double e = ess_at(mid);
        if (std::abs(e - trigger) <= cfg.bisect_tol_frac * n) { lo = hi = mid; break; }
        if (e > trigger) lo = mid; else hi = mid;
      }
      phi = lo;
    }

    cloud.log_weights = tempered_logw(phi);
    event.stages.push_back({phi, ess_from_log_weights(cloud.log_weights)});

    Rng resample_rng(stream_seed(cloud.master_seed, 0x7265736dULL,
                                 static_cast<std::uint64_t>(t),
                                 static_cast<std::uint64_t>(stage_id)));
    const Eigen::VectorXd w = cloud.normalized();
    const std::vector<int> ancestors =
        cfg.systematic_resampling ? systematic_ancestors(w, n, resample_rng)
                                  : multinomial_ancestors(w, n, resample_rng);
    detail::apply_ancestors(cloud.particles, ancestors);
    cloud.log_weights.setZero();

    const auto proposals =
        model.make_proposals(cloud.particles, Eigen::VectorXd::Ones(n));
    std::atomic<int> jitter_bad{0};
    parallel_for(n, cfg.n_threads, [&](int i) {
      Rng rng(stream_seed(cloud.master_seed, 0x6a697474ULL,
                          static_cast<std::uint64_t>(t),
                          static_cast<std::uint64_t>(stage_id),
                          static_cast<std::uint64_t>(i)));
      try {
        model.jitter(cloud.particles[static_cast<std::size_t>(i)], t, phi,
                     proposals, rng);
      } catch (const std::exception& e) {
        cloud.log_weights[i] = kNegInf;
        errors[static_cast<std::size_t>(i)] = e.what();
        jitter_bad.fetch_add(1);
      }
    });
    if (jitter_bad.load() > cfg.quarantine_abort_frac * n)
      throw std::runtime_error("smc_assimilate: jittering failed for " +
                               std::to_string(jitter_bad.load()) + " particles");

    if (phi >= 1.0) {
      parallel_for(n, cfg.n_threads, [&](int i) {
        if (cloud.log_weights[i] == kNegInf) return;
        try {
          model.stage(cloud.particles[static_cast<std::size_t>(i)], t);
          model.commit(cloud.particles[static_cast<std::size_t>(i)], t);
        } catch (const std::exception& e) {
          cloud.log_weights[i] = kNegInf;
          errors[static_cast<std::size_t>(i)] = e.what();
        }
      });
      break;
    }
    quarantined = stage_all();
    log_w_base = cloud.log_weights;
    phi_prev = phi;
    ++stage_id;
  }
  cloud.t = t;
  cloud.temper_events.push_back(std::move(event));
  return report;
}

}  // namespace dtsm
