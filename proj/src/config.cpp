#include "dtsm/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace dtsm {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<int> parse_int_list(const std::string& text, const std::string& where) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ' ')) {
    item = trim(item);
    if (item.empty()) continue;
    int v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size())
      throw ConfigError(where + ": bad integer '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(where + ": empty list");
  return out;
}

std::vector<std::string> parse_str_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ' ')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);

  RunConfig cfg;
  std::string section = "run";
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where =
        path + ":" + std::to_string(line_no);
    std::string text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(where + ": unclosed section");
      section = trim(text.substr(1, text.size() - 2));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key = value");
    const std::string key = section + "." + trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));

    auto as_int = [&] {
      int v = 0;
      const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
      if (res.ec != std::errc() || res.ptr != value.data() + value.size())
        throw ConfigError(where + ": bad integer '" + value + "'");
      return v;
    };
    auto as_double = [&] {
      try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
      } catch (const std::exception&) {
        throw ConfigError(where + ": bad number '" + value + "'");
      }
    };
    auto as_bool = [&] {
      if (value == "true" || value == "1") return true;
      if (value == "false" || value == "0") return false;
      throw ConfigError(where + ": bad boolean '" + value + "'");
    };

    if (key == "model.n_factors") cfg.n_factors = as_int();
    else if (key == "model.latent_mask") cfg.latent_mask = value;
    else if (key == "model.restriction") cfg.restriction = value;
    else if (key == "data.yields_csv") cfg.yields_csv = value;
    else if (key == "data.weights_mode") cfg.weights_mode = value;
    else if (key == "data.weights_csv") cfg.weights_csv = value;
    else if (key == "data.train_end") cfg.train_end = value;
    else if (key == "data.test_end") cfg.test_end = value;
    else if (key == "data.percent") cfg.percent_override = as_bool();
    else if (key == "smc.n_particles") cfg.n_particles = as_int();
    else if (key == "smc.ess_trigger") cfg.ess_trigger = as_double();
    else if (key == "smc.jitter_sweeps") cfg.jitter_sweeps = as_int();
    else if (key == "smc.systematic_resampling") cfg.systematic_resampling = as_bool();
    else if (key == "smc.warm_mcmc_burn") cfg.warm_mcmc_burn = as_int();
    else if (key == "smc.warm_mcmc_thin") cfg.warm_mcmc_thin = as_int();
    else if (key == "forecast.maturities")
      cfg.eval_maturities = parse_int_list(value, where);
    else if (key == "forecast.horizons") cfg.horizons = parse_int_list(value, where);
    else if (key == "forecast.interpolate") cfg.interpolate = as_bool();
    else if (key == "portfolio.gamma") cfg.gamma = as_double();
    else if (key == "portfolio.scenarios") cfg.scenarios = parse_str_list(value);
    else if (key == "portfolio.eh_weight_mode") cfg.eh_weight_mode = value;
    else if (key == "portfolio.benchmark_run") cfg.benchmark_run = value;
    else if (key == "analysis.nw_lags") cfg.nw_lags = as_int();
    else if (key == "analysis.macro_csv") cfg.macro_csv = value;
    else if (key == "analysis.normalize_sign_with") cfg.normalize_sign_with = value;
    else if (key == "simulate.length") cfg.sim_length = as_int();
    else if (key == "simulate.start") cfg.sim_start = value;
    else if (key == "simulate.sigma_z") cfg.sim_sigma_z = as_double();
    else if (key == "simulate.phi_z") cfg.sim_phi_z = as_double();
    else if (key == "simulate.lambda12") cfg.sim_lambda12 = as_double();
    else if (key == "run.seed") cfg.seed = static_cast<std::uint64_t>(as_int());
    else if (key == "run.output_dir") cfg.output_dir = value;
    else if (key == "run.checkpoint_every") cfg.checkpoint_every = as_int();
    else if (key == "run.threads") cfg.threads = as_int();
    else throw ConfigError(where + ": unknown key '" + key + "'");
  }

  if (cfg.n_factors < 1) throw ConfigError(path + ": model.n_factors >= 1");
  if (static_cast<int>(cfg.latent_mask.size()) != cfg.n_factors)
    throw ConfigError(path + ": model.latent_mask length must equal n_factors");
  for (char c : cfg.latent_mask)
    if (c != '0' && c != '1')
      throw ConfigError(path + ": model.latent_mask must be 0/1 characters");
  if (cfg.restriction != "lambda12" && cfg.restriction != "maxflex")
    throw ConfigError(path + ": model.restriction must be lambda12 or maxflex");
  if (cfg.weights_mode != "pca" && cfg.weights_mode != "file")
    throw ConfigError(path + ": data.weights_mode must be pca or file");
  if (cfg.n_particles < 2) throw ConfigError(path + ": smc.n_particles >= 2");
  if (!(cfg.ess_trigger > 0.0 && cfg.ess_trigger < 1.0))
    throw ConfigError(path + ": smc.ess_trigger in (0,1)");
  if (!(cfg.gamma > 1.0)) throw ConfigError(path + ": portfolio.gamma > 1");
  if (cfg.eh_weight_mode != "empirical" && cfg.eh_weight_mode != "point")
    throw ConfigError(path + ": portfolio.eh_weight_mode must be empirical or point");
  if (cfg.checkpoint_every < 1) throw ConfigError(path + ": run.checkpoint_every >= 1");
  return cfg;
}

ModelSpec RunConfig::model_spec(const std::vector<int>& maturities) const {
  ModelSpec spec;
  spec.n_factors = n_factors;
  spec.latent_mask.clear();
  for (char c : latent_mask) spec.latent_mask.push_back(c == '1');
  spec.maturities = maturities;
  spec.restriction = restriction == "maxflex"
                         ? RiskPriceRestriction::kMaxFlex
                         : RiskPriceRestriction::kLambda12Only;
  spec.validate();
  return spec;
}

std::vector<AllocationScenario> RunConfig::allocation_scenarios() const {
  std::vector<AllocationScenario> out;
  for (const auto& text : scenarios) {
    if (text == "unbounded") {
      out.push_back(AllocationScenario::unrestricted(gamma));
      continue;
    }
    if (text.rfind("bounded:", 0) == 0) {
      const auto rest = text.substr(8);
      const auto colon = rest.find(':');
      if (colon != std::string::npos) {
        try {
          const double lo = std::stod(rest.substr(0, colon));
          const double hi = std::stod(rest.substr(colon + 1));
          out.push_back(AllocationScenario::bounded(lo, hi, gamma));
          continue;
        } catch (const std::exception&) {
        }
      }
    }
    throw ConfigError("portfolio.scenarios: bad entry '" + text +
                      "' (want bounded:<lo>:<hi> or unbounded)");
  }
  return out;
}

std::string RunConfig::canonical_text() const {
  std::ostringstream os;
  os << "model " << n_factors << ' ' << latent_mask << ' ' << restriction
     << "\ndata " << yields_csv << ' ' << weights_mode << ' ' << weights_csv
     << ' ' << train_end << ' ' << test_end << ' '
     << (percent_override ? (*percent_override ? "pct" : "dec") : "auto")
     << "\nsmc " << n_particles << ' ' << ess_trigger << ' ' << jitter_sweeps
     << ' ' << systematic_resampling << ' ' << warm_mcmc_burn << ' '
     << warm_mcmc_thin << "\nseed " << seed << "\n";
  return os.str();
}

std::uint64_t RunConfig::hash() const {
  const std::string text = canonical_text();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace dtsm
