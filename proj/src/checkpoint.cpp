#include "dtsm/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

namespace dtsm {
namespace {

constexpr char kMagic[8] = {'D', 'T', 'S', 'M', 'C', 'L', 'D', '1'};
constexpr std::uint32_t kVersion = 1;

struct Writer {
  std::ofstream out;
  explicit Writer(const std::string& path)
      : out(path, std::ios::binary | std::ios::trunc) {
    if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  }
  void raw(const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void i32(std::int32_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void vec(const Eigen::VectorXd& v) {
    raw(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
  }
  void mat(const Eigen::MatrixXd& m) {
    raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  }
};

struct Reader {
  std::ifstream in;
  std::string path;
  explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw std::runtime_error("checkpoint: cannot open " + p);
  }
  void raw(void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("checkpoint: truncated file " + path);
  }
  std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
  std::uint64_t u64() { std::uint64_t v; raw(&v, sizeof v); return v; }
  std::int32_t i32() { std::int32_t v; raw(&v, sizeof v); return v; }
  double f64() { double v; raw(&v, sizeof v); return v; }
  Eigen::VectorXd vec(Eigen::Index n) {
    Eigen::VectorXd v(n);
    raw(v.data(), sizeof(double) * static_cast<std::size_t>(n));
    return v;
  }
  Eigen::MatrixXd mat(Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    raw(m.data(), sizeof(double) * static_cast<std::size_t>(r * c));
    return m;
  }
};

}  // namespace

void save_cloud(const std::string& path, const Cloud<AtsmParticle>& cloud,
                const ModelSpec& spec, std::uint64_t config_hash) {
  Writer w(path);
  w.raw(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.u64(config_hash);
  w.u64(cloud.master_seed);
  w.i32(cloud.t);
  w.i32(cloud.size());
  w.i32(spec.n_factors);
  w.i32(spec.latent_dim());
  w.i32(spec.restriction == RiskPriceRestriction::kMaxFlex ? 1 : 0);

  for (const auto& p : cloud.particles) {
    w.f64(p.theta.sigma_e2);
    w.f64(p.theta.k_inf_q);
    w.vec(p.theta.g_q);
    for (Eigen::Index i = 0; i < p.theta.sigma_p.rows(); ++i)
      for (Eigen::Index j = 0; j <= i; ++j) w.f64(p.theta.sigma_p(i, j));
    w.vec(p.theta.phi_z);
    w.vec(p.theta.lambda0);
    w.mat(p.theta.lambda1);
    w.vec(p.state.a_filt);
    w.mat(p.state.p_filt);
    w.i32(p.state.t);
  }
  w.vec(cloud.log_weights);
  w.f64(cloud.log_evidence);
  w.u32(static_cast<std::uint32_t>(cloud.log_m_history.size()));
  for (double v : cloud.log_m_history) w.f64(v);
  w.u32(static_cast<std::uint32_t>(cloud.temper_events.size()));
  for (const auto& event : cloud.temper_events) {
    w.i32(event.t);
    w.u32(static_cast<std::uint32_t>(event.stages.size()));
    for (const auto& stage : event.stages) {
      w.f64(stage.phi);
      w.f64(stage.ess_before);
    }
  }
  if (!w.out) throw std::runtime_error("checkpoint: write failed " + path);
}

Cloud<AtsmParticle> load_cloud(const std::string& path, const AtsmSmcModel& model,
                               std::uint64_t expected_config_hash) {
  Reader r(path);
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  if (r.u32() != kVersion)
    throw std::runtime_error("checkpoint: unsupported version in " + path);
  const std::uint64_t config_hash = r.u64();
  if (config_hash != expected_config_hash)
    throw std::runtime_error(
        "checkpoint: config hash mismatch (checkpoint belongs to a different run): " +
        path);

  const ModelSpec& spec = model.data().spec;
  Cloud<AtsmParticle> cloud;
  cloud.master_seed = r.u64();
  cloud.t = r.i32();
  const int n = r.i32();
  const int r_dim = r.i32();
  const int m_dim = r.i32();
  const int maxflex = r.i32();
  if (r_dim != spec.n_factors || m_dim != spec.latent_dim() ||
      maxflex != (spec.restriction == RiskPriceRestriction::kMaxFlex ? 1 : 0))
    throw std::runtime_error("checkpoint: model shape mismatch in " + path);

  cloud.particles.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    AtsmParticle p;
    p.theta = Theta::zero(spec);
    p.theta.sigma_e2 = r.f64();
    p.theta.k_inf_q = r.f64();
    p.theta.g_q = r.vec(r_dim);
    for (Eigen::Index a = 0; a < r_dim; ++a)
      for (Eigen::Index b = 0; b <= a; ++b) p.theta.sigma_p(a, b) = r.f64();
    p.theta.phi_z = r.vec(m_dim);
    p.theta.lambda0 = r.vec(r_dim);
    p.theta.lambda1 = r.mat(r_dim, r_dim);
    p.state.a_filt = r.vec(m_dim);
    p.state.p_filt = r.mat(m_dim, m_dim);
    p.state.t = r.i32();
    p.parts = std::make_shared<const ModelParts>(
        assemble_model(p.theta, model.sigma_z(), model.data()));
    cloud.particles.push_back(std::move(p));
  }
  cloud.log_weights = r.vec(n);
  cloud.log_evidence = r.f64();
  const std::uint32_t n_logm = r.u32();
  cloud.log_m_history.resize(n_logm);
  for (auto& v : cloud.log_m_history) v = r.f64();
  const std::uint32_t n_events = r.u32();
  cloud.temper_events.resize(n_events);
  for (auto& event : cloud.temper_events) {
    event.t = r.i32();
    const std::uint32_t n_stages = r.u32();
    event.stages.resize(n_stages);
    for (auto& stage : event.stages) {
      stage.phi = r.f64();
      stage.ess_before = r.f64();
    }
  }
  return cloud;
}

std::string checkpoint_path(const std::string& dir, int t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ckpt_t%05d.bin", t);
  return dir + "/" + buf;
}

int latest_checkpoint(const std::string& dir) {
  namespace fs = std::filesystem;
  int best = -1;
  if (!fs::exists(dir)) return best;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    int t = -1;
    if (std::sscanf(name.c_str(), "ckpt_t%d.bin", &t) == 1 && t > best) best = t;
  }
  return best;
}

}  // namespace dtsm
