#pragma once

#include <string>

#include "dtsm/atsm_smc.hpp"
#include "dtsm/smc.hpp"

namespace dtsm {

// Versioned binary snapshot of a particle cloud: parameters, filter states,
// log-weights, evidence trace and tempering history. Enough to resume
// assimilation without touching earlier observations.
void save_cloud(const std::string& path, const Cloud<AtsmParticle>& cloud,
                const ModelSpec& spec, std::uint64_t config_hash);

// Rebuilds the pricing/dynamics caches through the model on load. Throws on
// magic/version/shape/config mismatches.
Cloud<AtsmParticle> load_cloud(const std::string& path, const AtsmSmcModel& model,
                               std::uint64_t expected_config_hash);

// Convenience path scheme: <dir>/ckpt_t<t>.bin
std::string checkpoint_path(const std::string& dir, int t);
// Largest checkpoint index in dir, or -1.
int latest_checkpoint(const std::string& dir);

}  // namespace dtsm
