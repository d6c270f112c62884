#pragma once

// JSON run configuration. Single file, schema-checked: unknown keys are
// rejected and numeric ranges are validated at parse time. Flags override
// config values; the CTSIM_SEED environment variable overrides the seed.

#include <optional>
#include <string>

#include "ctsim/inference.hpp"
#include "ctsim/mc.hpp"
#include "ctsim/model.hpp"

namespace ctsim::io {

struct RunConfig {
  BehaviorParams bp{0.5, 1.0};
  ProcessParams proc{1.0, 0.0};
  PriorSpec priors{0.5, 0.2, 0.5, 0.2};
  mc::Mode mode = mc::Mode::LinearGaussian;
  std::uint64_t replications = 100000;
  std::uint64_t agents = 1000;
  double t = 1.0;
  std::uint64_t seed = 20240817;
  int threads = 1;
  mc::Backend backend = mc::Backend::Auto;
  mc::CompareGrid grid{{0.25, 0.5, 0.9}, {0.5, 0.75, 1.0}, {0.2, 0.5, 0.9}};
  inference::ClassificationThresholds pipeline{};
  std::string out;

  mc::McConfig mc_config() const {
    return mc::McConfig{mode, replications, agents, t,       seed,
                        bp,   proc,         priors, backend, threads};
  }
};

RunConfig load_config(const std::string& path);

// Applies the CTSIM_SEED override, if set.
void apply_env_seed(RunConfig& cfg);

}  // namespace ctsim::io
