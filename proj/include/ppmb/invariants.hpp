#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "ppmb/config.hpp"
#include "ppmb/jc_model.hpp"

namespace ppmb {

using JcNoiseFn = std::function<void(const ModelParams&, const BasisFamily&, bool dissipative,
                                     const CVector& phi, CMatrix& out)>;

/// Replaceable kernels, so that a deliberately broken implementation can be
/// shown to fail the suites.
struct InvariantHooks {
  JcNoiseFn jc_noise = jc_noise_into;
};

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::size_t checks = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::string note;
};

struct InvariantReport {
  std::vector<SuiteResult> suites;

  bool passed() const;
  std::string to_json() const;
};

/// Runs the property suites of all modules at config.invariant_points random
/// points drawn from config.invariant_seed.
InvariantReport check_invariants(const RunConfig& config, const InvariantHooks& hooks = {});

}  // namespace ppmb
