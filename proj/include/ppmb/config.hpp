#pragma once

#include <cstddef>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ppmb/basis_family.hpp"
#include "ppmb/fermionic_init.hpp"
#include "ppmb/model_params.hpp"
#include "ppmb/sde_core.hpp"
#include "ppmb/types.hpp"

namespace ppmb {

enum class Engine { SdeJc, SdeMbExperimental, Reference, Mb };

Engine parse_engine(const std::string& name);
std::string engine_name(Engine engine);

/// Thermal atom (beta set) or explicit populations.
struct AtomSpec {
  std::optional<double> beta;  // inverse temperature in 1/energy units
  double rho11 = 1.0 / (1.0 + std::exp(-1.0));
  Complex rho12{0.0, 0.0};

  bool operator==(const AtomSpec&) const = default;
};

struct RunConfig {
  Engine engine = Engine::SdeJc;
  bool experimental = false;
  std::size_t runs = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  double divergence_threshold = kDefaultDivergenceThreshold;
  std::vector<std::string> observables{"rho_11", "rho_22", "rho_21", "rho_12", "nu"};
  std::vector<double> probes;
  std::string output = "ppmb_out.csv";

  ModelSpec model;
  FamilyKind family = FamilyKind::AdditiveNoise;
  Complex delta{4.0, 0.0};
  Complex kappa{0.0, 0.0};
  TimeGrid grid;
  AtomSpec atom;
  std::vector<Complex> amplitudes{Complex(0.0, 0.0)};

  int n_max = 60;
  std::size_t dimension_cap = 4096;

  std::size_t invariant_points = 100;
  std::uint64_t invariant_seed = 12345;

  bool operator==(const RunConfig&) const = default;

  BasisFamily basis() const;
  AtomicDensity atomic_density() const;
};

/// Parses sectioned key = value text. Unknown sections or keys, malformed
/// values and violated constraints raise ConfigError (with the line number
/// when one applies). Environment variables PPMB_<SECTION>_<KEY> override the
/// file before validation.
RunConfig parse_config(const std::string& text, bool use_environment = true);

RunConfig load_config(const std::string& path, bool use_environment = true);

/// Throws ConfigError naming the first violated cross-field constraint.
void validate(const RunConfig& config);

/// Canonical text form; parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& config);

/// FNV-1a 64-bit hash, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);
std::string format_complex(Complex x);

}  // namespace ppmb
