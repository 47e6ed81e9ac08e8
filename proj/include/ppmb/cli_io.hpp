#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "ppmb/config.hpp"
#include "ppmb/sde_core.hpp"

namespace ppmb {

/// Engine output on the time grid, one complex series per observable.
struct ResultTable {
  std::vector<double> t;
  std::vector<std::string> names;
  std::vector<std::vector<Complex>> values;  // [observable][time]
  bool stochastic = false;
  std::vector<std::vector<double>> stderr;  // stochastic engines only
  std::size_t runs_requested = 0;
  std::size_t runs_diverged = 0;
  std::vector<std::size_t> diverged_paths;
  std::vector<std::string> warnings;

  std::size_t index_of(const std::string& name) const;
};

/// Initial positive-P point for path seed: three-point atom distribution and
/// coherent field states alpha_n = a_n, beta_n = conj(a_n).
InitSampler jc_init_sampler(const RunConfig& config);

/// Post-hoc projections for the sde-jc engine, including the E_k/H_k probes.
std::vector<NamedObservable> jc_observables(const RunConfig& config);

ResultTable run_engine(const RunConfig& config);

/// Header t, then real_<name>, imag_<name> (and stderr_<name> for stochastic
/// engines) per observable; shortest round-trip decimal numbers.
void write_csv(const ResultTable& table, std::ostream& out);

std::string metadata_json(const RunConfig& config, const ResultTable& table);

/// Runs the engine, writes the CSV to config.output and <output>.meta.json.
/// Returns the process exit status.
int run(const RunConfig& config, std::ostream& log);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

struct ColumnDeviation {
  std::string name;
  double max_abs = 0.0;
  double rms = 0.0;
};

/// Deviation per column present in both tables (except t). Requires equal
/// row counts.
std::vector<ColumnDeviation> compare_tables(const CsvTable& a, const CsvTable& b);

}  // namespace ppmb
