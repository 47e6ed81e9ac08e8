#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ppmb/cli_io.hpp"
#include "ppmb/config.hpp"
#include "ppmb/errors.hpp"
#include "ppmb/invariants.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<unsigned> workers;
  std::optional<std::string> out;

  void apply(ppmb::RunConfig& c) const {
    if (seed) c.seed = *seed;
    if (runs) c.runs = *runs;
    if (workers) c.workers = *workers;
    if (out) c.output = *out;
  }
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--runs", o.runs, "Number of SDE paths");
  cmd->add_option("--workers", o.workers, "Worker threads (0: all cores)");
  cmd->add_option("--out", o.out, "Output path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive-P simulations of a two-level atom in a cavity"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides run_over;
  auto* run_cmd = app.add_subcommand("run", "Run the configured engine and write CSV output");
  run_cmd->add_option("--config", config_path, "Configuration file")->required();
  add_overrides(run_cmd, run_over);

  std::string left, right;
  std::optional<double> tolerance;
  auto* cmp_cmd = app.add_subcommand("compare", "Per-column deviation of two CSV outputs");
  cmp_cmd->add_option("a", left, "First CSV")->required();
  cmp_cmd->add_option("b", right, "Second CSV")->required();
  cmp_cmd->add_option("--tolerance", tolerance, "Fail when any max deviation exceeds this");

  std::string inv_config;
  Overrides inv_over;
  auto* inv_cmd = app.add_subcommand("check-invariants", "Run the property suites");
  inv_cmd->add_option("--config", inv_config, "Configuration file (defaults when omitted)");
  add_overrides(inv_cmd, inv_over);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      ppmb::RunConfig config = ppmb::load_config(config_path);
      run_over.apply(config);
      ppmb::validate(config);
      return ppmb::run(config, std::cerr);
    }
    if (*cmp_cmd) {
      const auto devs =
          ppmb::compare_tables(ppmb::read_csv_file(left), ppmb::read_csv_file(right));
      bool ok = true;
      std::cout << std::left << std::setw(24) << "column" << std::setw(26) << "max_abs"
                << "rms\n";
      for (const auto& d : devs) {
        std::cout << std::setw(24) << d.name << std::setw(26) << ppmb::format_double(d.max_abs)
                  << ppmb::format_double(d.rms) << '\n';
        if (tolerance && d.max_abs > *tolerance) ok = false;
      }
      return ok ? 0 : 1;
    }
    if (*inv_cmd) {
      ppmb::RunConfig config;
      if (!inv_config.empty()) config = ppmb::load_config(inv_config);
      inv_over.apply(config);
      if (inv_over.seed) config.invariant_seed = *inv_over.seed;
      const ppmb::InvariantReport report = ppmb::check_invariants(config);
      const std::string json = report.to_json();
      if (inv_over.out) {
        std::ofstream(*inv_over.out) << json;
      } else {
        std::cout << json;
      }
      return report.passed() ? 0 : 1;
    }
  } catch (const ppmb::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
