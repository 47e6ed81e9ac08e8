#include "ppmb/cli_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "ppmb/changed_vars.hpp"
#include "ppmb/errors.hpp"
#include "ppmb/fermionic_init.hpp"
#include "ppmb/jc_model.hpp"
#include "ppmb/mb_semiclassical.hpp"
#include "ppmb/observables.hpp"
#include "ppmb/reference_sim.hpp"

namespace ppmb {

std::size_t ResultTable::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw DomainError("no column '" + name + "' in result table");
}

namespace {

bool is_probe(const std::string& name) {
  return name.size() > 2 && (name.starts_with("E_") || name.starts_with("H_"));
}

std::size_t probe_index(const std::string& name) { return std::stoul(name.substr(2)) - 1; }

// Value of a named observable from the physical-variable view of a state.
Complex from_physical_view(const ModelParams& params, const std::vector<double>& probes,
                           const std::string& name, Complex rho21, Complex rho12, Complex nu,
                           const std::vector<Complex>& e, const std::vector<Complex>& h) {
  if (name == "rho_11") return 0.5 * (1.0 - nu);
  if (name == "rho_22") return 0.5 * (1.0 + nu);
  if (name == "rho_21") return rho21;
  if (name == "rho_12") return rho12;
  if (name == "nu") return nu;
  if (is_probe(name)) {
    PhysState phys(params.mode_count());
    for (int n = 0; n < params.mode_count(); ++n) {
      phys.epsilon(n) = e[n];
      phys.eta(n) = h[n];
    }
    const FieldSample f = reconstruct_fields(params, phys, probes.at(probe_index(name)));
    return name[0] == 'E' ? f.E : f.H;
  }
  const int n = std::stoi(name.substr(2)) - 1;
  return name[0] == 'e' ? e.at(n) : h.at(n);
}

ResultTable from_sets(const RunConfig& config, const TimeGrid& grid,
                      const std::vector<ObservableSet>& points) {
  const ModelParams params(config.model);
  ResultTable table;
  table.names = config.observables;
  for (std::size_t i = 0; i < grid.points(); ++i) table.t.push_back(grid.time(i));
  table.values.assign(table.names.size(), {});
  for (std::size_t k = 0; k < table.names.size(); ++k) {
    for (const auto& o : points) {
      table.values[k].push_back(from_physical_view(params, config.probes, table.names[k],
                                                   o.rho21, o.rho12, o.nu, o.e, o.h));
    }
  }
  return table;
}

ResultTable from_ensemble(const EnsembleResult& r) {
  ResultTable table;
  table.names = r.names;
  for (std::size_t i = 0; i < r.grid.points(); ++i) table.t.push_back(r.grid.time(i));
  table.values = r.mean;
  table.stochastic = true;
  table.stderr.resize(r.names.size());
  for (std::size_t k = 0; k < r.names.size(); ++k) {
    for (std::size_t i = 0; i < r.grid.points(); ++i) table.stderr[k].push_back(r.stderr(k, i));
  }
  table.runs_requested = r.runs_requested;
  table.runs_diverged = r.runs_diverged;
  table.diverged_paths = r.diverged_paths;
  return table;
}

EnsembleOptions ensemble_options(const RunConfig& config) {
  EnsembleOptions opt;
  opt.workers = config.workers;
  opt.divergence_threshold = config.divergence_threshold;
  return opt;
}

std::vector<NamedObservable> changed_var_observables(const RunConfig& config) {
  const ModelParams params(config.model);
  const int N = params.mode_count();
  std::vector<NamedObservable> out;
  for (const auto& name : config.observables) {
    out.push_back({name, [params, N, name, probes = config.probes](const CVector& x) {
                     std::vector<Complex> e(N), h(N);
                     for (int n = 0; n < N; ++n) {
                       e[n] = x[2 * n];
                       h[n] = x[2 * n + 1];
                     }
                     return from_physical_view(params, probes, name, x[2 * N], x[2 * N + 1],
                                               x[2 * N + 2], e, h);
                   }});
  }
  return out;
}

}  // namespace

InitSampler jc_init_sampler(const RunConfig& config) {
  const BasisFamily family = config.basis();
  const InitDistribution dist = init_points(config.atomic_density(), family);
  const std::vector<Complex> amps = config.amplitudes;
  return [dist, amps](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const InitPoint& p = dist.points[dist.pick(uniform(rng))];
    PhaseState s(static_cast<int>(amps.size()));
    for (std::size_t n = 0; n < amps.size(); ++n) {
      s.alpha(static_cast<int>(n)) = amps[n];
      s.beta(static_cast<int>(n)) = std::conj(amps[n]);
    }
    s.z() = p.z;
    s.w() = p.w;
    return s.vector();
  };
}

std::vector<NamedObservable> jc_observables(const RunConfig& config) {
  const ModelParams params(config.model);
  const BasisFamily family = config.basis();
  const int N = params.mode_count();
  std::vector<NamedObservable> out;
  for (const auto& name : config.observables) {
    if (is_probe(name)) {
      const double x = config.probes.at(probe_index(name));
      const bool electric = name[0] == 'E';
      out.push_back({name, [params, N, x, electric](const CVector& s) {
                       PhysState phys(N);
                       for (int n = 0; n < N; ++n) {
                         phys.epsilon(n) = s[2 * n + 1] + s[2 * n];
                         phys.eta(n) = kI * (s[2 * n + 1] - s[2 * n]);
                       }
                       const FieldSample f = reconstruct_fields(params, phys, x);
                       return electric ? f.E : f.H;
                     }});
      continue;
    }
    out.push_back(phase_space_observable(family, N, name));
  }
  return out;
}

ResultTable run_engine(const RunConfig& config) {
  validate(config);
  const ModelParams params(config.model);
  switch (config.engine) {
    case Engine::SdeJc: {
      const SdeSystem sys = make_jc_system(params, config.basis(), params.rates().any());
      const EnsembleResult r = run_ensemble(sys, jc_init_sampler(config), config.grid, config.runs,
                                            config.seed, jc_observables(config),
                                            ensemble_options(config));
      return from_ensemble(r);
    }
    case Engine::SdeMbExperimental: {
      const BasisFamily family = config.basis();
      const SdeSystem sys = make_changed_var_system(params, family);
      const InitSampler phase = jc_init_sampler(config);
      const InitSampler sampler = [phase, family](std::uint64_t seed) {
        return to_physical(family, PhaseState(phase(seed))).vector();
      };
      const EnsembleResult r =
          run_ensemble(sys, sampler, config.grid, config.runs, config.seed,
                       changed_var_observables(config), ensemble_options(config));
      ResultTable table = from_ensemble(r);
      table.warnings.push_back("changed-variable SDE is experimental; its noise is numerically "
                               "unstable near nu = 1");
      return table;
    }
    case Engine::Reference: {
      const TruncatedSpace space{config.n_max, config.model.modes, config.dimension_cap};
      const CMatrix rho0 = product_state(space, config.atomic_density(), config.amplitudes);
      const ReferenceTrajectory traj = evolve(params, space, rho0, config.grid);
      return from_sets(config, config.grid, traj.points);
    }
    case Engine::Mb: {
      const AtomicDensity atom = config.atomic_density();
      MbState s0 = MbState::zero(params.mode_count());
      for (int n = 0; n < params.mode_count(); ++n) {
        s0.epsilon[n] = 2.0 * config.amplitudes[n].real();
        s0.eta[n] = 2.0 * config.amplitudes[n].imag();
      }
      s0.rho21 = atom.rho21;
      s0.nu = (atom.rho22 - atom.rho11).real();
      const MbTrajectory traj = evolve_mb(params, s0, config.grid);
      ResultTable table = from_sets(config, config.grid, traj.points);
      if (traj.bloch_violations > 0) {
        table.warnings.push_back("Bloch bound exceeded at " +
                                 std::to_string(traj.bloch_violations) + " grid points");
      }
      return table;
    }
  }
  throw ConfigError("unsupported engine");
}

void write_csv(const ResultTable& table, std::ostream& out) {
  out << "t";
  for (const auto& name : table.names) {
    out << ",real_" << name << ",imag_" << name;
    if (table.stochastic) out << ",stderr_" << name;
  }
  out << '\n';
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    out << format_double(table.t[i]);
    for (std::size_t k = 0; k < table.names.size(); ++k) {
      out << ',' << format_double(table.values[k][i].real()) << ','
          << format_double(table.values[k][i].imag());
      if (table.stochastic) out << ',' << format_double(table.stderr[k][i]);
    }
    out << '\n';
  }
}

std::string metadata_json(const RunConfig& config, const ResultTable& table) {
  const std::string text = serialize(config);
  nlohmann::ordered_json j;
  j["engine"] = engine_name(config.engine);
  j["config_hash"] = fnv1a_hex(text);
  j["seed"] = config.seed;
  j["runs_requested"] = table.runs_requested;
  j["runs_diverged"] = table.runs_diverged;
  j["diverged_paths"] = table.diverged_paths;
  j["warnings"] = table.warnings;
  j["config"] = text;
  return j.dump(2) + "\n";
}

int run(const RunConfig& config, std::ostream& log) {
  ResultTable table;
  try {
    table = run_engine(config);
  } catch (const AllDivergedError& e) {
    log << "error: " << e.what() << '\n';
    return 3;
  }
  for (const auto& w : table.warnings) log << "warning: " << w << '\n';
  if (table.stochastic) {
    log << "runs: " << table.runs_requested << ", diverged: " << table.runs_diverged << '\n';
  }
  std::ofstream csv(config.output);
  if (!csv) {
    log << "error: cannot write '" << config.output << "'\n";
    return 4;
  }
  write_csv(table, csv);
  std::ofstream meta(config.output + ".meta.json");
  if (!meta) {
    log << "error: cannot write '" << config.output << ".meta.json'\n";
    return 4;
  }
  meta << metadata_json(config, table);
  if (!csv.good() || !meta.good()) {
    log << "error: write failed\n";
    return 4;
  }
  return 0;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw DomainError("empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw DomainError("CSV row " + std::to_string(number) + " has " +
                        std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(table.header.size()));
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), x);
      if (ec != std::errc{} || ptr != c.data() + c.size()) {
        throw DomainError("CSV row " + std::to_string(number) + ": bad number '" + c + "'");
      }
      row.push_back(x);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  return read_csv(in);
}

std::vector<ColumnDeviation> compare_tables(const CsvTable& a, const CsvTable& b) {
  if (a.rows.size() != b.rows.size()) {
    throw DomainError("row counts differ: " + std::to_string(a.rows.size()) + " vs " +
                      std::to_string(b.rows.size()));
  }
  std::vector<ColumnDeviation> out;
  for (std::size_t ca = 0; ca < a.header.size(); ++ca) {
    if (a.header[ca] == "t") continue;
    for (std::size_t cb = 0; cb < b.header.size(); ++cb) {
      if (b.header[cb] != a.header[ca]) continue;
      ColumnDeviation d{a.header[ca], 0.0, 0.0};
      double sq = 0.0;
      for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const double diff = std::abs(a.rows[i][ca] - b.rows[i][cb]);
        d.max_abs = std::max(d.max_abs, diff);
        sq += diff * diff;
      }
      d.rms = a.rows.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(a.rows.size()));
      out.push_back(d);
      break;
    }
  }
  return out;
}

}  // namespace ppmb
