#include "ppmb/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ppmb/errors.hpp"
#include "ppmb/observables.hpp"
#include "ppmb/reference_sim.hpp"

namespace ppmb {

namespace pt = boost::property_tree;

Engine parse_engine(const std::string& name) {
  if (name == "sde-jc") return Engine::SdeJc;
  if (name == "sde-mb-experimental") return Engine::SdeMbExperimental;
  if (name == "reference") return Engine::Reference;
  if (name == "mb") return Engine::Mb;
  throw ConfigError("unknown engine '" + name + "' (sde-jc, sde-mb-experimental, reference, mb)");
}

std::string engine_name(Engine engine) {
  switch (engine) {
    case Engine::SdeJc: return "sde-jc";
    case Engine::SdeMbExperimental: return "sde-mb-experimental";
    case Engine::Reference: return "reference";
    case Engine::Mb: return "mb";
  }
  return "sde-jc";
}

BasisFamily RunConfig::basis() const {
  return family == FamilyKind::CoherentSpin ? BasisFamily::coherent_spin()
                                            : BasisFamily::additive_noise(delta, kappa);
}

AtomicDensity RunConfig::atomic_density() const {
  if (atom.beta) {
    const double p = 1.0 / (1.0 + std::exp(-*atom.beta * model.hbar * model.Omega));
    return AtomicDensity::from_populations(p, 0.0);
  }
  return AtomicDensity::from_populations(atom.rho11, atom.rho12);
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string format_complex(Complex x) {
  return "(" + format_double(x.real()) + ", " + format_double(x.imag()) + ")";
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& text) {
  const std::string s = trim(text);
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(x)) {
    throw ConfigError("expected a finite number, got '" + s + "'");
  }
  return x;
}

template <typename Int>
Int to_integer(const std::string& text) {
  const std::string s = trim(text);
  Int x = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("expected a non-negative integer, got '" + s + "'");
  }
  return x;
}

bool to_bool(const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("expected true or false, got '" + s + "'");
}

// Splits on commas outside parentheses.
std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  for (const auto& item : out) {
    if (item.empty()) throw ConfigError("empty item in list '" + text + "'");
  }
  return out;
}

Complex to_complex(const std::string& text) {
  const std::string s = trim(text);
  if (!s.empty() && s.front() == '(') {
    if (s.back() != ')') throw ConfigError("malformed complex value '" + s + "'");
    const std::string inner = s.substr(1, s.size() - 2);
    const auto comma = inner.find(',');
    if (comma == std::string::npos) throw ConfigError("complex value needs (re, im): '" + s + "'");
    return {to_double(inner.substr(0, comma)), to_double(inner.substr(comma + 1))};
  }
  return {to_double(s), 0.0};
}

std::vector<double> to_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(to_double(item));
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

std::string join_doubles(const std::vector<double>& xs) {
  std::vector<std::string> items;
  for (double x : xs) items.push_back(format_double(x));
  return join(items);
}

struct Key {
  const char* section;
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  // Empty optional: the key is omitted from the serialized form.
  std::function<std::optional<std::string>(const RunConfig&)> get;
};

const std::vector<Key>& key_table() {
  using S = std::optional<std::string>;
  static const std::vector<Key> table = {
      {"run", "engine", [](RunConfig& c, const std::string& v) { c.engine = parse_engine(trim(v)); },
       [](const RunConfig& c) { return S(engine_name(c.engine)); }},
      {"run", "experimental",
       [](RunConfig& c, const std::string& v) { c.experimental = to_bool(v); },
       [](const RunConfig& c) { return S(c.experimental ? "true" : "false"); }},
      {"run", "runs", [](RunConfig& c, const std::string& v) { c.runs = to_integer<std::size_t>(v); },
       [](const RunConfig& c) { return S(std::to_string(c.runs)); }},
      {"run", "seed", [](RunConfig& c, const std::string& v) { c.seed = to_integer<std::uint64_t>(v); },
       [](const RunConfig& c) { return S(std::to_string(c.seed)); }},
      {"run", "workers", [](RunConfig& c, const std::string& v) { c.workers = to_integer<unsigned>(v); },
       [](const RunConfig& c) { return S(std::to_string(c.workers)); }},
      {"run", "divergence_threshold",
       [](RunConfig& c, const std::string& v) { c.divergence_threshold = to_double(v); },
       [](const RunConfig& c) { return S(format_double(c.divergence_threshold)); }},
      {"run", "observables",
       [](RunConfig& c, const std::string& v) { c.observables = split_list(v); },
       [](const RunConfig& c) { return S(join(c.observables)); }},
      {"run", "probes", [](RunConfig& c, const std::string& v) { c.probes = to_double_list(v); },
       [](const RunConfig& c) { return c.probes.empty() ? S() : S(join_doubles(c.probes)); }},
      {"run", "output", [](RunConfig& c, const std::string& v) { c.output = trim(v); },
       [](const RunConfig& c) { return S(c.output); }},

      {"model", "hbar", [](RunConfig& c, const std::string& v) { c.model.hbar = to_double(v); },
       [](const RunConfig& c) { return S(format_double(c.model.hbar)); }},
      {"model", "eps0", [](RunConfig& c, const std::string& v) { c.model.eps0 = to_double(v); },
       [](const RunConfig& c) { return S(format_double(c.model.eps0)); }},
      {"model", "mu0", [](RunConfig& c, const std::string& v) { c.model.mu0 = to_double(v); },
       [](const RunConfig& c) { return S(format_double(c.model.mu0)); }},
      {"model", "Omega", [](RunConfig& c, const std::string& v) { c.model.Omega = to_double(v); },
       [](const RunConfig& c) { return S(format_double(c.model.Omega)); }},
      {"model", "length", [](RunConfig& c, const std::string& v) { c.model.length = to_double(v); },
       [](const RunConfig& c) { return S(format_double(c.model.length)); }},
      {"model", "area", [](RunConfig& c, const std::string& v) { c.model.area = to_double(v); },
       [](const RunConfig& c) { return S(format_double(c.model.area)); }},
      {"model", "x0", [](RunConfig& c, const std::string& v) { c.model.x0 = to_double(v); },
       [](const RunConfig& c) { return c.model.x0 ? S(format_double(*c.model.x0)) : S(); }},
      {"model", "modes", [](RunConfig& c, const std::string& v) { c.model.modes = to_integer<int>(v); },
       [](const RunConfig& c) { return S(std::to_string(c.model.modes)); }},
      {"model", "frequencies",
       [](RunConfig& c, const std::string& v) { c.model.frequencies = to_double_list(v); },
       [](const RunConfig& c) {
         return c.model.frequencies.empty() ? S() : S(join_doubles(c.model.frequencies));
       }},
      {"model", "couplings",
       [](RunConfig& c, const std::string& v) { c.model.couplings = to_double_list(v); },
       [](const RunConfig& c) {
         return c.model.couplings.empty() ? S() : S(join_doubles(c.model.couplings));
       }},
      {"model", "dipole", [](RunConfig& c, const std::string& v) { c.model.dipole = to_double(v); },
       [](const RunConfig& c) { return c.model.dipole ? S(format_double(*c.model.dipole)) : S(); }},
      {"model", "r12", [](RunConfig& c, const std::string& v) { c.model.rates.r12 = to_double(v); },
       [](const RunConfig& c) { return S(format_double(c.model.rates.r12)); }},
      {"model", "r21", [](RunConfig& c, const std::string& v) { c.model.rates.r21 = to_double(v); },
       [](const RunConfig& c) { return S(format_double(c.model.rates.r21)); }},
      {"model", "rp", [](RunConfig& c, const std::string& v) { c.model.rates.rp = to_double(v); },
       [](const RunConfig& c) { return S(format_double(c.model.rates.rp)); }},

      {"basis", "family",
       [](RunConfig& c, const std::string& v) { c.family = parse_family_kind(trim(v)); },
       [](const RunConfig& c) {
         return S(c.family == FamilyKind::CoherentSpin ? "coherent-spin" : "additive-noise");
       }},
      {"basis", "delta", [](RunConfig& c, const std::string& v) { c.delta = to_complex(v); },
       [](const RunConfig& c) { return S(format_complex(c.delta)); }},
      {"basis", "kappa", [](RunConfig& c, const std::string& v) { c.kappa = to_complex(v); },
       [](const RunConfig& c) { return S(format_complex(c.kappa)); }},

      {"grid", "t_start", [](RunConfig& c, const std::string& v) { c.grid.t_start = to_double(v); },
       [](const RunConfig& c) { return S(format_double(c.grid.t_start)); }},
      {"grid", "t_end", [](RunConfig& c, const std::string& v) { c.grid.t_end = to_double(v); },
       [](const RunConfig& c) { return S(format_double(c.grid.t_end)); }},
      {"grid", "steps",
       [](RunConfig& c, const std::string& v) { c.grid.steps = to_integer<std::size_t>(v); },
       [](const RunConfig& c) { return S(std::to_string(c.grid.steps)); }},

      {"atom", "beta", [](RunConfig& c, const std::string& v) { c.atom.beta = to_double(v); },
       [](const RunConfig& c) { return c.atom.beta ? S(format_double(*c.atom.beta)) : S(); }},
      {"atom", "rho11", [](RunConfig& c, const std::string& v) { c.atom.rho11 = to_double(v); },
       [](const RunConfig& c) { return c.atom.beta ? S() : S(format_double(c.atom.rho11)); }},
      {"atom", "rho12", [](RunConfig& c, const std::string& v) { c.atom.rho12 = to_complex(v); },
       [](const RunConfig& c) { return c.atom.beta ? S() : S(format_complex(c.atom.rho12)); }},

      {"field", "amplitudes",
       [](RunConfig& c, const std::string& v) {
         c.amplitudes.clear();
         for (const auto& item : split_list(v)) c.amplitudes.push_back(to_complex(item));
       },
       [](const RunConfig& c) {
         std::vector<std::string> items;
         for (Complex a : c.amplitudes) items.push_back(format_complex(a));
         return S(join(items));
       }},

      {"reference", "n_max", [](RunConfig& c, const std::string& v) { c.n_max = to_integer<int>(v); },
       [](const RunConfig& c) { return S(std::to_string(c.n_max)); }},
      {"reference", "dimension_cap",
       [](RunConfig& c, const std::string& v) { c.dimension_cap = to_integer<std::size_t>(v); },
       [](const RunConfig& c) { return S(std::to_string(c.dimension_cap)); }},

      {"invariants", "random_points",
       [](RunConfig& c, const std::string& v) { c.invariant_points = to_integer<std::size_t>(v); },
       [](const RunConfig& c) { return S(std::to_string(c.invariant_points)); }},
      {"invariants", "seed",
       [](RunConfig& c, const std::string& v) { c.invariant_seed = to_integer<std::uint64_t>(v); },
       [](const RunConfig& c) { return S(std::to_string(c.invariant_seed)); }},
  };
  return table;
}

const Key* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : key_table()) {
    if (section == k.section && name == k.name) return &k;
  }
  return nullptr;
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// Line of each "section.key" in the original text, for error messages.
std::map<std::string, int> key_lines(const std::string& text) {
  std::map<std::string, int> lines;
  std::istringstream in(text);
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      lines.emplace(section, number);
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos) lines.emplace(section + "." + trim(t.substr(0, eq)), number);
  }
  return lines;
}

// '#' comments are not part of the ini dialect; blank them so line numbers
// stay aligned.
std::string strip_hash_comments(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    out << (!t.empty() && t[0] == '#' ? std::string() : line) << '\n';
  }
  return out.str();
}

void wrap_domain(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

void validate(const RunConfig& c) {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  wrap_domain([&] {
    const ModelParams params(c.model);
    c.grid.validate();
    const BasisFamily family = c.basis();
    const AtomicDensity atom = c.atomic_density();
    atom.validate(1e-9);
    if (static_cast<int>(c.amplitudes.size()) != c.model.modes) {
      fail("[field] amplitudes needs one value per mode (" + std::to_string(c.model.modes) + ")");
    }
    if (c.atom.beta && !(*c.atom.beta >= 0.0)) fail("[atom] beta must be non-negative");
    if (c.runs < 1) fail("[run] runs must be at least 1");
    if (!(c.divergence_threshold > 0.0)) fail("[run] divergence_threshold must be positive");
    if (c.observables.empty()) fail("[run] observables must name at least one quantity");
    for (double x : c.probes) {
      if (!(x >= 0.0 && x <= c.model.length)) fail("[run] probes must lie in [0, length]");
    }
    if (c.invariant_points < 1) fail("[invariants] random_points must be at least 1");

    const bool stochastic = c.engine == Engine::SdeJc || c.engine == Engine::SdeMbExperimental;
    if (stochastic) init_points(atom, family);
    if (c.engine == Engine::SdeMbExperimental) {
      if (!c.experimental) {
        fail("engine sde-mb-experimental requires [run] experimental = true");
      }
      if (c.family != FamilyKind::CoherentSpin) {
        fail("engine sde-mb-experimental is only defined for [basis] family = coherent-spin");
      }
    }
    if (c.engine == Engine::Reference) {
      TruncatedSpace{c.n_max, c.model.modes, c.dimension_cap}.validate();
    }
    for (const auto& name : c.observables) {
      if ((name == "z" || name == "w") && c.engine != Engine::SdeJc) {
        fail("observable '" + name + "' only exists for engine sde-jc");
      }
      if (name.size() > 2 && (name.starts_with("E_") || name.starts_with("H_"))) {
        std::size_t k = 0;
        try {
          k = to_integer<std::size_t>(name.substr(2));
        } catch (const ConfigError&) {
          fail("unknown observable '" + name + "'");
        }
        if (k < 1 || k > c.probes.size()) {
          fail("observable '" + name + "' refers to a missing probe position");
        }
        continue;
      }
      if (name == "z" || name == "w") continue;
      phase_space_observable(family, c.model.modes, name);
    }
  });
}

RunConfig parse_config(const std::string& text, bool use_environment) {
  pt::ptree tree;
  {
    std::istringstream in(strip_hash_comments(text));
    try {
      pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(e.message(), static_cast<int>(e.line()));
    }
  }
  const auto lines = key_lines(text);
  auto line_of = [&lines](const std::string& key) {
    auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  };

  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) {
      throw ConfigError("key '" + section + "' outside a section", line_of("." + section));
    }
    const bool known = std::any_of(key_table().begin(), key_table().end(),
                                   [&](const Key& k) { return section == k.section; });
    if (!known) throw ConfigError("unknown section [" + section + "]", line_of(section));
    for (const auto& entry : body) {
      if (!find_key(section, entry.first)) {
        throw ConfigError("unknown key '" + entry.first + "' in [" + section + "]",
                          line_of(section + "." + entry.first));
      }
    }
  }

  if (use_environment) {
    for (const auto& k : key_table()) {
      const std::string var = "PPMB_" + upper(k.section) + "_" + upper(k.name);
      if (const char* v = std::getenv(var.c_str())) {
        tree.put(pt::ptree::path_type(std::string(k.section) + "/" + k.name, '/'), std::string(v));
      }
    }
  }

  if (!tree.get_child_optional(pt::ptree::path_type("run/engine", '/'))) {
    throw ConfigError("[run] engine is required");
  }

  RunConfig config;
  for (const auto& k : key_table()) {
    const auto value = tree.get_optional<std::string>(
        pt::ptree::path_type(std::string(k.section) + "/" + k.name, '/'));
    if (!value) continue;
    try {
      k.set(config, *value);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("[") + k.section + "] " + k.name + ": " + e.what(),
                        line_of(std::string(k.section) + "." + k.name));
    } catch (const Error& e) {
      throw ConfigError(std::string("[") + k.section + "] " + k.name + ": " + e.what(),
                        line_of(std::string(k.section) + "." + k.name));
    }
  }
  if (config.atom.beta &&
      (tree.get_optional<std::string>(pt::ptree::path_type("atom/rho11", '/')) ||
       tree.get_optional<std::string>(pt::ptree::path_type("atom/rho12", '/')))) {
    throw ConfigError("[atom] give either beta or rho11/rho12", line_of("atom.beta"));
  }
  validate(config);
  return config;
}

RunConfig load_config(const std::string& path, bool use_environment) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), use_environment);
}

std::string serialize(const RunConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& k : key_table()) {
    const auto value = k.get(config);
    if (!value) continue;
    if (section != k.section) {
      if (!section.empty()) out << '\n';
      section = k.section;
      out << '[' << section << "]\n";
    }
    out << k.name << " = " << *value << '\n';
  }
  return out.str();
}

}  // namespace ppmb
