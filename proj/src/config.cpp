#include "dnp/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dnp {

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::ostringstream os;
  os << "configuration invalid (" << errors.size() << " problem"
     << (errors.size() == 1 ? "" : "s") << "):";
  for (const auto& e : errors) os << "\n  - " << e;
  return os.str();
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct Parser {
  std::vector<std::string> errors;
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::set<std::string> consumed;

  void load(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
      errors.push_back("cannot open config file: " + path);
      return;
    }
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
          continue;
        }
        section = trim(line.substr(1, line.size() - 2));
        if (!sections.count(section)) sections[section] = {};
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
        continue;
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) {
        errors.push_back("line " + std::to_string(lineno) + ": empty key");
        continue;
      }
      auto& sec = sections[section];
      if (sec.count(key)) {
        errors.push_back("duplicate key '" + qualify(section, key) + "'");
        continue;
      }
      sec[key] = value;
    }
  }

  static std::string qualify(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
  }

  bool has(const std::string& section, const std::string& key) {
    consumed.insert(qualify(section, key));
    auto sit = sections.find(section);
    return sit != sections.end() && sit->second.count(key) > 0;
  }

  std::string raw(const std::string& section, const std::string& key) {
    return sections[section][key];
  }

  template <typename T, typename Convert>
  void get(const std::string& section, const std::string& key, T& out, Convert conv) {
    if (!has(section, key)) return;
    const std::string text = raw(section, key);
    try {
      out = conv(text);
    } catch (const std::exception& e) {
      errors.push_back(qualify(section, key) + ": " + e.what() + " (got '" + text + "')");
    }
  }

  void get_double(const std::string& section, const std::string& key, double& out) {
    get(section, key, out, [](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0') throw std::runtime_error("not a number");
      return v;
    });
  }

  void get_int(const std::string& section, const std::string& key, int& out) {
    get(section, key, out, [](const std::string& s) {
      char* end = nullptr;
      const long v = std::strtol(s.c_str(), &end, 10);
      if (end == s.c_str() || *end != '\0') throw std::runtime_error("not an integer");
      return static_cast<int>(v);
    });
  }

  void get_long(const std::string& section, const std::string& key, long long& out) {
    get(section, key, out, [](const std::string& s) {
      char* end = nullptr;
      const long long v = std::strtoll(s.c_str(), &end, 10);
      if (end == s.c_str() || *end != '\0') throw std::runtime_error("not an integer");
      return v;
    });
  }

  void get_u64(const std::string& section, const std::string& key, std::uint64_t& out) {
    get(section, key, out, [](const std::string& s) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
      if (end == s.c_str() || *end != '\0') throw std::runtime_error("not an integer");
      return static_cast<std::uint64_t>(v);
    });
  }

  void get_string(const std::string& section, const std::string& key, std::string& out) {
    get(section, key, out, [](const std::string& s) { return s; });
  }

  void report_unknown() {
    for (const auto& [section, kv] : sections)
      for (const auto& [key, value] : kv) {
        (void)value;
        if (!consumed.count(qualify(section, key)))
          errors.push_back("unknown key '" + qualify(section, key) + "'");
      }
  }
};

void check_positive(std::vector<std::string>& errors, const std::string& name, double v) {
  if (!(v > 0) || !std::isfinite(v))
    errors.push_back(name + ": must be positive and finite");
}

void check_one_of(std::vector<std::string>& errors, const std::string& name,
                  const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return;
  std::ostringstream os;
  os << name << ": '" << v << "' is not one of {";
  bool first = true;
  for (const char* a : allowed) {
    os << (first ? "" : ", ") << a;
    first = false;
  }
  os << "}";
  errors.push_back(os.str());
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

RunConfig parse_config(const std::string& path) {
  Parser p;
  p.load(path);
  RunConfig cfg;

  p.get_double("system", "omega_S", cfg.system.omega_S);
  p.get_double("system", "omega_I", cfg.system.omega_I);
  p.get_double("system", "A", cfg.system.A);
  p.get_double("system", "B", cfg.system.B);
  p.get_double("system", "temperature", cfg.system.temperature);

  p.get_double("relaxation", "T1e", cfg.relaxation.T1e);
  p.get_double("relaxation", "Tzq", cfg.relaxation.Tzq);
  cfg.relaxation.temperature = cfg.system.temperature;
  if (p.has("relaxation", "Tdq")) {
    double tdq = 0;
    p.get_double("relaxation", "Tdq", tdq);
    cfg.relaxation.Tdq = tdq;
  }
  if (p.has("relaxation", "temperature"))
    p.get_double("relaxation", "temperature", cfg.relaxation.temperature);

  p.get_string("optimize", "mode", cfg.optimize.mode);
  p.get_int("optimize", "n_pulses", cfg.optimize.n_pulses);
  p.get_int("optimize", "max_iterations", cfg.optimize.max_iterations);
  p.get_double("optimize", "convergence_tol", cfg.optimize.convergence_tol);
  p.get_int("optimize", "restarts", cfg.optimize.restarts);
  p.get_double("optimize", "omega_d", cfg.optimize.omega_d);
  p.get_double("optimize", "dt_max", cfg.optimize.dt_max);
  p.get_long("optimize", "fidelity_cycles", cfg.optimize.fidelity_cycles);

  p.get_string("buildup", "pulse", cfg.buildup.pulse);
  p.get_double("buildup", "omega_d", cfg.buildup.omega_d);
  p.get_double("buildup", "total_time", cfg.buildup.total_time);
  p.get_long("buildup", "readout_stride", cfg.buildup.readout_stride);
  p.get_double("buildup", "delay", cfg.buildup.delay);
  p.get_double("buildup", "angle_dt", cfg.buildup.angle_dt);

  p.get_string("angle-map", "panel", cfg.angle_map.panel);
  p.get_int("angle-map", "grid", cfg.angle_map.grid);
  p.get_double("angle-map", "dt", cfg.angle_map.dt);

  p.get_string("sweep", "parameter", cfg.sweep.parameter);
  p.get_double("sweep", "from", cfg.sweep.from);
  p.get_double("sweep", "to", cfg.sweep.to);
  p.get_double("sweep", "step", cfg.sweep.step);
  p.get_string("sweep", "pulses", cfg.sweep.pulses);
  p.get_double("sweep", "omega_d", cfg.sweep.omega_d);

  p.get_double("dq-leakage", "tdq_ratio", cfg.dq_leakage.tdq_ratio);
  p.get_string("dq-leakage", "pulses", cfg.dq_leakage.pulses);
  p.get_double("dq-leakage", "omega_d", cfg.dq_leakage.omega_d);

  p.get_u64("run", "seed", cfg.seed);
  p.get_string("run", "out_dir", cfg.out_dir);
  p.get_int("run", "threads", cfg.threads);

  p.report_unknown();
  auto& errors = p.errors;

  check_positive(errors, "system.omega_S", cfg.system.omega_S);
  check_positive(errors, "system.omega_I", cfg.system.omega_I);
  if (!std::isfinite(cfg.system.A)) errors.push_back("system.A: must be finite");
  if (!std::isfinite(cfg.system.B)) errors.push_back("system.B: must be finite");
  check_positive(errors, "system.temperature", cfg.system.temperature);
  check_positive(errors, "relaxation.T1e", cfg.relaxation.T1e);
  check_positive(errors, "relaxation.Tzq", cfg.relaxation.Tzq);
  if (cfg.relaxation.Tdq) check_positive(errors, "relaxation.Tdq", *cfg.relaxation.Tdq);
  check_positive(errors, "relaxation.temperature", cfg.relaxation.temperature);

  check_one_of(errors, "optimize.mode", cfg.optimize.mode, {"open", "closed"});
  if (cfg.optimize.n_pulses < 1) errors.push_back("optimize.n_pulses: must be >= 1");
  if (cfg.optimize.restarts < 1) errors.push_back("optimize.restarts: must be >= 1");
  if (cfg.optimize.max_iterations < 1)
    errors.push_back("optimize.max_iterations: must be >= 1");
  check_positive(errors, "optimize.omega_d", cfg.optimize.omega_d);

  const bool pulse_is_file = cfg.buildup.pulse.rfind("file:", 0) == 0;
  if (!pulse_is_file)
    check_one_of(errors, "buildup.pulse", cfg.buildup.pulse,
                 {"hard", "none", "ideal-oe", "ideal-se"});
  check_positive(errors, "buildup.omega_d", cfg.buildup.omega_d);
  if (cfg.buildup.readout_stride < 1)
    errors.push_back("buildup.readout_stride: must be >= 1");
  if (cfg.buildup.delay < 0 || !std::isfinite(cfg.buildup.delay))
    errors.push_back("buildup.delay: must be >= 0");

  check_one_of(errors, "angle-map.panel", cfg.angle_map.panel,
               {"a", "b", "c", "d", "e"});
  if (cfg.angle_map.grid < 2) errors.push_back("angle-map.grid: must be >= 2");

  check_one_of(errors, "sweep.parameter", cfg.sweep.parameter,
               {"rabi_frequency", "anisotropic_B", "tdq_ratio"});
  check_positive(errors, "sweep.step", cfg.sweep.step);
  if (!(cfg.sweep.to >= cfg.sweep.from))
    errors.push_back("sweep.to: must be >= sweep.from");
  check_positive(errors, "sweep.omega_d", cfg.sweep.omega_d);

  check_positive(errors, "dq-leakage.tdq_ratio", cfg.dq_leakage.tdq_ratio);
  check_positive(errors, "dq-leakage.omega_d", cfg.dq_leakage.omega_d);

  if (cfg.threads < 1) errors.push_back("run.threads: must be >= 1");

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

std::string canonical_config(const RunConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "[system]\n";
  os << "omega_S = " << cfg.system.omega_S << "\n";
  os << "omega_I = " << cfg.system.omega_I << "\n";
  os << "A = " << cfg.system.A << "\n";
  os << "B = " << cfg.system.B << "\n";
  os << "temperature = " << cfg.system.temperature << "\n\n";
  os << "[relaxation]\n";
  os << "T1e = " << cfg.relaxation.T1e << "\n";
  os << "Tzq = " << cfg.relaxation.Tzq << "\n";
  if (cfg.relaxation.Tdq) os << "Tdq = " << *cfg.relaxation.Tdq << "\n";
  os << "temperature = " << cfg.relaxation.temperature << "\n\n";
  os << "[optimize]\n";
  os << "mode = " << cfg.optimize.mode << "\n";
  os << "n_pulses = " << cfg.optimize.n_pulses << "\n";
  os << "max_iterations = " << cfg.optimize.max_iterations << "\n";
  os << "convergence_tol = " << cfg.optimize.convergence_tol << "\n";
  os << "restarts = " << cfg.optimize.restarts << "\n";
  os << "omega_d = " << cfg.optimize.omega_d << "\n";
  os << "dt_max = " << cfg.optimize.dt_max << "\n";
  os << "fidelity_cycles = " << cfg.optimize.fidelity_cycles << "\n\n";
  os << "[buildup]\n";
  os << "pulse = " << cfg.buildup.pulse << "\n";
  os << "omega_d = " << cfg.buildup.omega_d << "\n";
  os << "total_time = " << cfg.buildup.total_time << "\n";
  os << "readout_stride = " << cfg.buildup.readout_stride << "\n";
  os << "delay = " << cfg.buildup.delay << "\n";
  os << "angle_dt = " << cfg.buildup.angle_dt << "\n\n";
  os << "[angle-map]\n";
  os << "panel = " << cfg.angle_map.panel << "\n";
  os << "grid = " << cfg.angle_map.grid << "\n";
  os << "dt = " << cfg.angle_map.dt << "\n\n";
  os << "[sweep]\n";
  os << "parameter = " << cfg.sweep.parameter << "\n";
  os << "from = " << cfg.sweep.from << "\n";
  os << "to = " << cfg.sweep.to << "\n";
  os << "step = " << cfg.sweep.step << "\n";
  os << "pulses = " << cfg.sweep.pulses << "\n";
  os << "omega_d = " << cfg.sweep.omega_d << "\n\n";
  os << "[dq-leakage]\n";
  os << "tdq_ratio = " << cfg.dq_leakage.tdq_ratio << "\n";
  os << "pulses = " << cfg.dq_leakage.pulses << "\n";
  os << "omega_d = " << cfg.dq_leakage.omega_d << "\n\n";
  os << "[run]\n";
  os << "seed = " << cfg.seed << "\n";
  os << "out_dir = " << cfg.out_dir << "\n";
  os << "threads = " << cfg.threads << "\n";
  return os.str();
}

}  // namespace dnp
