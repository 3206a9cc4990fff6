// config.hpp — strict key/value run configuration with nested sections.
// Unknown sections or keys are rejected and all problems are reported at
// once, not first-error-only.

#pragma once

#include "dnp/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dnp {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct RunConfig {
  SpinSystemParams system;
  RelaxationParams relaxation;

  struct Optimize {
    std::string mode = "open";  // open | closed
    int n_pulses = 3;
    int max_iterations = 400;
    double convergence_tol = 1e-10;
    int restarts = 8;
    double omega_d = 8e6;
    double dt_max = -1.0;
    long long fidelity_cycles = -1;
  } optimize;

  struct Buildup {
    std::string pulse = "hard";  // hard | none | ideal-oe | ideal-se | file:<path>
    double omega_d = 8e6;
    double total_time = -1.0;  // <= 0 selects 3*Tzq
    long long readout_stride = 100;
    double delay = 0.0;
    double angle_dt = -1.0;
  } buildup;

  struct AngleMap {
    std::string panel = "a";  // a..e
    int grid = 32;
    double dt = -1.0;
  } angle_map;

  struct Sweep {
    std::string parameter = "rabi_frequency";  // rabi_frequency | anisotropic_B | tdq_ratio
    double from = 2e6;
    double to = 30e6;
    double step = 1e6;
    std::string pulses = "hard";  // comma list of hard | file:<path>
    double omega_d = 8e6;
  } sweep;

  struct DqLeakage {
    double tdq_ratio = 2.0;
    std::string pulses = "hard";
    double omega_d = 8e6;
  } dq_leakage;

  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int threads = 1;
};

// Parses and fully validates a config file; throws ConfigError listing every
// problem found.
RunConfig parse_config(const std::string& path);

// Canonical text form of a config (manifest snapshot); reparsing it
// reproduces the run.
std::string canonical_config(const RunConfig& cfg);

}  // namespace dnp
