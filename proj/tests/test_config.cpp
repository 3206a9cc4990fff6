#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dnp/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace dnp;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& body) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream os(path);
  os << body;
  return path;
}

const char* kProfile = DNP_TEST_PROFILE;

}  // namespace

TEST_CASE("bundled profile loads the quoted constants") {
  const RunConfig cfg = parse_config(kProfile);
  CHECK(cfg.system.omega_S == 9.59e9);
  CHECK(cfg.system.omega_I == 14.57e6);
  CHECK(cfg.system.A == -42.7e6);
  CHECK(cfg.system.B == 14.7e6);
  CHECK(cfg.system.temperature == 293.0);
  CHECK(cfg.relaxation.T1e == 1e-3);
  CHECK(cfg.relaxation.Tzq == 0.1);
  CHECK_FALSE(cfg.relaxation.Tdq.has_value());
  CHECK(cfg.optimize.mode == "open");
  CHECK(cfg.optimize.restarts == 8);
}

TEST_CASE("negative relaxation time names the field") {
  const fs::path p = write_temp("dnp_bad_t1e.cfg",
                                "[relaxation]\nT1e = -2e-3\n");
  try {
    parse_config(p.string());
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    REQUIRE(e.errors().size() == 1);
    CHECK(e.errors()[0].find("relaxation.T1e") != std::string::npos);
  }
  fs::remove(p);
}

TEST_CASE("unknown keys are rejected by name") {
  const fs::path p = write_temp("dnp_unknown.cfg",
                                "[system]\nomega_x = 3\n");
  try {
    parse_config(p.string());
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    bool found = false;
    for (const auto& msg : e.errors())
      if (msg.find("omega_x") != std::string::npos) found = true;
    CHECK(found);
  }
  fs::remove(p);
}

TEST_CASE("all problems are reported at once") {
  const fs::path p = write_temp("dnp_multi.cfg",
                                "[system]\nomega_S = -1\nbogus = 2\n"
                                "[relaxation]\nTzq = nope\n");
  try {
    parse_config(p.string());
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.errors().size() >= 3);
  }
  fs::remove(p);
}

TEST_CASE("duplicate keys and malformed lines are flagged") {
  const fs::path p = write_temp("dnp_dup.cfg",
                                "[system]\nA = 1e6\nA = 2e6\njust words\n");
  CHECK_THROWS_AS(parse_config(p.string()), ConfigError);
  fs::remove(p);
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(parse_config("/nonexistent/nowhere.cfg"), ConfigError);
}

TEST_CASE("canonical form reparses to the same configuration") {
  RunConfig cfg = parse_config(kProfile);
  cfg.relaxation.Tdq = 0.2;
  cfg.seed = 1234567;
  const fs::path p = write_temp("dnp_canon.cfg", canonical_config(cfg));
  const RunConfig back = parse_config(p.string());
  CHECK(back.system.A == cfg.system.A);
  CHECK(back.relaxation.Tdq.value() == 0.2);
  CHECK(back.seed == cfg.seed);
  CHECK(canonical_config(back) == canonical_config(cfg));
  fs::remove(p);
}

TEST_CASE("parsing does not modify the input file") {
  const RunConfig cfg = parse_config(kProfile);
  (void)cfg;
  std::ifstream is(kProfile);
  std::stringstream buf;
  buf << is.rdbuf();
  CHECK(buf.str().find("omega_S = 9.59e9") != std::string::npos);
}
