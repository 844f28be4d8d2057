// Exercises the shared-library surface only: include/softpg.h, no C++ core
// headers.
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "softpg.h"

namespace {

struct Cfg {
  softpg_config* p = softpg_config_new();
  ~Cfg() { softpg_config_free(p); }
};

std::filesystem::path temp_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("softpg_capi_" + tag);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

void set_tiny_chain(softpg_config* cfg) {
  REQUIRE(softpg_config_set(cfg, "algo", "sppo") == SOFTPG_OK);
  REQUIRE(softpg_config_set(cfg, "env", "chain") == SOFTPG_OK);
  REQUIRE(softpg_config_set(cfg, "gamma", "0.9") == SOFTPG_OK);
  REQUIRE(softpg_config_set(cfg, "alpha", "0.1") == SOFTPG_OK);
  REQUIRE(softpg_config_set(cfg, "horizon", "64") == SOFTPG_OK);
  REQUIRE(softpg_config_set(cfg, "epochs", "2") == SOFTPG_OK);
  REQUIRE(softpg_config_set(cfg, "minibatch", "32") == SOFTPG_OK);
  REQUIRE(softpg_config_set(cfg, "hidden", "8") == SOFTPG_OK);
  REQUIRE(softpg_config_set(cfg, "total_steps", "128") == SOFTPG_OK);
  REQUIRE(softpg_config_set(cfg, "eval_episodes", "3") == SOFTPG_OK);
}

}  // namespace

TEST_CASE("version and default error message") {
  CHECK(std::strlen(softpg_version()) > 0);
  CHECK(softpg_last_error() != nullptr);
}

TEST_CASE("config: set, unknown keys, validation") {
  Cfg cfg;
  REQUIRE(cfg.p != nullptr);
  CHECK(softpg_config_set(cfg.p, "alpha", "0.3") == SOFTPG_OK);
  CHECK(softpg_config_set(cfg.p, "not_a_key", "1") == SOFTPG_ERR_ARG);
  CHECK(std::string(softpg_last_error()).find("unknown key") !=
        std::string::npos);
  CHECK(softpg_config_set(cfg.p, "clip", "1.5") == SOFTPG_OK);
  CHECK(softpg_config_validate(cfg.p) == SOFTPG_ERR_ARG);
  CHECK(softpg_config_set(cfg.p, "clip", "0.2") == SOFTPG_OK);
  CHECK(softpg_config_validate(cfg.p) == SOFTPG_OK);
  CHECK(softpg_config_set(nullptr, "alpha", "1") == SOFTPG_ERR_ARG);
}

TEST_CASE("config file loading") {
  auto dir = temp_dir("cfg");
  {
    std::ofstream out(dir / "a.cfg");
    out << "alpha = 0.15\nenv = chain\n";
  }
  Cfg cfg;
  CHECK(softpg_config_load(cfg.p, (dir / "a.cfg").string().c_str()) ==
        SOFTPG_OK);
  CHECK(softpg_config_load(cfg.p, (dir / "missing.cfg").string().c_str()) ==
        SOFTPG_ERR_ARG);
  {
    std::ofstream out(dir / "bad.cfg");
    out << "mystery = 1\n";
  }
  CHECK(softpg_config_load(cfg.p, (dir / "bad.cfg").string().c_str()) ==
        SOFTPG_ERR_ARG);
}

TEST_CASE("train, evaluate, and compare through the C surface") {
  auto dir = temp_dir("train");
  Cfg cfg;
  set_tiny_chain(cfg.p);
  double mean = -1e300, stddev = -1.0;
  REQUIRE(softpg_train(cfg.p, (dir / "run").string().c_str(), &mean,
                       &stddev) == SOFTPG_OK);
  CHECK(mean == mean);  // finite
  CHECK(stddev >= 0.0);
  CHECK(std::filesystem::exists(dir / "run" / "metrics.csv"));
  CHECK(std::filesystem::exists(dir / "run" / "policy.bin"));

  double emean = 0.0, estd = 0.0;
  REQUIRE(softpg_evaluate((dir / "run" / "policy.bin").string().c_str(),
                          "chain", 4, 7, &emean, &estd) == SOFTPG_OK);
  CHECK(emean == emean);

  CHECK(softpg_evaluate((dir / "nope.bin").string().c_str(), "chain", 4, 7,
                        &emean, &estd) == SOFTPG_ERR_IO);
  CHECK(softpg_evaluate((dir / "run" / "policy.bin").string().c_str(),
                        "marsrover", 4, 7, &emean, &estd) == SOFTPG_ERR_ARG);

  Cfg other;
  set_tiny_chain(other.p);
  char* report = nullptr;
  REQUIRE(softpg_compare(cfg.p, other.p, 3, (dir / "cmp").string().c_str(),
                         &report) == SOFTPG_OK);
  REQUIRE(report != nullptr);
  CHECK(std::string(report).find("median_a") != std::string::npos);
  softpg_string_free(report);
}

TEST_CASE("oracle and gradcheck through the C surface") {
  auto dir = temp_dir("oracle");
  {
    std::ofstream out(dir / "mdp.txt");
    out << "2 2 0.9\n0 0 0 1.0 0.0\n0 1 1 1.0 1.0\n1 0 0 1.0 0.0\n"
        << "1 1 1 1.0 0.5\n";
  }
  char* report = nullptr;
  REQUIRE(softpg_oracle((dir / "mdp.txt").string().c_str(), 0.3, 5000, 0,
                        &report) == SOFTPG_OK);
  REQUIRE(report != nullptr);
  CHECK(std::string(report).find("soft state values") != std::string::npos);
  softpg_string_free(report);

  CHECK(softpg_oracle((dir / "missing.txt").string().c_str(), 0.3, 100, 0,
                      &report) == SOFTPG_ERR_ARG);

  char* gc = nullptr;
  CHECK(softpg_gradcheck(3, 0, &gc) == SOFTPG_OK);
  REQUIRE(gc != nullptr);
  CHECK(std::string(gc).find("PASS") != std::string::npos);
  softpg_string_free(gc);
}
