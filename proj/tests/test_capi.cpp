#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "qpmsa.h"

namespace fs = std::filesystem;

TEST_CASE("version and torus norm") {
  CHECK(std::strlen(qpmsa_version()) > 0);
  double out = -1.0;
  CHECK(qpmsa_torus_norm(0.7, &out) == QPMSA_OK);
  CHECK(out == doctest::Approx(0.3));
  CHECK(qpmsa_torus_norm(0.7, nullptr) == QPMSA_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(qpmsa_last_error()) > 0);
}

TEST_CASE("config lifecycle and key setting") {
  qpmsa_config* cfg = qpmsa_config_create();
  REQUIRE(cfg != nullptr);
  CHECK(qpmsa_config_set(cfg, "dim", "2") == QPMSA_OK);
  CHECK(qpmsa_config_set(cfg, "schedule.l1", "5") == QPMSA_OK);
  CHECK(qpmsa_config_set(cfg, "experiment", "\"assemble\"") == QPMSA_OK);
  char* dump = nullptr;
  REQUIRE(qpmsa_config_dump(cfg, &dump) == QPMSA_OK);
  const std::string text(dump);
  qpmsa_string_free(dump);
  CHECK(text.find("\"dim\": 2") != std::string::npos);
  CHECK(text.find("\"l1\": 5") != std::string::npos);
  CHECK(qpmsa_config_set(cfg, nullptr, "1") == QPMSA_ERR_INVALID_ARGUMENT);
  CHECK(qpmsa_config_load_file(cfg, "/nonexistent/path.json") != QPMSA_OK);
  qpmsa_config_destroy(cfg);
}

TEST_CASE("full run through the C surface") {
  qpmsa_config* cfg = qpmsa_config_create();
  REQUIRE(cfg != nullptr);
  const std::string out_dir = (fs::temp_directory_path() / "qpmsa_capi_run").string();
  CHECK(qpmsa_config_set(cfg, "experiment", "\"assemble\"") == QPMSA_OK);
  CHECK(qpmsa_config_set(cfg, "radius", "5") == QPMSA_OK);
  CHECK(qpmsa_config_set(cfg, "out_dir", ("\"" + out_dir + "\"").c_str()) == QPMSA_OK);
  CHECK(qpmsa_run(cfg) == QPMSA_OK);
  CHECK(fs::exists(fs::path(out_dir) / "summary.txt"));
  // invalid experiment maps to an invalid-argument status
  CHECK(qpmsa_config_set(cfg, "experiment", "\"nope\"") == QPMSA_OK);
  CHECK(qpmsa_run(cfg) == QPMSA_ERR_INVALID_ARGUMENT);
  qpmsa_config_destroy(cfg);
}

TEST_CASE("operator handles: assemble, eigenvalues, green") {
  const int center[1] = {0};
  qpmsa_operator* op =
      qpmsa_operator_create_box(1, 0.5, "cos", nullptr, 0.0, 0.0, 0.0, center, 1);
  REQUIRE(op != nullptr);
  const int n = qpmsa_operator_size(op);
  CHECK(n == 3);
  std::vector<double> h(n * n, 0.0);
  CHECK(qpmsa_operator_matrix(op, h.data()) == QPMSA_OK);
  CHECK(h[0 * n + 1] == 0.5);       // hopping
  CHECK(h[1 * n + 1] == doctest::Approx(1.0));  // v(0 + 0*omega) = cos(0)
  std::vector<double> ev(n, 0.0);
  CHECK(qpmsa_operator_eigenvalues(op, ev.data()) == QPMSA_OK);
  CHECK(ev[0] <= ev[1]);
  CHECK(ev[1] <= ev[2]);
  std::vector<double> g(n * n, 0.0);
  double residual = -1.0;
  CHECK(qpmsa_operator_green(op, 5.0, g.data(), &residual) == QPMSA_OK);
  CHECK(residual >= 0.0);
  CHECK(residual <= 1e-9);
  // E on the spectrum fails gracefully
  CHECK(qpmsa_operator_green(op, ev[0], g.data(), &residual) == QPMSA_ERR_RUNTIME);
  qpmsa_operator_destroy(op);

  // bad arguments
  CHECK(qpmsa_operator_create_box(0, 0.1, "cos", nullptr, 0, 0, 0.0, center, 1) == nullptr);
  CHECK(qpmsa_operator_create_box(1, 0.1, "sin", nullptr, 0, 0, 0.0, center, 1) == nullptr);
  CHECK(std::strlen(qpmsa_last_error()) > 0);
}

TEST_CASE("diophantine and arithmetic-set reports through the C surface") {
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  char* report = nullptr;
  REQUIRE(qpmsa_verify_diophantine(1, &golden, 2.0, 0.1, 100, &report) == QPMSA_OK);
  std::string text(report);
  qpmsa_string_free(report);
  CHECK(text.find("\"pass\": true") != std::string::npos);

  const double half = 0.5;
  REQUIRE(qpmsa_verify_diophantine(1, &half, 2.0, 0.1, 3, &report) == QPMSA_OK);
  text = report;
  qpmsa_string_free(report);
  CHECK(text.find("\"pass\": false") != std::string::npos);
  CHECK(text.find("first_violation") != std::string::npos);

  REQUIRE(qpmsa_arithmetic_membership(0.495, 1, &golden, 0.1, 1000, &report) == QPMSA_OK);
  text = report;
  qpmsa_string_free(report);
  CHECK(text.find("\"member\": true") != std::string::npos);
}
