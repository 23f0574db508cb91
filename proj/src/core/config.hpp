#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace qpmsa {

// One named experiment with its full parameter set. Everything that affects
// results lives here so a run can be reproduced from the manifest alone.
struct RunConfig {
  std::string experiment = "verify-all";  // assemble | msa | curve | ids | moments | verify-all

  // model
  int dim = 1;
  double epsilon = 1e-6;
  std::string potential = "cos";
  std::vector<double> omega;  // empty = shipped default for dim
  double tau = 0.0;           // 0 = dim + 1.5
  double gamma = 0.0;         // 0 = calibrate as 0.9 x worst observed ratio
  int frequency_verify_radius = 100;

  // target
  double theta_star = 0.17;
  double e_star = 0.5;
  std::string e_star_mode = "nearest";  // nearest (reference-box eigenvalue) | explicit
  int radius = 200;
  std::string region_shape = "box";  // box | ball
  std::vector<std::vector<int>> explicit_sites;

  // schedule
  int stages = 2;
  long long l1 = 3;
  // Desk-scale default: the honest epsilon^{1/20} is order-1 at workable
  // epsilon, which floods Q_0; 0 requests the honest rule.
  double delta0 = 0.04;
  double delta_ratio = 20.0;
  double delta_floor = 1e-12;
  long long length_cap = 0;  // 0 = region radius

  // ids
  double ids_eta_min = 1e-6;
  double ids_eta_max = 1e-2;
  int ids_eta_count = 25;

  // moments
  double moment_q = 2.0;
  double moment_a = 0.1;
  int moment_arith_radius = 1000;
  int moment_radius = 100;
  double moment_theta = 0.495;

  // curve
  int curve_grid = 512;

  // verify-all trial counts
  int resolvent_triples = 100;
  int derivative_blocks = 200;
  int blockgeo_configs = 500;
  int counting_instances = 10000;
  int trial_instances = 1000;

  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  // Dispatch on extension: .json or .toml (flat key = value subset with
  // [section] headers).
  static RunConfig from_file(const std::string& path);
  // Set a single dotted key ("schedule.l1", "epsilon", ...) from a string.
  void set_key(const std::string& key, const std::string& value);
};

// Minimal TOML-subset reader: [section] headers, key = value with numbers,
// booleans, quoted strings and flat arrays. Returns the equivalent JSON.
nlohmann::json toml_subset_to_json(const std::string& text);

}  // namespace qpmsa
