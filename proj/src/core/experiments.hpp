#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/config.hpp"
#include "core/msa.hpp"
#include "core/spectral.hpp"

namespace qpmsa {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Property suites shared by `verify-all` and the acceptance harness. Every
// randomized sweep is reproducible from the seed.
std::vector<Check> suite_exact_formula(std::uint64_t seed, int triples, int threads = 0);
std::vector<Check> suite_derivative_formulas(std::uint64_t seed, int blocks, int threads = 0);
std::vector<Check> suite_kato_crossing();
std::vector<Check> suite_block_geometry(std::uint64_t seed, int configs, int threads = 0);
std::vector<Check> suite_counting_and_trial(std::uint64_t seed, int counting_instances,
                                            int trial_instances, int threads = 0);
std::vector<Check> suite_morse();

// End-to-end artifacts of one msa run, reused by the localization-decay and
// moment criteria.
struct MsaArtifacts {
  nlohmann::json trace;           // per-stage record
  nlohmann::json green_reports;   // bound checks executed during the run
  std::vector<Check> checks;
  double e_star = 0.0;            // resolved reference energy
  double gamma0 = 0.0;
  double median_decay_rate = 0.0; // over the 20 eigenvectors nearest E*
  ScaleState state;
};

MsaArtifacts run_msa_experiment(const RunConfig& cfg);

struct CurveArtifacts {
  std::vector<Check> checks;
  // branches.csv rows: theta, E, dE_formula, dE_fd, gap, class
  std::vector<std::array<double, 5>> rows;
  std::vector<char> row_class;
  nlohmann::json info;
};

CurveArtifacts run_curve_experiment(const RunConfig& cfg);

struct IdsArtifacts {
  std::vector<Check> checks;
  IDSReport report;
};

IdsArtifacts run_ids_experiment(const RunConfig& cfg);

struct MomentArtifacts {
  std::vector<Check> checks;
  MomentReport report;
  ArithmeticSetReport membership;
};

MomentArtifacts run_moments_experiment(const RunConfig& cfg);

// Dispatches on cfg.experiment, writes manifest.json, report files and
// summary.txt under cfg.out_dir. Returns the process exit status: 0 when all
// executed checks pass, 2 on a failed check, 1 on configuration errors.
int run_experiment(const RunConfig& cfg);

// Shared helpers.
LatticeRegion region_from_config(const RunConfig& cfg);
FrequencyVector frequency_from_config(const RunConfig& cfg);
Model model_from_config(const RunConfig& cfg);

}  // namespace qpmsa
