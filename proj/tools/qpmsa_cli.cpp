// Command-line driver. Parses run configs, forwards everything through the
// public C API, and exits nonzero when a config is invalid or a theorem check
// failed. JSON/CSV reports go to --out-dir; the summary goes to stdout.

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "qpmsa.h"

namespace {

struct ConfigGuard {
  qpmsa_config* cfg = qpmsa_config_create();
  ~ConfigGuard() { qpmsa_config_destroy(cfg); }
};

int fail(const char* what) {
  std::fprintf(stderr, "error: %s: %s\n", what, qpmsa_last_error());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qpmsa: quasi-periodic Schroedinger operator analysis"};
  app.require_subcommand(1);

  std::string config_file, schedule_file, out_dir, potential, e_star_mode, region_shape;
  std::vector<std::string> sets;
  int dim = -1, radius = -1, stages = -1, threads = -1, eta_count = -1;
  long long seed = -1;
  double epsilon = -1, theta_star = -1e300, e_star = -1e300;
  double moment_q = -1, moment_a = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_file, "JSON or TOML config file");
    cmd->add_option("--dim", dim, "lattice dimension d");
    cmd->add_option("--epsilon", epsilon, "hopping strength");
    cmd->add_option("--potential", potential, "potential id: cos or cos2");
    cmd->add_option("--theta-star", theta_star, "reference phase");
    cmd->add_option("--e-star", e_star, "reference energy (or nearest-eigenvalue target)");
    cmd->add_option("--e-star-mode", e_star_mode, "nearest | explicit");
    cmd->add_option("--radius", radius, "region radius");
    cmd->add_option("--region-shape", region_shape, "box | ball");
    cmd->add_option("--stages", stages, "induction stages to run");
    cmd->add_option("--schedule-file", schedule_file, "JSON/TOML file with schedule overrides");
    cmd->add_option("--out-dir", out_dir, "output directory");
    cmd->add_option("--seed", seed, "seed for randomized sweeps");
    cmd->add_option("--threads", threads, "worker threads (0 = all)");
    cmd->add_option("--set", sets, "extra dotted-key override, key=value")->take_all();
  };

  CLI::App* c_assemble = app.add_subcommand("assemble", "assemble H and verify its invariants");
  CLI::App* c_msa = app.add_subcommand("msa", "run the multi-scale induction");
  CLI::App* c_curve = app.add_subcommand("curve", "trace eigenvalue branches of a resonant block");
  CLI::App* c_ids = app.add_subcommand("ids", "integrated density of states window scan");
  CLI::App* c_moments = app.add_subcommand("moments", "dynamical-localization moment sums");
  CLI::App* c_verify = app.add_subcommand("verify-all", "run every property suite");
  for (CLI::App* c : {c_assemble, c_msa, c_curve, c_ids, c_moments, c_verify}) add_common(c);
  c_ids->add_option("--eta-count", eta_count, "number of eta windows");
  c_moments->add_option("--q", moment_q, "moment exponent q");
  c_moments->add_option("--A", moment_a, "arithmetic-set constant A");

  CLI11_PARSE(app, argc, argv);

  ConfigGuard guard;
  if (!guard.cfg) return fail("config allocation");

  if (!config_file.empty() && qpmsa_config_load_file(guard.cfg, config_file.c_str()) != QPMSA_OK)
    return fail("loading config");
  if (!schedule_file.empty()) {
    // a schedule file only carries the schedule table
    ConfigGuard tmp;
    if (qpmsa_config_load_file(tmp.cfg, schedule_file.c_str()) != QPMSA_OK)
      return fail("loading schedule file");
    char* dump = nullptr;
    if (qpmsa_config_dump(tmp.cfg, &dump) != QPMSA_OK) return fail("reading schedule file");
    // copy only schedule.* keys through the string interface
    std::string text(dump);
    qpmsa_string_free(dump);
    const auto pos = text.find("\"schedule\"");
    if (pos != std::string::npos) {
      const auto open = text.find('{', pos);
      const auto close = text.find('}', open);
      if (open != std::string::npos && close != std::string::npos)
        if (qpmsa_config_set(guard.cfg, "schedule",
                             text.substr(open, close - open + 1).c_str()) != QPMSA_OK)
          return fail("applying schedule override");
    }
  }

  auto set_if = [&](const char* key, const std::string& value) {
    if (value.empty()) return true;
    if (qpmsa_config_set(guard.cfg, key, value.c_str()) != QPMSA_OK) {
      fail(key);
      return false;
    }
    return true;
  };
  const std::string exp_name = app.get_subcommands().front()->get_name();
  if (!set_if("experiment", "\"" + exp_name + "\"")) return 1;
  if (dim >= 0 && !set_if("dim", std::to_string(dim))) return 1;
  if (epsilon >= 0 && !set_if("epsilon", std::to_string(epsilon))) return 1;
  if (!potential.empty() && !set_if("potential", "\"" + potential + "\"")) return 1;
  if (theta_star > -1e299 && !set_if("theta_star", std::to_string(theta_star))) return 1;
  if (e_star > -1e299 && !set_if("e_star", std::to_string(e_star))) return 1;
  if (!e_star_mode.empty() && !set_if("e_star_mode", "\"" + e_star_mode + "\"")) return 1;
  if (radius >= 0 && !set_if("radius", std::to_string(radius))) return 1;
  if (!region_shape.empty() && !set_if("region_shape", "\"" + region_shape + "\"")) return 1;
  if (stages >= 0 && !set_if("stages", std::to_string(stages))) return 1;
  if (!out_dir.empty() && !set_if("out_dir", "\"" + out_dir + "\"")) return 1;
  if (seed >= 0 && !set_if("seed", std::to_string(seed))) return 1;
  if (threads >= 0 && !set_if("threads", std::to_string(threads))) return 1;
  if (eta_count > 0 && !set_if("ids.eta_count", std::to_string(eta_count))) return 1;
  if (moment_q >= 0 && !set_if("moments.q", std::to_string(moment_q))) return 1;
  if (moment_a >= 0 && !set_if("moments.A", std::to_string(moment_a))) return 1;
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return 1;
    }
    if (!set_if(kv.substr(0, eq).c_str(), kv.substr(eq + 1))) return 1;
  }

  const qpmsa_status st = qpmsa_run(guard.cfg);
  if (st == QPMSA_OK) return 0;
  if (st == QPMSA_ERR_CHECK_FAILED) {
    std::fprintf(stderr, "one or more checks failed\n");
    return 2;
  }
  return fail("run");
}
