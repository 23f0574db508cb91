#include "qpmsa.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "core/experiments.hpp"
#include "core/green.hpp"

// C wrapper over the core library: opaque handles, status codes, thread-local
// last-error message.

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename F>
qpmsa_status guarded(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return QPMSA_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    set_error(e.what());
    return QPMSA_ERR_RUNTIME;
  } catch (...) {
    set_error("unknown error");
    return QPMSA_ERR_RUNTIME;
  }
}

qpmsa::FrequencyVector make_frequency(int dim, const double* omega, double tau, double gamma) {
  if (!omega) return qpmsa::FrequencyVector::default_for_dim(dim, 30);
  std::vector<double> comp(omega, omega + dim);
  return qpmsa::FrequencyVector(dim, comp, tau > 0 ? tau : dim + 1.5,
                                gamma > 0 ? gamma : 1e-12);
}

}  // namespace

struct qpmsa_config {
  qpmsa::RunConfig cfg;
};

struct qpmsa_operator {
  qpmsa::OperatorSlice op;
};

extern "C" {

const char* qpmsa_version(void) { return "0.1.0"; }

const char* qpmsa_last_error(void) { return g_last_error.c_str(); }

void qpmsa_string_free(char* s) { std::free(s); }

qpmsa_config* qpmsa_config_create(void) { return new (std::nothrow) qpmsa_config{}; }

void qpmsa_config_destroy(qpmsa_config* cfg) { delete cfg; }

qpmsa_status qpmsa_config_load_file(qpmsa_config* cfg, const char* path) {
  if (!cfg || !path) {
    set_error("null argument");
    return QPMSA_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    cfg->cfg = qpmsa::RunConfig::from_file(path);
    return QPMSA_OK;
  });
}

qpmsa_status qpmsa_config_set(qpmsa_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) {
    set_error("null argument");
    return QPMSA_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    cfg->cfg.set_key(key, value);
    return QPMSA_OK;
  });
}

qpmsa_status qpmsa_config_dump(const qpmsa_config* cfg, char** json_out) {
  if (!cfg || !json_out) {
    set_error("null argument");
    return QPMSA_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *json_out = dup_string(cfg->cfg.to_json().dump(2));
    return *json_out ? QPMSA_OK : QPMSA_ERR_RUNTIME;
  });
}

qpmsa_status qpmsa_run(const qpmsa_config* cfg) {
  if (!cfg) {
    set_error("null config");
    return QPMSA_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const int rc = qpmsa::run_experiment(cfg->cfg);
    if (rc == 0) return QPMSA_OK;
    if (rc == 2) {
      set_error("one or more checks failed; see summary.txt");
      return QPMSA_ERR_CHECK_FAILED;
    }
    set_error("configuration error");
    return QPMSA_ERR_INVALID_ARGUMENT;
  });
}

qpmsa_operator* qpmsa_operator_create_box(int dim, double epsilon, const char* potential,
                                          const double* omega, double tau, double gamma,
                                          double theta, const int* center, int radius) {
  qpmsa_operator* out = nullptr;
  const qpmsa_status st = guarded([&] {
    if (dim < 1 || dim > qpmsa::kMaxDim) throw std::invalid_argument("bad dimension");
    qpmsa::Site c{};
    if (center)
      for (int i = 0; i < dim; ++i) c[i] = center[i];
    const qpmsa::LatticeRegion region = qpmsa::LatticeRegion::box(dim, c, radius);
    const qpmsa::PotentialProfile v = qpmsa::PotentialProfile::by_name(potential ? potential : "cos");
    const qpmsa::FrequencyVector freq = make_frequency(dim, omega, tau, gamma);
    out = new qpmsa_operator{
        qpmsa::assemble(region, qpmsa::TorusPhase(theta), epsilon, v, freq)};
    return QPMSA_OK;
  });
  return st == QPMSA_OK ? out : nullptr;
}

void qpmsa_operator_destroy(qpmsa_operator* op) { delete op; }

int qpmsa_operator_size(const qpmsa_operator* op) {
  return op ? op->op.region.size() : 0;
}

qpmsa_status qpmsa_operator_matrix(const qpmsa_operator* op, double* out) {
  if (!op || !out) {
    set_error("null argument");
    return QPMSA_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const int n = op->op.region.size();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] = op->op.matrix(i, j);
    return QPMSA_OK;
  });
}

qpmsa_status qpmsa_operator_eigenvalues(const qpmsa_operator* op, double* out) {
  if (!op || !out) {
    set_error("null argument");
    return QPMSA_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const Eigen::VectorXd ev = qpmsa::spectrum(op->op.matrix);
    for (int i = 0; i < ev.size(); ++i) out[i] = ev(i);
    return QPMSA_OK;
  });
}

qpmsa_status qpmsa_operator_green(const qpmsa_operator* op, double energy, double* out,
                                  double* residual_out) {
  if (!op || !out) {
    set_error("null argument");
    return QPMSA_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const qpmsa::GreenSolve gs = qpmsa::green(op->op, energy);
    const int n = op->op.region.size();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] = gs.G(i, j);
    if (residual_out) *residual_out = gs.residual;
    return QPMSA_OK;
  });
}

qpmsa_status qpmsa_torus_norm(double t, double* out) {
  if (!out) {
    set_error("null output");
    return QPMSA_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out = qpmsa::torus_norm(t);
    return QPMSA_OK;
  });
}

qpmsa_status qpmsa_verify_diophantine(int dim, const double* omega, double tau, double gamma,
                                      int radius, char** report_json_out) {
  if (!omega || !report_json_out) {
    set_error("null argument");
    return QPMSA_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const qpmsa::FrequencyVector freq(dim, std::vector<double>(omega, omega + dim),
                                      tau > 0 ? tau : dim + 1.5, gamma > 0 ? gamma : 1e-300);
    const qpmsa::DiophantineReport rep = freq.verify(radius);
    nlohmann::json j;
    j["pass"] = rep.pass;
    j["radius"] = rep.radius;
    j["worst_ratio"] = rep.worst_ratio;
    nlohmann::json wx = nlohmann::json::array();
    for (int i = 0; i < dim; ++i) wx.push_back(rep.worst_x[i]);
    j["worst_x"] = wx;
    if (rep.first_violation) {
      nlohmann::json fx = nlohmann::json::array();
      for (int i = 0; i < dim; ++i) fx.push_back((*rep.first_violation)[i]);
      j["first_violation"] = fx;
    }
    *report_json_out = dup_string(j.dump(2));
    return *report_json_out ? QPMSA_OK : QPMSA_ERR_RUNTIME;
  });
}

qpmsa_status qpmsa_arithmetic_membership(double theta, int dim, const double* omega, double a,
                                         int radius, char** report_json_out) {
  if (!omega || !report_json_out) {
    set_error("null argument");
    return QPMSA_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const qpmsa::FrequencyVector freq(dim, std::vector<double>(omega, omega + dim), dim + 1.5,
                                      1e-300);
    const qpmsa::ArithmeticSetReport rep =
        qpmsa::arithmetic_set_membership(theta, freq, a, radius, 1);
    nlohmann::json j;
    j["member"] = rep.member;
    j["A"] = rep.a_constant;
    j["exponent"] = rep.exponent;
    j["radius"] = rep.radius;
    j["worst_margin"] = rep.worst_margin;
    nlohmann::json wx = nlohmann::json::array();
    for (int i = 0; i < dim; ++i) wx.push_back(rep.worst_x[i]);
    j["worst_x"] = wx;
    *report_json_out = dup_string(j.dump(2));
    return *report_json_out ? QPMSA_OK : QPMSA_ERR_RUNTIME;
  });
}

}  // extern "C"
