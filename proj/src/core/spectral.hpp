#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "core/operator.hpp"

namespace qpmsa {

// Exact count of eigenvalues in [e_star - eta, e_star + eta].
int count_eigenvalues_window(const Eigen::MatrixXd& h, double e_star, double eta);

struct CountingLemmaReport {
  bool applicable = false;   // ||G_{Lambda'}(E*)|| <= 1/(2 eta) verified
  double sub_resolvent_norm = 0.0;
  int symmetric_difference = 0;  // M
  int count = 0;
  bool pass = false;  // count <= 3M
};

// Eigenvalue-counting bound: with ||G_{Lambda'}(E*)|| <= (2 eta)^{-1} and
// M = #(Lambda \ Lambda') + #(Lambda' \ Lambda), the operator on Lambda has at
// most 3M eigenvalues in [E*-eta, E*+eta]. Both restrictions are assembled
// from the same model data.
CountingLemmaReport check_counting_lemma(const LatticeRegion& lambda,
                                         const LatticeRegion& lambda_prime, TorusPhase theta,
                                         double epsilon, const PotentialProfile& v,
                                         const FrequencyVector& omega, double e_star, double eta);

struct IDSReport {
  int region_size = 0;
  double theta = 0.0;
  double e_star = 0.0;
  std::vector<double> etas;
  std::vector<double> increments;     // N(E*+eta) - N(E*-eta), normalized
  std::vector<int> counts;            // raw eigenvalue counts per window
  double fitted_slope = 0.0;          // log increment vs log eta, over usable windows
  int fit_windows = 0;
  bool monotone = true;
};

// Single eigensolve of H_Lambda(theta*), then window increments per eta. The
// slope fit uses only windows holding >= 5 eigenvalues.
IDSReport ids_window_scan(const OperatorSlice& op, double e_star, std::vector<double> etas);
// Same scan over an already-computed spectrum.
IDSReport ids_scan_spectrum(const Eigen::VectorXd& eigenvalues, int region_size, double theta,
                            double e_star, std::vector<double> etas);

struct MomentReport {
  double q = 0.0;
  std::vector<double> times;
  std::vector<double> per_time;   // sum_x (1+||x||)^q |<e^{itH} e_0, e_x>|
  double proxy = 0.0;             // t-free bound: sum_alpha (sum_x (1+||x||)^q |phi(x)|) |phi(0)|
  double sup_over_grid = 0.0;
  double worst_unitarity_defect = 0.0;  // max_t |sum_x |a_x(t)|^2 - 1|
  bool proxy_dominates = true;
};

// Spectral-decomposition moments of the evolved state e^{itH} e_0. The region
// must contain the origin. Default time grid: {0} and 2^k for k = -10..20.
MomentReport moment_sum(const OperatorSlice& op, double q, std::vector<double> times = {});

struct ArithmeticSetReport {
  bool member = false;
  double a_constant = 0.0;
  int exponent = 0;     // d+1 (dynamical-localization set) or d+2 (complement test)
  int radius = 0;
  double worst_margin = 0.0;  // min ||2 theta + x.omega|| * ||x||^exponent / A
  Site worst_x{};
};

// theta in Theta_A iff ||2 theta + x.omega|| > A / ||x||_1^{d+1} for all
// 0 < ||x||_1 <= radius (exhaustive). exponent_shift 2 runs the d+2 variant.
ArithmeticSetReport arithmetic_set_membership(double theta, const FrequencyVector& omega, double a,
                                              int radius, int exponent_shift = 1);

struct EigenvectorDecay {
  Site center{};
  double rate = 0.0;       // least-squares slope of -log|psi| vs distance from the center
  double residual = 0.0;   // rms residual of the fit
  int support = 0;         // sites with |psi| > 1e-280
  bool single_support = false;
};

// Localization-center decay fit of a normalized vector on the region.
EigenvectorDecay decay_fit(const Eigen::VectorXd& psi, const LatticeRegion& region);

struct TrialFunctionReport {
  bool applicable = false;  // trials orthonormal and residuals <= delta
  std::string reason;
  int m = 0;
  double delta = 0.0;
  double sum_sq = 0.0;      // sum over the m nearest eigenvalues of (E_k - E*)^2
  bool pass = false;        // sum_sq <= m delta^2
  bool corollary_pass = false;  // m=1: |E-E*| <= delta; m=2: two within sqrt(2) delta
};

// m orthonormal trials with ||(H - E*) psi_k|| <= delta certify m eigenvalues
// with sum (E_k - E*)^2 <= m delta^2.
TrialFunctionReport check_trial_function_lemma(const Eigen::MatrixXd& h,
                                               const Eigen::MatrixXd& trials, double e_star,
                                               double delta);

}  // namespace qpmsa
