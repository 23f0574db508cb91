#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "core/operator.hpp"

namespace qpmsa {

// Thrown when E is too close to the spectrum for a reliable solve.
class NearSingularError : public std::runtime_error {
 public:
  NearSingularError(double dist, double energy)
      : std::runtime_error("green: E within " + std::to_string(dist) +
                           " of the spectrum (E = " + std::to_string(energy) + ")"),
        dist_to_spectrum(dist),
        energy(energy) {}
  double dist_to_spectrum;
  double energy;
};

struct GreenSolve {
  Eigen::MatrixXd G;
  double residual = 0.0;  // max |(H - E)G - I|
};

// Eigenvalues of a symmetric matrix, ascending.
Eigen::VectorXd spectrum(const Eigen::MatrixXd& h);
double dist_to_spectrum(const Eigen::MatrixXd& h, double energy);

// (H - E)^{-1} by dense LU with residual check. Throws NearSingularError when
// dist(sigma(H), E) < 1e-12 * ||H|| or the residual is gross. The LU route is
// used deliberately: it preserves genuine exponential tails far below the
// eigendecomposition noise floor.
GreenSolve green(const OperatorSlice& op, double energy);
GreenSolve green_matrix(const Eigen::MatrixXd& h, double energy);

struct DecayFit {
  double rate = 0.0;           // slope of -log|G(x,y)| vs ||x-y||_1
  double intercept = 0.0;
  int pairs = 0;               // pairs entering the fit
  bool single_support = false; // no off-center mass at all
};

// Least squares on (||x-y||_1, -log|G(x,y)|) over entries with |G| > 1e-300
// and distance >= cutoff.
DecayFit fit_offdiag_decay(const Eigen::MatrixXd& g, const LatticeRegion& region, int cutoff);

struct GreenFunctionReport {
  double energy = 0.0;
  double theta = 0.0;
  double op_norm = 0.0;        // = 1/dist(sigma(H), E) for symmetric H
  double norm_bound = 0.0;     // asserted bound on ||G||
  bool norm_ok = false;
  double rate = 0.0;           // asserted decay rate
  int cutoff = 1;              // distances >= cutoff enter the decay check
  double max_violation = 0.0;  // worst |G(x,y)| * e^{rate * ||x-y||_1}, <= 1 when decay holds
  bool decay_ok = false;
  double gamma_hat = 0.0;      // fitted decay rate
  double schur_row_sum = 0.0;  // sup_x sum_y |G(x,y)|
  double residual = 0.0;
  bool pass() const { return norm_ok && decay_ok; }
};

// Bounds for 0-good sets: ||G|| <= 10/delta0 and |G(x,y)| <= e^{-gamma0 ||x-y||_1}
// for x != y, gamma0 = |log eps|/2. The caller guarantees 0-goodness
// (|v(theta + x.omega) - E*| >= delta0 on every site); violations are
// reported, not thrown.
GreenFunctionReport check_zero_good_bounds(const OperatorSlice& op, double e_star, double delta0);

// Same shape, custom bounds: ||G|| <= norm_bound, |G(x,y)| <= e^{-rate d} for
// d >= cutoff.
GreenFunctionReport check_green_bounds(const OperatorSlice& op, double energy, double norm_bound,
                                       double rate, int cutoff);

// Verifies G_outer(x,y) = G_sub(x,y) chi_sub(y) + sum_{(z,z')} G_sub(x,z) eps G_outer(z',y)
// over all x in sub, y in outer. Returns the max absolute residual.
double check_resolvent_identity(const OperatorSlice& outer, const LatticeRegion& sub,
                                double energy);

// Eigenvector of the eigenvalue nearest `energy`, by shifted inverse
// iteration seeded at `seed_index`. Unlike dense eigensolver output, the
// solve route keeps exponential tails multiplicatively accurate far below
// the 1e-16 mixing floor, which the decay fits rely on.
Eigen::VectorXd localized_eigenvector(const Eigen::MatrixXd& h, double energy, int seed_index,
                                      int iterations = 2);

}  // namespace qpmsa
