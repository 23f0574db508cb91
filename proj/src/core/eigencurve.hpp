#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "core/operator.hpp"

namespace qpmsa {

// A C^2 family theta -> H(theta) with its first two derivative families.
// Lattice blocks provide diagonal derivatives; toy families (2x2 models) plug
// in directly.
struct ThetaFamily {
  int size = 0;
  std::function<Eigen::MatrixXd(double)> h;
  std::function<Eigen::MatrixXd(double)> h1;
  std::function<Eigen::MatrixXd(double)> h2;
};

ThetaFamily lattice_theta_family(const OperatorFactory& factory);

struct BranchSample {
  double theta = 0.0;
  double value = 0.0;
  Eigen::VectorXd psi;
  double gap_to_rest = 0.0;  // distance of the windowed group to the other eigenvalues
};

struct CrossingInfo {
  double theta_c = 0.0;
  double min_gap = 0.0;
  bool touch = false;  // gap below the degeneracy threshold
};

struct EigenBranch {
  std::vector<BranchSample> samples;
  char cls = '?';                        // 'A' single branch, 'B' paired
  std::optional<double> symmetry_point;  // theta_s when known
  std::optional<CrossingInfo> crossing;
  double min_overlap = 1.0;  // min |<psi_k, psi_{k+1}>| along the branch
};

struct TraceOptions {
  int base_grid = 512;
  double degeneracy_threshold_scale = 1e-10;  // crossing when gap < scale * |E|-scale
  double min_step = 1e-12;
  double overlap_floor = 0.9;
};

struct TraceResult {
  std::vector<EigenBranch> branches;  // 1 or 2
  double min_gap = 0.0;               // min |E - EE| over the grid (2-branch case)
  double min_gap_theta = 0.0;
  double outer_gap = 0.0;             // min distance of the group to the rest of the spectrum
  std::optional<CrossingInfo> crossing;
};

// Follows the eigenvalue group inside |E - e_center| < e_halfwidth over
// [theta_lo, theta_hi]. Exactly one or two eigenvalues must stay in the window
// across the whole interval; a third intruder raises std::runtime_error naming
// it. Eigenvectors are overlap-matched with the leading significant component
// of the first sample fixed positive.
TraceResult trace_branches(const ThetaFamily& family, double theta_lo, double theta_hi,
                           double e_center, double e_halfwidth, const TraceOptions& opt = {});

// d/dtheta E = <psi, H'(theta) psi> for a simple eigenvalue.
double derivative_first(const ThetaFamily& family, double theta, const Eigen::VectorXd& psi);

struct SecondDerivative {
  double value = 0.0;       // full d^2E/dtheta^2
  double curvature_term = 0.0;   // <psi, H'' psi>
  double dominant = 0.0;    // 2 <psi, H' Psi>^2 / (E - EE), two-level mode only
  double remainder = 0.0;   // -2 <H'psi, G_perp(perp) H'psi>
  double solve_residual = 0.0;
};

// Full mode: <psi,H''psi> - 2 <H'psi, G^perp(E) H'psi> via a deflated
// projected solve. Two-level mode splits the partner contribution out through
// G^{perp perp}.
SecondDerivative derivative_second(const ThetaFamily& family, double theta, double energy,
                                   const Eigen::VectorXd& psi);
SecondDerivative derivative_second_two_level(const ThetaFamily& family, double theta,
                                             double energy, const Eigen::VectorXd& psi,
                                             double partner_energy,
                                             const Eigen::VectorXd& partner_psi);

struct DerivativeGroup {
  double lower = 0.0;
  double upper = 0.0;
  Eigen::MatrixXd basis;      // n x 2 orthonormal basis of the near-eigenspace
  Eigen::Matrix2d projected;  // P H' P in that basis
};

// Kato derivative group at a double eigenvalue: eigenvalues of P H'(theta_c) P
// on the two-dimensional near-eigenspace around e_center. Raises when the
// degeneracy dimension differs from 2.
DerivativeGroup crossing_derivative_group(const ThetaFamily& family, double theta_c,
                                          double e_center, double degeneracy_tol);

struct ParitySplit {
  Eigen::VectorXd symmetric;
  Eigen::VectorXd antisymmetric;
  double commutator_norm = 0.0;  // max |[R, H]|
};

// Splits a two-dimensional near-eigenspace of a block symmetric about center2
// into one reflection-symmetric and one antisymmetric vector. Raises when the
// block is not reflection invariant, when [R, H] is large, or when the space
// is parity-pure.
ParitySplit symmetric_antisymmetric_split(const LatticeRegion& region, const HalfSite& center2,
                                          const Eigen::MatrixXd& h_at_theta_s,
                                          const Eigen::MatrixXd& basis);

// Reflection permutation x -> 2c - x as a matrix; raises unless the region is
// symmetric about center2.
Eigen::MatrixXd reflection_matrix(const LatticeRegion& region, const HalfSite& center2);

struct MorseReport {
  bool applicable = false;
  std::string reason;           // set when inapplicable
  bool lower_bound_ok = false;  // |E(t2)-E(t1)| >= min(|t2-t1|, |t2+t1-2ts|)^2 / 2
  double worst_pair_ratio = 0.0;
  bool derivative_bound_ok = false;  // |E'| >= min(delta, |t - ts|)
  double worst_derivative_margin = 0.0;
  double symmetry_defect = 0.0;
  bool pass() const { return applicable && lower_bound_ok && derivative_bound_ok; }
};

// Checks the hypothesis (|E'| <= delta implies |E''| >= 2 with one sign) by
// finite differences on a uniform sample of E, then both conclusions.
// A failed hypothesis reports inapplicable rather than failure.
MorseReport check_morse_property(const std::vector<double>& thetas,
                                 const std::vector<double>& values, double theta_s, double delta);

struct SeparationReport {
  bool pass = true;
  double worst_ratio = 0.0;  // min |E - EE| / (delta_prev^2 |theta - theta_s|)
  double worst_theta = 0.0;
  int samples = 0;
};

// |E(theta) - EE(theta)| >= delta_prev^2 |theta - theta_s| on all samples.
SeparationReport check_separation_growth(const EigenBranch& a, const EigenBranch& b,
                                         double theta_s, double delta_prev);

}  // namespace qpmsa
