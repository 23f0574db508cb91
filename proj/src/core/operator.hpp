#pragma once

#include <Eigen/Dense>

#include "core/geometry.hpp"
#include "core/potential.hpp"
#include "core/torus.hpp"

namespace qpmsa {

// Dense symmetric finite-volume operator H_Lambda(theta) together with its
// provenance. Diagonal entry at site x is v(theta + x.omega mod 1); the
// off-diagonal is epsilon exactly at nearest-neighbor pairs and 0 otherwise.
struct OperatorSlice {
  Eigen::MatrixXd matrix;
  LatticeRegion region;
  TorusPhase theta;
  double epsilon = 0.0;
  PotentialProfile potential;
  FrequencyVector frequency;
};

// Rejects epsilon < 0 and empty regions.
OperatorSlice assemble(const LatticeRegion& region, TorusPhase theta, double epsilon,
                       const PotentialProfile& v, const FrequencyVector& omega);

// Region-bound family theta -> H(theta) plus the diagonal derivative matrices
// V'(theta), V''(theta) used by the perturbation formulas.
class OperatorFactory {
 public:
  OperatorFactory(LatticeRegion region, double epsilon, PotentialProfile v, FrequencyVector omega);

  const LatticeRegion& region() const { return region_; }
  double epsilon() const { return epsilon_; }
  const PotentialProfile& potential() const { return v_; }
  const FrequencyVector& frequency() const { return omega_; }

  OperatorSlice slice(TorusPhase theta) const;
  Eigen::MatrixXd matrix(double theta) const;
  Eigen::VectorXd diag_d1(double theta) const;  // v'(theta + x.omega)
  Eigen::VectorXd diag_d2(double theta) const;  // v''(theta + x.omega)

 private:
  LatticeRegion region_;
  double epsilon_;
  PotentialProfile v_;
  FrequencyVector omega_;
  Eigen::MatrixXd hopping_;  // epsilon * Delta on the region, fixed
};

}  // namespace qpmsa
