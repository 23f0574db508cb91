#pragma once

#include <optional>
#include <vector>

#include "core/geometry.hpp"

namespace qpmsa {

// Distance to the nearest integer, in [0, 1/2].
double torus_norm(double t);
// Reduce into [0, 1).
double wrap_unit(double t);

// A phase on T = R/Z. Addition and negation are mod 1.
class TorusPhase {
 public:
  TorusPhase() = default;
  explicit TorusPhase(double v) : value_(wrap_unit(v)) {}
  double value() const { return value_; }
  TorusPhase operator+(const TorusPhase& o) const { return TorusPhase(value_ + o.value_); }
  TorusPhase operator+(double o) const { return TorusPhase(value_ + o); }
  TorusPhase operator-() const { return TorusPhase(-value_); }
  // Torus distance ||a - b||, in [0, 1/2].
  double dist(const TorusPhase& o) const { return torus_norm(value_ - o.value_); }

 private:
  double value_ = 0.0;
};

struct DiophantineReport {
  bool pass = false;
  int radius = 0;
  // min over 0 < ||x||_1 <= radius of ||x.omega|| * ||x||_1^tau
  double worst_ratio = 0.0;
  Site worst_x{};
  // first x (lexicographic scan order) violating the bound, if any
  std::optional<Site> first_violation;
};

// Frequency vector in [0,1)^d with Diophantine constants. The invariant
// ||x.omega|| >= gamma / ||x||_1^tau is exhaustively checked up to
// verified_radius; verified() runs the scan and stamps the radius.
class FrequencyVector {
 public:
  FrequencyVector(int dim, std::vector<double> components, double tau, double gamma);

  int dim() const { return dim_; }
  double component(int i) const { return comp_[i]; }
  double tau() const { return tau_; }
  double gamma() const { return gamma_; }
  int verified_radius() const { return verified_radius_; }

  double dot(const Site& x) const;
  // (x2/2) . omega for doubled points
  double dot_half(const HalfSite& x2) const;

  DiophantineReport verify(int radius) const;
  // Returns a copy with verified_radius = radius; throws std::runtime_error
  // if the scan fails.
  FrequencyVector verified(int radius) const;

  // Golden-mean frequency for d=1: omega = (sqrt(5)-1)/2.
  static FrequencyVector golden(double tau = 2.5, double gamma = 0.1);
  // Shipped defaults: d=1 golden mean, d=2 (sqrt2-1, sqrt3-1); tau = d+1.5,
  // gamma = 0.9 x the worst ratio observed over calibration_radius.
  static FrequencyVector default_for_dim(int dim, int calibration_radius = 100);

 private:
  int dim_;
  std::array<double, kMaxDim> comp_{};
  double tau_;
  double gamma_;
  int verified_radius_ = 0;
};

}  // namespace qpmsa
