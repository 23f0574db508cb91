#pragma once

#include <functional>
#include <string>

namespace qpmsa {

// 1-periodic even C^2 sampling function v with exactly two non-degenerate
// critical points (max at 0, min at 1/2). Construction verifies, on a
// 1000-point grid:
//   - evenness |v(t) - v(-t)| <= 1e-12,
//   - |v''| > 3 on ||t|| < a and ||t - 1/2|| < a,
//   - |v'| > 3 elsewhere,
//   - sup_bound >= max(|v|, |v'|, |v''|).
class PotentialProfile {
 public:
  using Fn = std::function<double(double)>;

  PotentialProfile(std::string name, Fn v, Fn dv, Fn ddv, double sup_bound,
                   double critical_radius);

  const std::string& name() const { return name_; }
  double eval(double theta) const { return v_(theta); }
  double eval_d1(double theta) const { return dv_(theta); }
  double eval_d2(double theta) const { return ddv_(theta); }
  double sup_bound() const { return m1_; }          // M_1
  double critical_radius() const { return a_; }     // a in (0, 1/10)

  // v = cos(2 pi t), a = 0.09
  static PotentialProfile cosine();
  // v = cos(2 pi t) + 0.05 cos(4 pi t), a = 0.0995
  static PotentialProfile perturbed_cosine();
  // "cos" or "cos2"; throws std::invalid_argument otherwise
  static PotentialProfile by_name(const std::string& name);

 private:
  std::string name_;
  Fn v_, dv_, ddv_;
  double m1_;
  double a_;
};

}  // namespace qpmsa
