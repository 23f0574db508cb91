#include "core/potential.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "core/torus.hpp"

namespace qpmsa {

namespace {
constexpr int kGridPoints = 1000;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

PotentialProfile::PotentialProfile(std::string name, Fn v, Fn dv, Fn ddv, double sup_bound,
                                   double critical_radius)
    : name_(std::move(name)),
      v_(std::move(v)),
      dv_(std::move(dv)),
      ddv_(std::move(ddv)),
      m1_(sup_bound),
      a_(critical_radius) {
  if (!(a_ > 0.0 && a_ < 0.1))
    throw std::invalid_argument("PotentialProfile: critical radius must lie in (0, 1/10)");
  for (int k = 0; k < kGridPoints; ++k) {
    const double t = static_cast<double>(k) / kGridPoints;
    if (std::abs(v_(t) - v_(-t)) > 1e-12)
      throw std::invalid_argument("PotentialProfile '" + name_ + "': not even at t=" +
                                  std::to_string(t));
    const bool near_critical = torus_norm(t) < a_ || torus_norm(t - 0.5) < a_;
    if (near_critical) {
      if (!(std::abs(ddv_(t)) > 3.0))
        throw std::invalid_argument("PotentialProfile '" + name_ +
                                    "': |v''| <= 3 near critical point, t=" + std::to_string(t));
    } else {
      if (!(std::abs(dv_(t)) > 3.0))
        throw std::invalid_argument("PotentialProfile '" + name_ +
                                    "': |v'| <= 3 away from critical points, t=" +
                                    std::to_string(t));
    }
    const double mx = std::max({std::abs(v_(t)), std::abs(dv_(t)), std::abs(ddv_(t))});
    if (m1_ < mx)
      throw std::invalid_argument("PotentialProfile '" + name_ + "': sup bound below grid value");
  }
}

PotentialProfile PotentialProfile::cosine() {
  return PotentialProfile(
      "cos", [](double t) { return std::cos(kTwoPi * t); },
      [](double t) { return -kTwoPi * std::sin(kTwoPi * t); },
      [](double t) { return -kTwoPi * kTwoPi * std::cos(kTwoPi * t); },
      kTwoPi * kTwoPi + 1e-9, 0.09);
}

PotentialProfile PotentialProfile::perturbed_cosine() {
  const double c = 0.05;
  return PotentialProfile(
      "cos2",
      [c](double t) { return std::cos(kTwoPi * t) + c * std::cos(2.0 * kTwoPi * t); },
      [c](double t) {
        return -kTwoPi * std::sin(kTwoPi * t) - 2.0 * kTwoPi * c * std::sin(2.0 * kTwoPi * t);
      },
      [c](double t) {
        return -kTwoPi * kTwoPi * std::cos(kTwoPi * t) -
               4.0 * kTwoPi * kTwoPi * c * std::cos(2.0 * kTwoPi * t);
      },
      1.2 * kTwoPi * kTwoPi + 1e-9, 0.0995);
}

PotentialProfile PotentialProfile::by_name(const std::string& name) {
  if (name == "cos") return cosine();
  if (name == "cos2") return perturbed_cosine();
  throw std::invalid_argument("unknown potential '" + name + "' (expected cos or cos2)");
}

}  // namespace qpmsa
