#include "core/torus.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qpmsa {

double torus_norm(double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("torus_norm: non-finite input");
  double d = std::abs(t - std::round(t));
  return d;
}

double wrap_unit(double t) {
  double w = t - std::floor(t);
  if (w >= 1.0) w -= 1.0;  // guard against floor rounding at exact integers
  return w;
}

FrequencyVector::FrequencyVector(int dim, std::vector<double> components, double tau, double gamma)
    : dim_(dim), tau_(tau), gamma_(gamma) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("FrequencyVector: bad dimension");
  if (static_cast<int>(components.size()) != dim)
    throw std::invalid_argument("FrequencyVector: component count mismatch");
  if (gamma <= 0.0) throw std::invalid_argument("FrequencyVector: gamma must be positive");
  for (int i = 0; i < dim; ++i) comp_[i] = wrap_unit(components[i]);
}

double FrequencyVector::dot(const Site& x) const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += x[i] * comp_[i];
  return s;
}

double FrequencyVector::dot_half(const HalfSite& x2) const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += 0.5 * x2[i] * comp_[i];
  return s;
}

namespace {
// Enumerate all x with 0 < ||x||_1 <= radius via an odometer over the box,
// filtering by the l1 norm.
template <typename F>
void for_each_l1(int dim, int radius, F&& f) {
  std::vector<int> off(dim, -radius);
  Site x{};
  while (true) {
    int n = 0;
    for (int i = 0; i < dim; ++i) n += std::abs(off[i]);
    if (n > 0 && n <= radius) {
      for (int i = 0; i < dim; ++i) x[i] = off[i];
      f(x);
    }
    int k = dim - 1;
    while (k >= 0 && ++off[k] > radius) off[k--] = -radius;
    if (k < 0) break;
  }
}
}  // namespace

DiophantineReport FrequencyVector::verify(int radius) const {
  if (radius < 1) throw std::invalid_argument("verify_diophantine: radius must be >= 1");
  DiophantineReport rep;
  rep.radius = radius;
  rep.pass = true;
  rep.worst_ratio = std::numeric_limits<double>::infinity();
  for_each_l1(dim_, radius, [&](const Site& x) {
    const double n1 = static_cast<double>(l1_norm(x, dim_));
    const double ratio = torus_norm(dot(x)) * std::pow(n1, tau_);
    if (ratio < rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst_x = x;
    }
    if (ratio < gamma_ && rep.pass) {
      rep.pass = false;
      rep.first_violation = x;
    }
  });
  return rep;
}

FrequencyVector FrequencyVector::verified(int radius) const {
  DiophantineReport rep = verify(radius);
  if (!rep.pass)
    throw std::runtime_error("FrequencyVector: Diophantine check failed at x = " +
                             site_to_string(*rep.first_violation, dim_));
  FrequencyVector out = *this;
  out.verified_radius_ = radius;
  return out;
}

FrequencyVector FrequencyVector::golden(double tau, double gamma) {
  return FrequencyVector(1, {(std::sqrt(5.0) - 1.0) / 2.0}, tau, gamma);
}

FrequencyVector FrequencyVector::default_for_dim(int dim, int calibration_radius) {
  std::vector<double> comp;
  switch (dim) {
    case 1:
      comp = {(std::sqrt(5.0) - 1.0) / 2.0};
      break;
    case 2:
      comp = {std::sqrt(2.0) - 1.0, std::sqrt(3.0) - 1.0};
      break;
    default:
      // square roots of consecutive primes, fractional parts
      comp = {std::sqrt(2.0) - 1.0, std::sqrt(3.0) - 1.0, std::sqrt(5.0) - 2.0, std::sqrt(7.0) - 2.0};
      comp.resize(dim);
      break;
  }
  const double tau = dim + 1.5;
  FrequencyVector probe(dim, comp, tau, 1e-12);
  DiophantineReport rep = probe.verify(calibration_radius);
  return FrequencyVector(dim, comp, tau, 0.9 * rep.worst_ratio).verified(calibration_radius);
}

}  // namespace qpmsa
