#include "core/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

#include "core/green.hpp"

namespace qpmsa {

int count_eigenvalues_window(const Eigen::MatrixXd& h, double e_star, double eta) {
  const Eigen::VectorXd ev = spectrum(h);
  int c = 0;
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) >= e_star - eta && ev(i) <= e_star + eta) ++c;
  return c;
}

CountingLemmaReport check_counting_lemma(const LatticeRegion& lambda,
                                         const LatticeRegion& lambda_prime, TorusPhase theta,
                                         double epsilon, const PotentialProfile& v,
                                         const FrequencyVector& omega, double e_star, double eta) {
  CountingLemmaReport rep;
  const OperatorSlice sub = assemble(lambda_prime, theta, epsilon, v, omega);
  const double dist = dist_to_spectrum(sub.matrix, e_star);
  rep.sub_resolvent_norm = dist > 0 ? 1.0 / dist : std::numeric_limits<double>::infinity();
  rep.applicable = rep.sub_resolvent_norm <= 1.0 / (2.0 * eta);
  const LatticeRegion in_both = lambda.intersected(lambda_prime);
  rep.symmetric_difference =
      (lambda.size() - in_both.size()) + (lambda_prime.size() - in_both.size());
  if (!rep.applicable) return rep;
  const OperatorSlice full = assemble(lambda, theta, epsilon, v, omega);
  rep.count = count_eigenvalues_window(full.matrix, e_star, eta);
  rep.pass = rep.count <= 3 * rep.symmetric_difference;
  return rep;
}

IDSReport ids_window_scan(const OperatorSlice& op, double e_star, std::vector<double> etas) {
  return ids_scan_spectrum(spectrum(op.matrix), op.region.size(), op.theta.value(), e_star,
                           std::move(etas));
}

IDSReport ids_scan_spectrum(const Eigen::VectorXd& ev, int region_size, double theta,
                            double e_star, std::vector<double> etas) {
  IDSReport rep;
  rep.region_size = region_size;
  rep.theta = theta;
  rep.e_star = e_star;
  std::sort(etas.begin(), etas.end());
  rep.etas = etas;
  int prev_count = -1;
  for (double eta : etas) {
    int c = 0;
    for (int i = 0; i < ev.size(); ++i)
      if (ev(i) >= e_star - eta && ev(i) <= e_star + eta) ++c;
    rep.counts.push_back(c);
    rep.increments.push_back(static_cast<double>(c) / rep.region_size);
    if (prev_count >= 0 && c < prev_count) rep.monotone = false;
    prev_count = c;
  }
  // log-log fit over windows with at least 5 eigenvalues
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (size_t i = 0; i < rep.etas.size(); ++i) {
    if (rep.counts[i] < 5) continue;
    const double x = std::log(rep.etas[i]);
    const double y = std::log(rep.increments[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  rep.fit_windows = m;
  if (m >= 2) rep.fitted_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return rep;
}

MomentReport moment_sum(const OperatorSlice& op, double q, std::vector<double> times) {
  MomentReport rep;
  rep.q = q;
  const auto origin = op.region.index_of(Site{});
  if (!origin) throw std::invalid_argument("moment_sum: region must contain the origin");
  if (times.empty()) {
    times.push_back(0.0);
    for (int k = -10; k <= 20; ++k) times.push_back(std::pow(2.0, k));
  }
  rep.times = times;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix);
  const int n = op.region.size();
  const int d = op.region.dim();
  Eigen::VectorXd weight(n);
  for (int i = 0; i < n; ++i)
    weight(i) = std::pow(1.0 + l1_norm(op.region.site(i), d), q);

  // t-free proxy: sum_alpha (sum_x w(x) |phi_a(x)|) |phi_a(0)|
  for (int a = 0; a < n; ++a) {
    const auto phi = es.eigenvectors().col(a);
    rep.proxy += weight.dot(phi.cwiseAbs()) * std::abs(phi(*origin));
  }

  for (double t : times) {
    Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(n);
    for (int a = 0; a < n; ++a) {
      const auto phi = es.eigenvectors().col(a);
      const std::complex<double> phase = std::exp(std::complex<double>(0.0, t * es.eigenvalues()(a)));
      amp += phase * phi(*origin) * phi.cast<std::complex<double>>();
    }
    double s = 0.0, norm2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double a_abs = std::abs(amp(i));
      s += weight(i) * a_abs;
      norm2 += a_abs * a_abs;
    }
    rep.per_time.push_back(s);
    rep.sup_over_grid = std::max(rep.sup_over_grid, s);
    rep.worst_unitarity_defect = std::max(rep.worst_unitarity_defect, std::abs(norm2 - 1.0));
    if (s > rep.proxy + 1e-9 * std::max(1.0, rep.proxy)) rep.proxy_dominates = false;
  }
  return rep;
}

ArithmeticSetReport arithmetic_set_membership(double theta, const FrequencyVector& omega, double a,
                                              int radius, int exponent_shift) {
  if (radius < 1) throw std::invalid_argument("arithmetic_set_membership: radius must be >= 1");
  ArithmeticSetReport rep;
  rep.a_constant = a;
  rep.radius = radius;
  const int d = omega.dim();
  rep.exponent = d + exponent_shift;
  rep.member = true;
  rep.worst_margin = std::numeric_limits<double>::infinity();

  std::vector<int> off(d, -radius);
  Site x{};
  while (true) {
    int n1 = 0;
    for (int i = 0; i < d; ++i) n1 += std::abs(off[i]);
    if (n1 > 0 && n1 <= radius) {
      for (int i = 0; i < d; ++i) x[i] = off[i];
      const double lhs = torus_norm(2.0 * theta + omega.dot(x));
      const double rhs = a / std::pow(static_cast<double>(n1), rep.exponent);
      const double margin = a > 0 ? lhs / rhs : std::numeric_limits<double>::infinity();
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.worst_x = x;
      }
      if (!(lhs > rhs)) rep.member = false;
    }
    int k = d - 1;
    while (k >= 0 && ++off[k] > radius) off[k--] = -radius;
    if (k < 0) break;
  }
  return rep;
}

EigenvectorDecay decay_fit(const Eigen::VectorXd& psi, const LatticeRegion& region) {
  EigenvectorDecay rep;
  int cidx = 0;
  for (int i = 1; i < psi.size(); ++i)
    if (std::abs(psi(i)) > std::abs(psi(cidx))) cidx = i;
  rep.center = region.site(cidx);
  const int d = region.dim();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int i = 0; i < psi.size(); ++i) {
    const double a = std::abs(psi(i));
    if (!(a > 1e-280)) continue;
    ++rep.support;
    const double x = static_cast<double>(l1_dist(region.site(i), rep.center, d));
    const double y = -std::log(a);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m <= 1) {
    rep.single_support = true;
    rep.rate = std::numeric_limits<double>::infinity();
    return rep;
  }
  const double denom = m * sxx - sx * sx;
  if (denom <= 0.0) {
    rep.rate = 0.0;
    return rep;
  }
  rep.rate = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - rep.rate * sx) / m;
  double ss = 0.0;
  for (int i = 0; i < psi.size(); ++i) {
    const double a = std::abs(psi(i));
    if (!(a > 1e-280)) continue;
    const double x = static_cast<double>(l1_dist(region.site(i), rep.center, d));
    const double r = -std::log(a) - (intercept + rep.rate * x);
    ss += r * r;
  }
  rep.residual = std::sqrt(ss / m);
  return rep;
}

TrialFunctionReport check_trial_function_lemma(const Eigen::MatrixXd& h,
                                               const Eigen::MatrixXd& trials, double e_star,
                                               double delta) {
  TrialFunctionReport rep;
  rep.m = static_cast<int>(trials.cols());
  rep.delta = delta;
  if (rep.m < 1) {
    rep.reason = "no trial functions";
    return rep;
  }
  const Eigen::MatrixXd gram = trials.transpose() * trials;
  if ((gram - Eigen::MatrixXd::Identity(rep.m, rep.m)).cwiseAbs().maxCoeff() > 1e-10) {
    rep.reason = "trials not orthonormal to 1e-10";
    return rep;
  }
  for (int k = 0; k < rep.m; ++k) {
    const double res = (h * trials.col(k) - e_star * trials.col(k)).norm();
    if (res > delta + 1e-14) {
      rep.reason = "trial residual " + std::to_string(res) + " exceeds delta";
      return rep;
    }
  }
  rep.applicable = true;

  Eigen::VectorXd ev = spectrum(h);
  std::vector<double> dist(ev.size());
  for (int i = 0; i < ev.size(); ++i) dist[i] = std::abs(ev(i) - e_star);
  std::sort(dist.begin(), dist.end());
  for (int k = 0; k < rep.m; ++k) rep.sum_sq += dist[k] * dist[k];
  rep.pass = rep.sum_sq <= rep.m * delta * delta + 1e-12;

  if (rep.m == 1)
    rep.corollary_pass = dist[0] <= delta + 1e-12;
  else
    rep.corollary_pass = dist[0] <= std::sqrt(2.0) * delta + 1e-12 &&
                         dist[1] <= std::sqrt(2.0) * delta + 1e-12;
  return rep;
}

}  // namespace qpmsa
