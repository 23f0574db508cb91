#include "core/green.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace qpmsa {

Eigen::VectorXd spectrum(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double dist_to_spectrum(const Eigen::MatrixXd& h, double energy) {
  const Eigen::VectorXd ev = spectrum(h);
  return (ev.array() - energy).abs().minCoeff();
}

GreenSolve green_matrix(const Eigen::MatrixXd& h, double energy) {
  const int n = static_cast<int>(h.rows());
  const double scale = std::max(h.cwiseAbs().maxCoeff(), std::abs(energy));
  Eigen::MatrixXd shifted = h;
  shifted.diagonal().array() -= energy;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted);
  GreenSolve out;
  out.G = lu.solve(Eigen::MatrixXd::Identity(n, n));
  out.residual = (shifted * out.G - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (!(out.residual < 1e-6) || !out.G.allFinite()) {
    throw NearSingularError(dist_to_spectrum(h, energy), energy);
  }
  // cheap spectral-distance estimate: 1/||G||_2 <= sqrt(||G||_1 ||G||_inf)^{-1}
  const double norm1 = out.G.cwiseAbs().colwise().sum().maxCoeff();
  const double lower = 1.0 / norm1;  // dist >= 1/||G||_2 >= 1/||G||_1 for symmetric G
  if (lower < 1e-12 * scale) {
    const double dist = dist_to_spectrum(h, energy);
    if (dist < 1e-12 * scale) throw NearSingularError(dist, energy);
  }
  return out;
}

GreenSolve green(const OperatorSlice& op, double energy) { return green_matrix(op.matrix, energy); }

DecayFit fit_offdiag_decay(const Eigen::MatrixXd& g, const LatticeRegion& region, int cutoff) {
  const int n = region.size();
  const int d = region.dim();
  DecayFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long long count = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int dist = l1_dist(region.site(i), region.site(j), d);
      if (dist < cutoff || dist < 1) continue;
      const double a = std::abs(g(i, j));
      if (!(a > 1e-300)) continue;
      const double y = -std::log(a);
      const double x = static_cast<double>(dist);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++count;
    }
  }
  fit.pairs = static_cast<int>(count);
  if (count == 0) {
    fit.single_support = true;
    fit.rate = std::numeric_limits<double>::infinity();
    return fit;
  }
  const double denom = count * sxx - sx * sx;
  if (denom <= 0) {
    // all pairs at one distance: report the mean level as intercept
    fit.rate = 0.0;
    fit.intercept = sy / count;
    return fit;
  }
  fit.rate = (count * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.rate * sx) / count;
  return fit;
}

GreenFunctionReport check_green_bounds(const OperatorSlice& op, double energy, double norm_bound,
                                       double rate, int cutoff) {
  GreenFunctionReport rep;
  rep.energy = energy;
  rep.theta = op.theta.value();
  rep.norm_bound = norm_bound;
  rep.rate = rate;
  rep.cutoff = cutoff;

  const GreenSolve gs = green(op, energy);
  rep.residual = gs.residual;
  rep.op_norm = 1.0 / dist_to_spectrum(op.matrix, energy);
  rep.norm_ok = rep.op_norm <= norm_bound;

  const int n = op.region.size();
  const int d = op.region.dim();
  double worst = 0.0;
  double schur = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      row += std::abs(gs.G(i, j));
      if (j <= i) continue;
      const int dist = l1_dist(op.region.site(i), op.region.site(j), d);
      if (dist < cutoff) continue;
      const double v = std::isinf(rate) ? (std::abs(gs.G(i, j)) > 0.0 ? 2.0 : 0.0)
                                        : std::abs(gs.G(i, j)) * std::exp(rate * dist);
      worst = std::max(worst, v);
    }
    schur = std::max(schur, row);
  }
  rep.max_violation = worst;
  rep.decay_ok = worst <= 1.0 + 1e-12;
  rep.schur_row_sum = schur;
  rep.gamma_hat = fit_offdiag_decay(gs.G, op.region, cutoff).rate;
  return rep;
}

GreenFunctionReport check_zero_good_bounds(const OperatorSlice& op, double e_star, double delta0) {
  const double gamma0 = op.epsilon > 0.0 ? std::abs(std::log(op.epsilon)) / 2.0
                                         : std::numeric_limits<double>::infinity();
  return check_green_bounds(op, e_star, 10.0 / delta0, gamma0, 1);
}

Eigen::VectorXd localized_eigenvector(const Eigen::MatrixXd& h, double energy, int seed_index,
                                      int iterations) {
  const int n = static_cast<int>(h.rows());
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  Eigen::MatrixXd shifted = h;
  shifted.diagonal().array() -= energy + 1e-13 * scale;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x(seed_index) = 1.0;
  for (int it = 0; it < iterations; ++it) {
    x = lu.solve(x);
    const double norm = x.norm();
    if (!(norm > 0.0) || !x.allFinite()) {
      // fall back to the dense route
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
      int best = 0;
      for (int i = 1; i < n; ++i)
        if (std::abs(es.eigenvalues()(i) - energy) < std::abs(es.eigenvalues()(best) - energy))
          best = i;
      return es.eigenvectors().col(best);
    }
    x /= norm;
  }
  if (x(seed_index) < 0) x = -x;
  return x;
}

double check_resolvent_identity(const OperatorSlice& outer, const LatticeRegion& sub,
                                double energy) {
  if (!outer.region.contains_all(sub))
    throw std::invalid_argument("check_resolvent_identity: sub not contained in outer region");
  const GreenSolve g_outer = green(outer, energy);
  const OperatorSlice sub_op =
      assemble(sub, outer.theta, outer.epsilon, outer.potential, outer.frequency);
  const GreenSolve g_sub = green_matrix(sub_op.matrix, energy);
  const BoundaryCoupling bc = boundary_coupling(sub, outer.region);

  double worst = 0.0;
  for (int xs = 0; xs < sub.size(); ++xs) {
    const int xo = *outer.region.index_of(sub.site(xs));
    for (int yo = 0; yo < outer.region.size(); ++yo) {
      const auto ys = sub.index_of(outer.region.site(yo));
      // G_outer = G_sub chi - G_sub Gamma G_outer with Gamma the +eps coupling
      double rhs = ys ? g_sub.G(xs, *ys) : 0.0;
      for (const auto& [z, zp] : bc.pairs) {
        rhs -= g_sub.G(xs, *sub.index_of(z)) * outer.epsilon * g_outer.G(*outer.region.index_of(zp), yo);
      }
      worst = std::max(worst, std::abs(g_outer.G(xo, yo) - rhs));
    }
  }
  return worst;
}

}  // namespace qpmsa
