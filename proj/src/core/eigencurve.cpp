#include "core/eigencurve.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qpmsa {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void fix_sign(Eigen::VectorXd& v) {
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-8) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

struct WindowedEigs {
  std::vector<double> values;            // inside the window, ascending
  std::vector<Eigen::VectorXd> vectors;
  double gap_to_rest = kInf;
};

WindowedEigs window_solve(const ThetaFamily& family, double theta, double e_center,
                          double e_halfwidth) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(family.h(theta));
  WindowedEigs w;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (std::abs(lam - e_center) < e_halfwidth) {
      w.values.push_back(lam);
      w.vectors.push_back(es.eigenvectors().col(i));
    } else {
      double edge = std::abs(std::abs(lam - e_center) - e_halfwidth);
      w.gap_to_rest = std::min(w.gap_to_rest, edge);
    }
  }
  if (w.values.size() > 2) {
    std::ostringstream os;
    os << "trace_branches: window |E - " << e_center << "| < " << e_halfwidth << " captures "
       << w.values.size() << " eigenvalues at theta = " << theta << " (intruder "
       << w.values[2] << ")";
    throw std::runtime_error(os.str());
  }
  if (w.values.empty()) {
    std::ostringstream os;
    os << "trace_branches: window captures no eigenvalue at theta = " << theta;
    throw std::runtime_error(os.str());
  }
  return w;
}

}  // namespace

ThetaFamily lattice_theta_family(const OperatorFactory& factory) {
  ThetaFamily fam;
  fam.size = factory.region().size();
  fam.h = [factory](double theta) { return factory.matrix(theta); };
  fam.h1 = [factory](double theta) {
    return Eigen::MatrixXd(factory.diag_d1(theta).asDiagonal());
  };
  fam.h2 = [factory](double theta) {
    return Eigen::MatrixXd(factory.diag_d2(theta).asDiagonal());
  };
  return fam;
}

TraceResult trace_branches(const ThetaFamily& family, double theta_lo, double theta_hi,
                           double e_center, double e_halfwidth, const TraceOptions& opt) {
  if (!(theta_hi > theta_lo)) throw std::invalid_argument("trace_branches: empty interval");

  // Base grid, then adaptive bisection where the pair gets close or the
  // eigenvector overlap drops.
  std::set<double> grid;
  for (int i = 0; i <= opt.base_grid; ++i)
    grid.insert(theta_lo + (theta_hi - theta_lo) * i / opt.base_grid);

  struct Row {
    double theta;
    WindowedEigs w;
  };
  auto solve_all = [&](const std::set<double>& thetas) {
    std::vector<Row> rows;
    rows.reserve(thetas.size());
    for (double t : thetas) rows.push_back({t, window_solve(family, t, e_center, e_halfwidth)});
    return rows;
  };

  std::vector<Row> rows = solve_all(grid);
  const size_t n_branch = rows.front().w.values.size();
  for (const auto& r : rows)
    if (r.w.values.size() != n_branch) {
      std::ostringstream os;
      os << "trace_branches: branch count changes from " << n_branch << " to "
         << r.w.values.size() << " at theta = " << r.theta << " (window does not isolate)";
      throw std::runtime_error(os.str());
    }

  // refinement pass: bisect intervals with small pair gap relative to the
  // local energy resolution, or with poor vector overlap
  for (int pass = 0; pass < 24; ++pass) {
    std::set<double> extra;
    for (size_t k = 0; k + 1 < rows.size(); ++k) {
      const double step = rows[k + 1].theta - rows[k].theta;
      if (step <= opt.min_step) continue;
      bool refine = false;
      if (n_branch == 2) {
        const double res =
            std::abs(rows[k + 1].w.values[0] - rows[k].w.values[0]) +
            std::abs(rows[k + 1].w.values[1] - rows[k].w.values[1]);
        const double gap = std::min(rows[k].w.values[1] - rows[k].w.values[0],
                                    rows[k + 1].w.values[1] - rows[k + 1].w.values[0]);
        if (gap < 10.0 * std::max(res, 1e-300)) refine = true;
      }
      for (size_t b = 0; b < n_branch && !refine; ++b)
        if (std::abs(rows[k].w.vectors[b].dot(rows[k + 1].w.vectors[b])) < opt.overlap_floor)
          refine = true;
      if (refine) extra.insert(0.5 * (rows[k].theta + rows[k + 1].theta));
    }
    if (extra.empty()) break;
    for (double t : extra) grid.insert(t);
    rows = solve_all(grid);
  }

  // overlap matching along the grid
  TraceResult out;
  out.branches.resize(n_branch);
  out.outer_gap = kInf;
  out.min_gap = kInf;
  std::vector<Eigen::VectorXd> prev(n_branch);
  for (size_t b = 0; b < n_branch; ++b) {
    prev[b] = rows.front().w.vectors[b];
    fix_sign(prev[b]);
    out.branches[b].cls = n_branch == 2 ? 'B' : 'A';
  }
  for (size_t k = 0; k < rows.size(); ++k) {
    auto& w = rows[k].w;
    out.outer_gap = std::min(out.outer_gap, w.gap_to_rest);
    std::array<int, 2> assign{0, 1};
    if (n_branch == 2) {
      const double keep = std::abs(prev[0].dot(w.vectors[0])) + std::abs(prev[1].dot(w.vectors[1]));
      const double swap = std::abs(prev[0].dot(w.vectors[1])) + std::abs(prev[1].dot(w.vectors[0]));
      if (swap > keep) assign = {1, 0};
      const double gap = std::abs(w.values[1] - w.values[0]);
      if (gap < out.min_gap) {
        out.min_gap = gap;
        out.min_gap_theta = rows[k].theta;
      }
    }
    for (size_t b = 0; b < n_branch; ++b) {
      Eigen::VectorXd psi = w.vectors[assign[b]];
      if (prev[b].dot(psi) < 0) psi = -psi;
      const double ov = std::abs(prev[b].dot(psi));
      if (k > 0) out.branches[b].min_overlap = std::min(out.branches[b].min_overlap, ov);
      out.branches[b].samples.push_back(
          {rows[k].theta, w.values[assign[b]], psi, w.gap_to_rest});
      prev[b] = std::move(psi);
    }
  }

  if (n_branch == 2) {
    double scale = 1.0;
    for (const auto& r : rows)
      scale = std::max({scale, std::abs(r.w.values[0]), std::abs(r.w.values[1])});
    if (out.min_gap < opt.degeneracy_threshold_scale * scale) {
      CrossingInfo ci{out.min_gap_theta, out.min_gap, true};
      out.crossing = ci;
      for (auto& b : out.branches) b.crossing = ci;
      // label so that the first branch increases through the crossing
      auto& b0 = out.branches[0].samples;
      const auto right = std::upper_bound(
          b0.begin(), b0.end(), out.min_gap_theta,
          [](double t, const BranchSample& s) { return t < s.theta; });
      if (right != b0.end() && right != b0.begin()) {
        const size_t idx = static_cast<size_t>(right - b0.begin());
        if (b0[idx].value < b0[idx - 1].value)
          std::swap(out.branches[0], out.branches[1]);
      }
    }
  }
  return out;
}

double derivative_first(const ThetaFamily& family, double theta, const Eigen::VectorXd& psi) {
  return psi.dot(family.h1(theta) * psi);
}

namespace {

// Solve (H - E) y = P w with y constrained to the orthogonal complement of the
// given vectors; the complement projection is pinned by adding the rank-one
// terms sum v v^T, which act as the identity on the deflated directions.
Eigen::VectorXd deflated_solve(const Eigen::MatrixXd& h, double energy,
                               const std::vector<Eigen::VectorXd>& deflate,
                               const Eigen::VectorXd& w, double* residual) {
  const int n = static_cast<int>(h.rows());
  Eigen::VectorXd rhs = w;
  for (const auto& v : deflate) rhs -= v * v.dot(rhs);
  Eigen::MatrixXd a = h;
  a.diagonal().array() -= energy;
  // project the operator: P (H-E) P + sum v v^T
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
  for (const auto& v : deflate) p -= v * v.transpose();
  Eigen::MatrixXd m = p * a * p;
  for (const auto& v : deflate) m += v * v.transpose();
  Eigen::VectorXd y = Eigen::PartialPivLU<Eigen::MatrixXd>(m).solve(rhs);
  if (residual) {
    Eigen::VectorXd r = p * (a * y) - rhs;
    *residual = r.cwiseAbs().maxCoeff();
  }
  return y;
}

}  // namespace

SecondDerivative derivative_second(const ThetaFamily& family, double theta, double energy,
                                   const Eigen::VectorXd& psi) {
  SecondDerivative out;
  out.curvature_term = psi.dot(family.h2(theta) * psi);
  const Eigen::VectorXd w = family.h1(theta) * psi;
  const Eigen::VectorXd y = deflated_solve(family.h(theta), energy, {psi}, w, &out.solve_residual);
  out.remainder = -2.0 * w.dot(y);
  out.value = out.curvature_term + out.remainder;
  return out;
}

SecondDerivative derivative_second_two_level(const ThetaFamily& family, double theta,
                                             double energy, const Eigen::VectorXd& psi,
                                             double partner_energy,
                                             const Eigen::VectorXd& partner_psi) {
  if (std::abs(energy - partner_energy) == 0.0)
    throw std::invalid_argument("derivative_second_two_level: degenerate pair");
  SecondDerivative out;
  out.curvature_term = psi.dot(family.h2(theta) * psi);
  const Eigen::VectorXd w = family.h1(theta) * psi;
  const double cross = partner_psi.dot(w);
  out.dominant = 2.0 * cross * cross / (energy - partner_energy);
  const Eigen::VectorXd y =
      deflated_solve(family.h(theta), energy, {psi, partner_psi}, w, &out.solve_residual);
  out.remainder = -2.0 * w.dot(y);
  out.value = out.curvature_term + out.dominant + out.remainder;
  return out;
}

DerivativeGroup crossing_derivative_group(const ThetaFamily& family, double theta_c,
                                          double e_center, double degeneracy_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(family.h(theta_c));
  const auto& ev = es.eigenvalues();
  int nearest = 0;
  for (int i = 1; i < ev.size(); ++i)
    if (std::abs(ev(i) - e_center) < std::abs(ev(nearest) - e_center)) nearest = i;
  std::vector<int> group;
  for (int i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i) - ev(nearest)) <= degeneracy_tol) group.push_back(i);
  if (group.size() != 2) {
    std::ostringstream os;
    os << "crossing_derivative_group: degeneracy dimension " << group.size()
       << " at theta = " << theta_c << " (expected 2, tol " << degeneracy_tol << ")";
    throw std::runtime_error(os.str());
  }
  DerivativeGroup out;
  out.basis.resize(ev.size() == 0 ? 0 : es.eigenvectors().rows(), 2);
  out.basis.col(0) = es.eigenvectors().col(group[0]);
  out.basis.col(1) = es.eigenvectors().col(group[1]);
  out.projected = out.basis.transpose() * family.h1(theta_c) * out.basis;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> small(out.projected);
  out.lower = small.eigenvalues()(0);
  out.upper = small.eigenvalues()(1);
  return out;
}

Eigen::MatrixXd reflection_matrix(const LatticeRegion& region, const HalfSite& center2) {
  const int n = region.size();
  const int d = region.dim();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    Site rx{};
    for (int k = 0; k < d; ++k) rx[k] = center2[k] - region.site(i)[k];
    for (int k = 0; k < kMaxDim; ++k)
      if (k >= d) rx[k] = 0;
    const auto j = region.index_of(rx);
    if (!j)
      throw std::invalid_argument("reflection_matrix: region not symmetric about the center at " +
                                  site_to_string(region.site(i), d));
    r(*j, i) = 1.0;
  }
  return r;
}

ParitySplit symmetric_antisymmetric_split(const LatticeRegion& region, const HalfSite& center2,
                                          const Eigen::MatrixXd& h_at_theta_s,
                                          const Eigen::MatrixXd& basis) {
  if (basis.cols() != 2)
    throw std::invalid_argument("symmetric_antisymmetric_split: need a 2-column basis");
  const Eigen::MatrixXd r = reflection_matrix(region, center2);
  ParitySplit out;
  out.commutator_norm = (r * h_at_theta_s - h_at_theta_s * r).cwiseAbs().maxCoeff();
  if (out.commutator_norm > 1e-8)
    throw std::runtime_error("symmetric_antisymmetric_split: [R, H] norm " +
                             std::to_string(out.commutator_norm) + " exceeds 1e-8");
  // R restricted to the 2-dim space; eigenvectors with eigenvalue +1 / -1
  Eigen::Matrix2d rr = basis.transpose() * r * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (rr + rr.transpose()));
  const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(1);
  if (!(lo < -0.5 && hi > 0.5))
    throw std::runtime_error(
        "symmetric_antisymmetric_split: near-eigenspace is parity-pure (R eigenvalues " +
        std::to_string(lo) + ", " + std::to_string(hi) + ")");
  out.antisymmetric = basis * es.eigenvectors().col(0);
  out.symmetric = basis * es.eigenvectors().col(1);
  out.symmetric.normalize();
  out.antisymmetric.normalize();
  fix_sign(out.symmetric);
  fix_sign(out.antisymmetric);
  return out;
}

MorseReport check_morse_property(const std::vector<double>& thetas,
                                 const std::vector<double>& values, double theta_s, double delta) {
  MorseReport rep;
  const size_t n = thetas.size();
  if (n < 5 || values.size() != n)
    throw std::invalid_argument("check_morse_property: need >= 5 uniform samples");
  const double h = thetas[1] - thetas[0];
  for (size_t i = 1; i + 1 < n; ++i)
    if (std::abs((thetas[i + 1] - thetas[i]) - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw std::invalid_argument("check_morse_property: non-uniform grid");
  if (!(h <= delta / 100.0 + 1e-15))
    throw std::invalid_argument("check_morse_property: grid spacing must be <= delta/100");

  std::vector<double> d1(n, 0.0), d2(n, 0.0);
  for (size_t i = 1; i + 1 < n; ++i) {
    d1[i] = (values[i + 1] - values[i - 1]) / (2 * h);
    d2[i] = (values[i + 1] - 2 * values[i] + values[i - 1]) / (h * h);
  }

  // hypothesis: |E'| <= delta implies |E''| >= 2 with a single sign
  int sign = 0;
  double max_d2 = 0.0;
  for (size_t i = 1; i + 1 < n; ++i) {
    max_d2 = std::max(max_d2, std::abs(d2[i]));
    if (std::abs(d1[i]) <= delta) {
      if (std::abs(d2[i]) < 2.0) {
        rep.applicable = false;
        rep.reason = "|E''| < 2 where |E'| <= delta (theta = " + std::to_string(thetas[i]) + ")";
        return rep;
      }
      const int s = d2[i] > 0 ? 1 : -1;
      if (sign == 0) sign = s;
      if (s != sign) {
        rep.applicable = false;
        rep.reason = "E'' changes sign inside the small-derivative band";
        return rep;
      }
    }
  }
  rep.applicable = true;

  // symmetry defect about theta_s where both sides are sampled
  for (size_t i = 0; i < n; ++i) {
    const double mirrored = 2 * theta_s - thetas[i];
    if (mirrored < thetas.front() - 1e-12 || mirrored > thetas.back() + 1e-12) continue;
    const double pos = (mirrored - thetas.front()) / h;
    const size_t j = static_cast<size_t>(std::llround(pos));
    if (j < n && std::abs(thetas[j] - mirrored) < 1e-9)
      rep.symmetry_defect = std::max(rep.symmetry_defect, std::abs(values[i] - values[j]));
  }

  // conclusion 1: pairwise lower bound where M(t1,t2) <= delta
  rep.lower_bound_ok = true;
  rep.worst_pair_ratio = kInf;
  const double pair_slack = 1e-9 + 2.0 * max_d2 * h;  // grid resolution allowance
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const double m = std::min(std::abs(thetas[j] - thetas[i]),
                                std::abs(thetas[j] + thetas[i] - 2 * theta_s));
      if (m > delta || m == 0.0) continue;
      const double lhs = std::abs(values[j] - values[i]);
      const double rhs = 0.5 * m * m;
      rep.worst_pair_ratio = std::min(rep.worst_pair_ratio, lhs / rhs);
      if (lhs + pair_slack < rhs) rep.lower_bound_ok = false;
    }
  }

  // conclusion 2: |E'| >= min(delta, |theta - theta_s|)
  rep.derivative_bound_ok = true;
  rep.worst_derivative_margin = kInf;
  const double d1_slack = max_d2 * h;  // one grid cell of drift
  for (size_t i = 1; i + 1 < n; ++i) {
    const double bound = std::min(delta, std::abs(thetas[i] - theta_s));
    rep.worst_derivative_margin = std::min(rep.worst_derivative_margin, std::abs(d1[i]) - bound);
    if (std::abs(d1[i]) + d1_slack < bound) rep.derivative_bound_ok = false;
  }
  return rep;
}

SeparationReport check_separation_growth(const EigenBranch& a, const EigenBranch& b,
                                         double theta_s, double delta_prev) {
  if (a.samples.size() != b.samples.size())
    throw std::invalid_argument("check_separation_growth: branches on different grids");
  SeparationReport rep;
  rep.worst_ratio = kInf;
  const double k = delta_prev * delta_prev;
  for (size_t i = 0; i < a.samples.size(); ++i) {
    if (std::abs(a.samples[i].theta - b.samples[i].theta) > 1e-12)
      throw std::invalid_argument("check_separation_growth: branches on different grids");
    const double dist = std::abs(a.samples[i].theta - theta_s);
    if (dist == 0.0) continue;
    ++rep.samples;
    const double sep = std::abs(a.samples[i].value - b.samples[i].value);
    const double ratio = sep / (k * dist);
    if (ratio < rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst_theta = a.samples[i].theta;
    }
    if (sep + 1e-15 < k * dist) rep.pass = false;
  }
  return rep;
}

}  // namespace qpmsa
