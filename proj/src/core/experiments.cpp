#include "core/experiments.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "core/eigencurve.hpp"
#include "core/parallel.hpp"

// Property suites shared by the verify-all experiment and the acceptance
// harness. Randomized sweeps derive one sub-seed per instance, so results are
// byte-identical for a fixed master seed regardless of thread count.

namespace qpmsa {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Check combine(const std::string& name, int failures, int total, const std::string& extra = "") {
  Check c;
  c.name = name;
  c.pass = failures == 0;
  c.detail = std::to_string(total - failures) + "/" + std::to_string(total) + " instances ok";
  if (!extra.empty()) c.detail += "; " + extra;
  return c;
}

double rel_err(double got, double want, double floor_value) {
  return std::abs(got - want) / std::max(std::abs(want), floor_value);
}

}  // namespace

// ---------------------------------------------------------------------------
// exact-formula suite
// ---------------------------------------------------------------------------

std::vector<Check> suite_exact_formula(std::uint64_t seed, int triples, int threads) {
  std::vector<Check> out;

  // eps = 0: Green equals the diagonal closed form
  {
    const FrequencyVector omega = FrequencyVector::golden();
    const PotentialProfile v = PotentialProfile::cosine();
    const LatticeRegion region = LatticeRegion::box(1, Site{}, 20);
    const OperatorSlice op = assemble(region, TorusPhase(0.37), 0.0, v, omega);
    const double energy = 2.1;
    const GreenSolve gs = green(op, energy);
    double worst = 0.0;
    for (int i = 0; i < region.size(); ++i) {
      for (int j = 0; j < region.size(); ++j) {
        const double want = i == j ? 1.0 / (op.matrix(i, i) - energy) : 0.0;
        worst = std::max(worst, std::abs(gs.G(i, j) - want));
      }
    }
    Check c{"exact.eps0_diagonal_green", worst <= 1e-12, "max deviation " + fmt(worst)};
    out.push_back(c);
  }

  // sub = outer and eps = 0 degenerate cases of the resolvent identity
  {
    const FrequencyVector omega = FrequencyVector::golden();
    const PotentialProfile v = PotentialProfile::cosine();
    const LatticeRegion region = LatticeRegion::box(1, Site{}, 8);
    const OperatorSlice full = assemble(region, TorusPhase(0.11), 0.3, v, omega);
    const double r1 = check_resolvent_identity(full, region, 2.7);
    const OperatorSlice decoupled = assemble(region, TorusPhase(0.11), 0.0, v, omega);
    const double r2 =
        check_resolvent_identity(decoupled, LatticeRegion::box(1, Site{}, 3), 2.7);
    Check c{"exact.resolvent_degenerate_cases", r1 <= 1e-12 && r2 <= 1e-12,
            "sub=outer residual " + fmt(r1) + ", eps=0 residual " + fmt(r2)};
    out.push_back(c);
  }

  // randomized triples, d = 1 and d = 2
  std::vector<double> residuals(triples, 0.0);
  std::vector<int> failed(triples, 0);
  parallel_for(triples, threads, [&](int i) {
    std::mt19937_64 rng(derive_seed(seed, i));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int d = i % 2 == 0 ? 1 : 2;
    const FrequencyVector omega = FrequencyVector::default_for_dim(d, 30);
    const PotentialProfile v =
        i % 4 < 2 ? PotentialProfile::cosine() : PotentialProfile::perturbed_cosine();
    const int outer_radius = d == 1 ? 12 : 2;  // 25 sites in both cases
    const int sub_radius = d == 1 ? 4 : 1;
    const LatticeRegion outer = LatticeRegion::box(d, Site{}, outer_radius);
    Site sub_center{};
    for (int k = 0; k < d; ++k)
      sub_center[k] = static_cast<int>(std::floor(uni(rng) * (2 * (outer_radius - sub_radius) + 1))) -
                      (outer_radius - sub_radius);
    const LatticeRegion sub = LatticeRegion::box(d, sub_center, sub_radius);
    const double eps = 0.02 + 0.4 * uni(rng);
    const OperatorSlice op = assemble(outer, TorusPhase(uni(rng)), eps, v, omega);
    const Eigen::VectorXd ev_outer = spectrum(op.matrix);
    const OperatorSlice sub_op = assemble(sub, op.theta, eps, v, omega);
    const Eigen::VectorXd ev_sub = spectrum(sub_op.matrix);
    double energy = 0.0;
    for (int attempt = 0; attempt < 200; ++attempt) {
      energy = -3.0 + 6.0 * uni(rng);
      const double d1 = (ev_outer.array() - energy).abs().minCoeff();
      const double d2 = (ev_sub.array() - energy).abs().minCoeff();
      if (std::min(d1, d2) > 0.05) break;
    }
    residuals[i] = check_resolvent_identity(op, sub, energy);
    failed[i] = residuals[i] <= 1e-8 ? 0 : 1;
  });
  int bad = 0;
  double worst = 0.0;
  for (int i = 0; i < triples; ++i) {
    bad += failed[i];
    worst = std::max(worst, residuals[i]);
  }
  out.push_back(combine("exact.resolvent_identity_random", bad, triples,
                        "worst residual " + fmt(worst)));
  return out;
}

// ---------------------------------------------------------------------------
// derivative-formula suite
// ---------------------------------------------------------------------------

namespace {

// eigenvalue of h nearest to target
double nearest_eigenvalue(const Eigen::MatrixXd& h, double target) {
  const Eigen::VectorXd ev = spectrum(h);
  double best = ev(0);
  for (int i = 1; i < ev.size(); ++i)
    if (std::abs(ev(i) - target) < std::abs(best - target)) best = ev(i);
  return best;
}

}  // namespace

std::vector<Check> suite_derivative_formulas(std::uint64_t seed, int blocks, int threads) {
  std::vector<Check> out;
  std::vector<int> fail1(blocks, 0), fail2(blocks, 0);
  std::vector<double> err1(blocks, 0.0), err2(blocks, 0.0);

  parallel_for(blocks, threads, [&](int i) {
    std::mt19937_64 rng(derive_seed(seed, i));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int d = i % 2 == 0 ? 1 : 2;
    const FrequencyVector omega = FrequencyVector::default_for_dim(d, 20);
    const PotentialProfile v =
        i % 4 < 2 ? PotentialProfile::cosine() : PotentialProfile::perturbed_cosine();
    const int radius = d == 1 ? 5 + static_cast<int>(uni(rng) * 10) : 1 + (i % 2);
    const LatticeRegion region = LatticeRegion::box(d, Site{}, radius);  // <= 30 sites
    const double eps = std::pow(10.0, -4.0 + 3.0 * uni(rng));
    const OperatorFactory factory(region, eps, v, omega);
    const ThetaFamily fam = lattice_theta_family(factory);

    // pick a well-separated eigenvalue at a random theta; the FD stencils
    // track eigenvalues by proximity, so the gap must stay comfortably open
    // at every stencil point
    const double h = 1e-4;
    double theta = uni(rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(factory.matrix(theta));
    int idx = -1;
    std::array<double, 4> stencil{};  // E(theta -2h, -h, +h, +2h), branch-tracked
    for (int attempt = 0; attempt < 100 && idx < 0; ++attempt) {
      theta = uni(rng);
      es.compute(factory.matrix(theta));
      const int cand = static_cast<int>(uni(rng) * region.size()) % region.size();
      double gap = std::numeric_limits<double>::infinity();
      for (int k = 0; k < region.size(); ++k)
        if (k != cand) gap = std::min(gap, std::abs(es.eigenvalues()(k) - es.eigenvalues()(cand)));
      if (gap < 0.05) continue;
      bool tracked = true;
      const std::array<double, 4> offs{-2 * h, -h, h, 2 * h};
      for (int s = 0; s < 4; ++s) {
        const Eigen::VectorXd ev = spectrum(factory.matrix(theta + offs[s]));
        int near = 0;
        double best = std::numeric_limits<double>::infinity(), second = best;
        for (int k = 0; k < ev.size(); ++k) {
          const double dd = std::abs(ev(k) - es.eigenvalues()(cand));
          if (dd < best) {
            second = best;
            best = dd;
            near = k;
          } else if (dd < second) {
            second = dd;
          }
        }
        stencil[s] = ev(near);
        if (second < 0.02) tracked = false;  // ambiguous tracking
      }
      if (tracked) idx = cand;
    }
    if (idx < 0) return;  // no separated eigenvalue found in this draw; skip
    const double e0 = es.eigenvalues()(idx);
    const Eigen::VectorXd psi = es.eigenvectors().col(idx);

    const double d1 = derivative_first(fam, theta, psi);
    const double fd1 =
        (stencil[0] - 8 * stencil[1] + 8 * stencil[2] - stencil[3]) / (12 * h);
    err1[i] = rel_err(d1, fd1, 1e-2);
    fail1[i] = err1[i] <= 1e-6 ? 0 : 1;

    const SecondDerivative d2 = derivative_second(fam, theta, e0, psi);
    const double fd2 = (-stencil[0] + 16 * stencil[1] - 30 * e0 + 16 * stencil[2] - stencil[3]) /
                       (12 * h * h);
    err2[i] = rel_err(d2.value, fd2, 1e-1);
    fail2[i] = err2[i] <= 1e-4 ? 0 : 1;
  });

  int b1 = 0, b2 = 0;
  double w1 = 0.0, w2 = 0.0;
  for (int i = 0; i < blocks; ++i) {
    b1 += fail1[i];
    b2 += fail2[i];
    w1 = std::max(w1, err1[i]);
    w2 = std::max(w2, err2[i]);
  }
  out.push_back(combine("derivative.first_vs_fd", b1, blocks, "worst rel err " + fmt(w1)));
  out.push_back(combine("derivative.second_vs_fd", b2, blocks, "worst rel err " + fmt(w2)));

  // two-level split reconstructs the full value on 2x2 families
  {
    std::mt19937_64 rng(derive_seed(seed, 987654));
    std::normal_distribution<double> gauss(0.0, 1.0);
    double worst = 0.0;
    int bad = 0;
    const int n_toy = 50;
    for (int i = 0; i < n_toy; ++i) {
      Eigen::Matrix2d a0, a1, a2;
      auto sym = [&] {
        Eigen::Matrix2d m;
        m << gauss(rng), gauss(rng), 0.0, gauss(rng);
        m(1, 0) = m(0, 1);
        return m;
      };
      a0 = sym();
      a1 = sym();
      a2 = sym();
      ThetaFamily fam;
      fam.size = 2;
      fam.h = [=](double t) { return Eigen::MatrixXd(a0 + t * a1 + 0.5 * t * t * a2); };
      fam.h1 = [=](double t) { return Eigen::MatrixXd(a1 + t * a2); };
      fam.h2 = [=](double) { return Eigen::MatrixXd(a2); };
      const double theta = gauss(rng);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fam.h(theta));
      if (std::abs(es.eigenvalues()(1) - es.eigenvalues()(0)) < 1e-6) continue;
      const SecondDerivative full =
          derivative_second(fam, theta, es.eigenvalues()(0), es.eigenvectors().col(0));
      const SecondDerivative split = derivative_second_two_level(
          fam, theta, es.eigenvalues()(0), es.eigenvectors().col(0), es.eigenvalues()(1),
          es.eigenvectors().col(1));
      const double dev = std::abs(full.value - split.value);
      worst = std::max(worst, dev);
      if (dev > 1e-8) ++bad;
    }
    out.push_back(combine("derivative.two_level_split_2x2", bad, n_toy,
                          "worst deviation " + fmt(worst)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kato crossing suite
// ---------------------------------------------------------------------------

namespace {

// one-sided slope by a 3-point Richardson stencil
double one_sided_slope(const std::function<double(double)>& f, double x0, double h) {
  return (4.0 * f(x0 + h) - f(x0 + 2 * h) - 3.0 * f(x0)) / (2.0 * h);
}

}  // namespace

std::vector<Check> suite_kato_crossing() {
  std::vector<Check> out;

  // toy: H(theta) = diag(theta, -theta)
  {
    ThetaFamily fam;
    fam.size = 2;
    fam.h = [](double t) {
      Eigen::MatrixXd m(2, 2);
      m << t, 0, 0, -t;
      return m;
    };
    fam.h1 = [](double) {
      Eigen::MatrixXd m(2, 2);
      m << 1, 0, 0, -1;
      return m;
    };
    fam.h2 = [](double) { return Eigen::MatrixXd::Zero(2, 2); };
    const DerivativeGroup g = crossing_derivative_group(fam, 0.0, 0.0, 1e-12);
    const bool ok = std::abs(g.lower + 1.0) < 1e-12 && std::abs(g.upper - 1.0) < 1e-12;
    out.push_back({"kato.toy_diag_group", ok,
                   "group {" + fmt(g.lower) + ", " + fmt(g.upper) + "} (expected {-1, 1})"});
  }

  // constructed symmetric block with a mirror pair at +-2, crossing at theta_s = 0
  {
    const FrequencyVector omega = FrequencyVector::golden();
    const PotentialProfile v = PotentialProfile::cosine();
    const LatticeRegion region = LatticeRegion::box(1, Site{}, 6);
    const double eps = 1e-4;
    const OperatorFactory factory(region, eps, v, omega);
    const ThetaFamily fam = lattice_theta_family(factory);
    const double theta_s = 0.0;  // = -c.omega for c = 0
    const double e_pair = v.eval(wrap_unit(2.0 * omega.component(0)));  // common value at +-2

    const DerivativeGroup g = crossing_derivative_group(fam, theta_s, e_pair, 1e-8);
    const double s = std::max(std::abs(g.lower), std::abs(g.upper));
    const bool antisym = std::abs(g.lower + g.upper) <= 1e-8 * std::max(1.0, s);
    out.push_back({"kato.block_group_antisymmetric", antisym,
                   "group {" + fmt(g.lower) + ", " + fmt(g.upper) + "}"});

    const ParitySplit split =
        symmetric_antisymmetric_split(region, doubled(Site{}), fam.h(theta_s), g.basis);
    const Eigen::MatrixXd vp = fam.h1(theta_s);
    const double dss = std::abs(split.symmetric.dot(vp * split.symmetric));
    const double daa = std::abs(split.antisymmetric.dot(vp * split.antisymmetric));
    out.push_back({"kato.parity_diagonals_vanish", dss <= 1e-8 && daa <= 1e-8,
                   "<s,V's> = " + fmt(dss) + ", <a,V'a> = " + fmt(daa)});

    // RV'R = -V' for even v at the symmetry phase
    const Eigen::MatrixXd r = reflection_matrix(region, doubled(Site{}));
    const double vodd = (r * vp * r + vp).cwiseAbs().maxCoeff();
    out.push_back({"kato.reflected_derivative_odd", vodd <= 1e-12, "max |RV'R + V'| = " + fmt(vodd)});

    // one-sided slopes of the sorted upper/lower branch across the crossing
    auto upper = [&](double t) {
      const Eigen::VectorXd ev = spectrum(fam.h(t));
      double best = std::numeric_limits<double>::infinity(), second = best;
      for (int i = 0; i < ev.size(); ++i) {
        const double dd = std::abs(ev(i) - e_pair);
        if (dd < best) {
          second = best;
          best = dd;
        } else if (dd < second) {
          second = dd;
        }
      }
      // value of the larger of the two nearest eigenvalues
      double a = 0, b = 0;
      double da = std::numeric_limits<double>::infinity(), db = da;
      for (int i = 0; i < ev.size(); ++i) {
        const double dd = std::abs(ev(i) - e_pair);
        if (dd < da) {
          b = a;
          db = da;
          a = ev(i);
          da = dd;
        } else if (dd < db) {
          b = ev(i);
          db = dd;
        }
      }
      return std::max(a, b);
    };
    const double h = 1e-5;
    const double right = one_sided_slope(upper, theta_s, h);
    const double left = -one_sided_slope(upper, theta_s, -h);
    const double match_r = std::abs(right - s);
    const double match_l = std::abs(-left - (-s));
    out.push_back({"kato.one_sided_slopes_match_group",
                   match_r <= 1e-4 && match_l <= 1e-4,
                   "right " + fmt(right) + " vs " + fmt(s) + ", left " + fmt(left)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// block-geometry suite
// ---------------------------------------------------------------------------

namespace {

struct GeoConfig {
  int dim = 1;
  long long l1 = 2;
  std::vector<HalfSite> stage1_centers;
  std::vector<HalfSite> new_centers;
};

GeoConfig random_geo_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  GeoConfig g;
  g.dim = uni(rng) < 0.5 ? 1 : 2;
  g.l1 = g.dim == 1 ? 2 + static_cast<int>(uni(rng) * 2) : 2;
  const long long l2 = g.l1 * g.l1;
  const long long span = g.dim == 1 ? 2000 : 300;
  const long long new_sep = 10 * l2 + 2 * (l2 + 50 * g.l1) + 2;

  const int n_new = 1 + static_cast<int>(uni(rng) * 2.999);
  for (int i = 0; i < n_new; ++i) {
    HalfSite c{};
    c[0] = static_cast<int>(2 * (i * new_sep - span / 2 + static_cast<long long>(uni(rng) * 20)));
    for (int k = 1; k < g.dim; ++k)
      c[k] = static_cast<int>(2 * static_cast<long long>((uni(rng) - 0.5) * 40));
    g.new_centers.push_back(c);
  }
  // priors: with probability 1/2 put one near each new center at a distance
  // that triggers absorption, plus occasional far-away ones
  for (const auto& c : g.new_centers) {
    if (uni(rng) < 0.5) {
      HalfSite p = c;
      const int dist = static_cast<int>(l2 + g.l1 - 1 - uni(rng) * (2 * g.l1));
      const int axis = g.dim == 1 ? 0 : (uni(rng) < 0.5 ? 0 : 1);
      p[axis] += 2 * dist * (uni(rng) < 0.5 ? 1 : -1);
      g.stage1_centers.push_back(p);
    }
    if (uni(rng) < 0.3) {
      HalfSite p = c;
      p[0] += 2 * static_cast<int>(3 * l2 + uni(rng) * 10);
      g.stage1_centers.push_back(p);
    }
  }
  // enforce pairwise separation between priors
  std::vector<HalfSite> pruned;
  for (const auto& p : g.stage1_centers) {
    bool ok = true;
    for (const auto& q : pruned)
      if (l1_dist2(p, q, g.dim) < 2 * (10 * g.l1)) ok = false;
    if (ok) pruned.push_back(p);
  }
  g.stage1_centers = pruned;
  return g;
}

}  // namespace

std::vector<Check> suite_block_geometry(std::uint64_t seed, int configs, int threads) {
  const FrequencyVector omega1 = FrequencyVector::golden();
  const FrequencyVector omega2 = FrequencyVector::default_for_dim(2, 20);
  std::vector<int> fail_props(configs, 0), fail_shuffle(configs, 0), fail_tr(configs, 0);
  std::vector<std::string> why(configs);

  parallel_for(configs, threads, [&](int i) {
    std::mt19937_64 rng(derive_seed(seed, i));
    const GeoConfig g = random_geo_config(rng);
    const FrequencyVector& omega = g.dim == 1 ? omega1 : omega2;
    try {
      std::vector<BlockFamily> priors;
      if (!g.stage1_centers.empty())
        priors.push_back(
            build_block_family(g.dim, 1, g.stage1_centers, {}, g.l1, 0, omega, 0.17, nullptr));
      BlockBuildDiagnostics diag;
      const long long l2 = g.l1 * g.l1;
      const BlockFamily fam = build_block_family(g.dim, priors.empty() ? 1 : 2, g.new_centers,
                                                 priors, l2, g.l1, omega, 0.17, &diag);
      for (int t : diag.absorption_counts)
        if (t >= 10) fail_tr[i] = 1;

      // property (1): size sandwich
      for (const auto& b : fam.blocks) {
        const LatticeRegion inner = LatticeRegion::ball_half(g.dim, b.center2, 2 * l2);
        const LatticeRegion outer =
            LatticeRegion::ball_half(g.dim, b.center2, 2 * (l2 + 50 * g.l1));
        if (!b.sites.contains_all(inner) || !outer.contains_all(b.sites)) {
          fail_props[i] = 1;
          why[i] = "size sandwich";
        }
      }
      // property (2): absorption (builder verifies too; re-check here)
      for (const auto& pf : priors)
        for (const auto& pb : pf.blocks)
          for (const auto& nb : fam.blocks)
            if (pb.sites.intersects(nb.sites) && !nb.sites.contains_all(pb.sites)) {
              fail_props[i] = 1;
              why[i] = "absorption";
            }
      // property (3): symmetry
      for (const auto& b : fam.blocks)
        for (const auto& x : b.sites.sites()) {
          Site rx{};
          for (int k = 0; k < g.dim; ++k) rx[k] = b.center2[k] - x[k];
          if (!b.sites.contains(rx)) {
            fail_props[i] = 1;
            why[i] = "symmetry";
          }
        }
      // property (4): template equality is structural; verify via offsets
      for (const auto& b : fam.blocks) {
        if (b.sites.size() != static_cast<int>(fam.template_offsets2.size())) {
          fail_props[i] = 1;
          why[i] = "template";
        }
      }
      // disjointness
      for (size_t a = 0; a < fam.blocks.size(); ++a)
        for (size_t b = a + 1; b < fam.blocks.size(); ++b)
          if (fam.blocks[a].sites.intersects(fam.blocks[b].sites)) {
            fail_props[i] = 1;
            why[i] = "disjoint";
          }

      // shuffled center order must give identical site sets
      std::vector<HalfSite> shuffled = g.new_centers;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      const BlockFamily fam2 = build_block_family(g.dim, fam.stage, shuffled, priors, l2, g.l1,
                                                  omega, 0.17, nullptr);
      for (const auto& b : fam.blocks) {
        bool found = false;
        for (const auto& b2 : fam2.blocks)
          if (b2.center2 == b.center2 && b2.sites == b.sites) found = true;
        if (!found) {
          fail_shuffle[i] = 1;
          why[i] = "shuffle";
        }
      }
    } catch (const std::exception& e) {
      fail_props[i] = 1;
      why[i] = e.what();
    }
  });

  int bp = 0, bs = 0, bt = 0;
  std::string first;
  for (int i = 0; i < configs; ++i) {
    bp += fail_props[i];
    bs += fail_shuffle[i];
    bt += fail_tr[i];
    if (first.empty() && !why[i].empty()) first = why[i];
  }
  std::vector<Check> out;
  out.push_back(combine("blocks.four_properties", bp, configs, first));
  out.push_back(combine("blocks.absorption_steps_below_10", bt, configs));
  out.push_back(combine("blocks.shuffled_order_identical", bs, configs));
  return out;
}

// ---------------------------------------------------------------------------
// counting lemma + trial function suite
// ---------------------------------------------------------------------------

std::vector<Check> suite_counting_and_trial(std::uint64_t seed, int counting_instances,
                                            int trial_instances, int threads) {
  std::vector<Check> out;

  const FrequencyVector omega = FrequencyVector::golden();
  const PotentialProfile vcos = PotentialProfile::cosine();

  std::vector<int> fail(counting_instances, 0), skipped(counting_instances, 0);
  parallel_for(counting_instances, threads, [&](int i) {
    std::mt19937_64 rng(derive_seed(seed, i));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const LatticeRegion lambda = LatticeRegion::box(1, Site{}, 30);
    const double theta = uni(rng);
    const double eps = 1e-4;
    const double e_star = -1.05 + 2.1 * uni(rng);
    const int k = static_cast<int>(uni(rng) * 7.0);  // sites to remove

    // remove the k sites whose diagonal is closest to E*
    std::vector<std::pair<double, Site>> by_gap;
    for (const auto& s : lambda.sites())
      by_gap.emplace_back(std::abs(vcos.eval(wrap_unit(theta + omega.dot(s))) - e_star), s);
    std::sort(by_gap.begin(), by_gap.end());
    std::vector<Site> kept;
    for (size_t idx = k; idx < by_gap.size(); ++idx) kept.push_back(by_gap[idx].second);
    const LatticeRegion lambda_prime(1, kept);

    const OperatorSlice sub = assemble(lambda_prime, TorusPhase(theta), eps, vcos, omega);
    const double dist = dist_to_spectrum(sub.matrix, e_star);
    if (dist <= 1e-9) {
      skipped[i] = 1;  // degenerate draw, precondition cannot be met
      return;
    }
    const double eta = 0.4 * dist;
    const CountingLemmaReport rep =
        check_counting_lemma(lambda, lambda_prime, TorusPhase(theta), eps, vcos, omega, e_star, eta);
    if (!rep.applicable)
      skipped[i] = 1;
    else if (!rep.pass)
      fail[i] = 1;
  });
  int bad = 0, skip = 0;
  for (int i = 0; i < counting_instances; ++i) {
    bad += fail[i];
    skip += skipped[i];
  }
  out.push_back(combine("counting.lemma_randomized", bad, counting_instances,
                        std::to_string(skip) + " degenerate draws skipped"));

  std::vector<int> tfail(trial_instances, 0);
  parallel_for(trial_instances, threads, [&](int i) {
    std::mt19937_64 rng(derive_seed(seed ^ 0x5a5a5a5aULL, i));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int n = 30;
    Eigen::MatrixXd h(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = r; c < n; ++c) h(r, c) = h(c, r) = gauss(rng);
    const int m = 1 + static_cast<int>(uni(rng) * 3.0);
    Eigen::MatrixXd raw(n, m);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < m; ++c) raw(r, c) = gauss(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(raw)
                                  .householderQ() *
                              Eigen::MatrixXd::Identity(n, m);
    const double e_star = -5.0 + 10.0 * uni(rng);
    double delta = 0.0;
    for (int c = 0; c < m; ++c)
      delta = std::max(delta, (h * q.col(c) - e_star * q.col(c)).norm());
    const TrialFunctionReport rep = check_trial_function_lemma(h, q, e_star, delta + 1e-12);
    if (!rep.applicable || !rep.pass || !rep.corollary_pass) tfail[i] = 1;
  });
  int tbad = 0;
  for (int i = 0; i < trial_instances; ++i) tbad += tfail[i];
  out.push_back(combine("counting.trial_function_randomized", tbad, trial_instances));

  // the two pinned degenerate cases
  {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2);
    h(1, 1) = 10.0;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2, 1);
    t(0, 0) = 1.0;
    const TrialFunctionReport rep = check_trial_function_lemma(h, t, 0.1, 0.1);
    out.push_back({"counting.trial_function_pinned", rep.applicable && rep.pass && rep.corollary_pass,
                   "sum_sq " + fmt(rep.sum_sq)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Morse suite
// ---------------------------------------------------------------------------

std::vector<Check> suite_morse() {
  std::vector<Check> out;
  const double delta = 0.05;
  const double h = delta / 100.0;

  auto sample = [&](double lo, double hi, const std::function<double(double)>& f) {
    std::vector<double> ts, vs;
    for (double t = lo; t <= hi + 1e-12; t += h) {
      ts.push_back(t);
      vs.push_back(f(t));
    }
    return std::make_pair(ts, vs);
  };

  {
    const double ts0 = 0.3;
    auto [t, v] = sample(ts0 - 0.2, ts0 + 0.2, [&](double x) { return 2.0 * (x - ts0) * (x - ts0); });
    const MorseReport rep = check_morse_property(t, v, ts0, delta);
    out.push_back({"morse.quadratic", rep.pass(),
                   "worst pair ratio " + fmt(rep.worst_pair_ratio)});
  }
  {
    // cosine about its own minimum
    const double ts0 = 0.5;
    auto [t, v] = sample(ts0 - 0.15, ts0 + 0.15,
                         [&](double x) { return std::cos(2.0 * std::numbers::pi * x); });
    const MorseReport rep = check_morse_property(t, v, ts0, delta);
    out.push_back({"morse.cosine_minimum", rep.pass(),
                   "worst pair ratio " + fmt(rep.worst_pair_ratio)});
  }
  {
    // linear slope 3: hypothesis vacuous, conclusions trivially hold
    const double ts0 = 0.0;
    auto [t, v] = sample(-0.2, 0.2, [&](double x) { return 3.0 * x; });
    const MorseReport rep = check_morse_property(t, v, ts0, delta);
    out.push_back({"morse.linear_slope3", rep.pass(), "hypothesis vacuous"});
  }
  {
    // shallow parabola: hypothesis fails, must report inapplicable
    const double ts0 = 0.0;
    auto [t, v] = sample(-0.2, 0.2, [&](double x) { return 0.5 * x * x; });
    const MorseReport rep = check_morse_property(t, v, ts0, delta);
    out.push_back({"morse.shallow_inapplicable", !rep.applicable, rep.reason});
  }
  return out;
}

}  // namespace qpmsa
