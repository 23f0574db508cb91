#include <doctest.h>

#include <cmath>
#include <numbers>

#include "core/eigencurve.hpp"

using namespace qpmsa;

namespace {

ThetaFamily toy_two_level(double theta_s, double g) {
  // H(theta) = [[theta - theta_s, g], [g, theta_s - theta]]
  ThetaFamily fam;
  fam.size = 2;
  fam.h = [=](double t) {
    Eigen::MatrixXd m(2, 2);
    m << t - theta_s, g, g, theta_s - t;
    return m;
  };
  fam.h1 = [](double) {
    Eigen::MatrixXd m(2, 2);
    m << 1, 0, 0, -1;
    return m;
  };
  fam.h2 = [](double) { return Eigen::MatrixXd::Zero(2, 2); };
  return fam;
}

}  // namespace

TEST_CASE("single-site block: branch equals the sampled potential") {
  const FrequencyVector omega = FrequencyVector::golden();
  const PotentialProfile v = PotentialProfile::cosine();
  const Site c = make_site({4});
  const OperatorFactory f(LatticeRegion(1, {c}), 0.0, v, omega);
  const ThetaFamily fam = lattice_theta_family(f);
  const TraceResult tr = trace_branches(fam, 0.1, 0.2, 0.0, 10.0);
  REQUIRE(tr.branches.size() == 1);
  CHECK(tr.branches[0].cls == 'A');
  for (const auto& s : tr.branches[0].samples) {
    CHECK(s.value ==
          doctest::Approx(v.eval(wrap_unit(s.theta + omega.dot(c)))).epsilon(1e-12));
    // first derivative is exactly v'
    CHECK(derivative_first(fam, s.theta, s.psi) ==
          doctest::Approx(v.eval_d1(wrap_unit(s.theta + omega.dot(c)))).epsilon(1e-12));
  }
}

TEST_CASE("2x2 toy: hyperbola branches with min gap 2g at theta_s") {
  const double theta_s = 0.4, g = 0.01;
  const ThetaFamily fam = toy_two_level(theta_s, g);
  const TraceResult tr = trace_branches(fam, theta_s - 0.1, theta_s + 0.1, 0.0, 1.0);
  REQUIRE(tr.branches.size() == 2);
  CHECK(tr.min_gap == doctest::Approx(2 * g).epsilon(1e-6));
  CHECK(tr.min_gap_theta == doctest::Approx(theta_s).epsilon(1e-3));
  CHECK_FALSE(tr.crossing.has_value());  // avoided crossing
  for (const auto& b : tr.branches) {
    CHECK(b.min_overlap >= 0.9);
    for (const auto& s : b.samples) {
      const double expect = std::sqrt(g * g + (s.theta - theta_s) * (s.theta - theta_s));
      CHECK(std::abs(std::abs(s.value) - expect) <= 1e-10);
    }
  }
}

TEST_CASE("window with three eigenvalues raises naming the intruder") {
  ThetaFamily fam;
  fam.size = 3;
  fam.h = [](double t) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
    m(0, 0) = t;
    m(1, 1) = -t;
    m(2, 2) = 0.01;
    return m;
  };
  fam.h1 = [](double) { return Eigen::MatrixXd::Zero(3, 3); };
  fam.h2 = [](double) { return Eigen::MatrixXd::Zero(3, 3); };
  CHECK_THROWS_WITH_AS(trace_branches(fam, -0.1, 0.1, 0.0, 1.0),
                       doctest::Contains("captures 3"), std::runtime_error);
}

TEST_CASE("derivative formulas on a decoupled multi-site block") {
  const FrequencyVector omega = FrequencyVector::golden();
  const PotentialProfile v = PotentialProfile::cosine();
  const LatticeRegion region = LatticeRegion::box(1, Site{}, 5);
  const OperatorFactory f(region, 0.0, v, omega);
  const ThetaFamily fam = lattice_theta_family(f);
  const double theta = 0.23;
  // eps = 0: eigenvectors are coordinate vectors; derivative picks out v' at
  // the localized site
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fam.h(theta));
  for (int k = 0; k < region.size(); ++k) {
    const Eigen::VectorXd psi = es.eigenvectors().col(k);
    int site_idx = 0;
    psi.cwiseAbs().maxCoeff(&site_idx);
    const double want = v.eval_d1(wrap_unit(theta + omega.dot(region.site(site_idx))));
    CHECK(derivative_first(fam, theta, psi) == doctest::Approx(want).epsilon(1e-10));
    const double want2 = v.eval_d2(wrap_unit(theta + omega.dot(region.site(site_idx))));
    const SecondDerivative d2 = derivative_second(fam, theta, es.eigenvalues()(k), psi);
    CHECK(d2.value == doctest::Approx(want2).epsilon(1e-8));
    CHECK(d2.solve_residual <= 1e-10);
  }
}

TEST_CASE("two-level split reconstructs the full second derivative on 2x2") {
  const ThetaFamily fam = toy_two_level(0.0, 0.3);
  const double theta = 0.2;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fam.h(theta));
  const SecondDerivative full =
      derivative_second(fam, theta, es.eigenvalues()(0), es.eigenvectors().col(0));
  const SecondDerivative split = derivative_second_two_level(
      fam, theta, es.eigenvalues()(0), es.eigenvectors().col(0), es.eigenvalues()(1),
      es.eigenvectors().col(1));
  CHECK(std::abs(full.value - split.value) <= 1e-8);
  CHECK(split.remainder == doctest::Approx(0.0).epsilon(1e-12));  // no third level
}

TEST_CASE("Kato derivative group on the diagonal toy") {
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
  CHECK(g.lower == doctest::Approx(-1.0));
  CHECK(g.upper == doctest::Approx(1.0));
  // wrong degeneracy dimension raises
  CHECK_THROWS_AS(crossing_derivative_group(fam, 0.5, 0.5, 1e-12), std::runtime_error);
}

TEST_CASE("parity split of a two-site symmetric block") {
  // sites -1 and +1 about c = 0, equal diagonals
  const LatticeRegion region(1, {make_site({-1}), make_site({1})});
  Eigen::MatrixXd h(2, 2);
  h << 0.3, 0.05, 0.05, 0.3;
  Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(2, 2);
  const ParitySplit split = symmetric_antisymmetric_split(region, doubled(Site{}), h, basis);
  CHECK(split.symmetric(0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(split.symmetric(1) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(split.antisymmetric(0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(split.antisymmetric(1) == doctest::Approx(-1.0 / std::sqrt(2.0)));

  // asymmetric diagonal breaks [R, H] = 0
  Eigen::MatrixXd bad = h;
  bad(0, 0) = 0.9;
  CHECK_THROWS_AS(symmetric_antisymmetric_split(region, doubled(Site{}), bad, basis),
                  std::runtime_error);

  // parity-pure basis raises
  Eigen::MatrixXd pure(2, 2);
  pure << 1.0 / std::sqrt(2.0), 0.0, 1.0 / std::sqrt(2.0), 0.0;
  pure(0, 1) = 0.0;
  pure(1, 1) = 0.0;
  CHECK_THROWS_AS(symmetric_antisymmetric_split(region, doubled(Site{}), h, pure),
                  std::runtime_error);
}

TEST_CASE("reflection requires a symmetric region") {
  const LatticeRegion asym(1, {make_site({0}), make_site({1})});
  CHECK_THROWS_AS(reflection_matrix(asym, doubled(Site{})), std::invalid_argument);
}

TEST_CASE("Morse checker on the three model curves") {
  const double delta = 0.05;
  const double h = delta / 100.0;
  auto sample = [&](double lo, double hi, auto f) {
    std::vector<double> ts, vs;
    for (double t = lo; t <= hi + 1e-12; t += h) {
      ts.push_back(t);
      vs.push_back(f(t));
    }
    return std::make_pair(ts, vs);
  };

  // quadratic: equality structure |E(t2)-E(t1)| = 2|t2^2 - t1^2| vs bound m^2/2
  {
    auto [ts, vs] = sample(-0.2, 0.2, [](double t) { return 2.0 * t * t; });
    const MorseReport rep = check_morse_property(ts, vs, 0.0, delta);
    CHECK(rep.applicable);
    CHECK(rep.pass());
    CHECK(rep.worst_pair_ratio >= 4.0 - 1e-6);
    CHECK(rep.symmetry_defect <= 1e-12);
  }
  // linear slope 3: hypothesis vacuous, conclusions trivially hold
  {
    auto [ts, vs] = sample(-0.2, 0.2, [](double t) { return 3.0 * t; });
    const MorseReport rep = check_morse_property(ts, vs, 0.0, delta);
    CHECK(rep.applicable);
    CHECK(rep.pass());
  }
  // shallow curvature: inapplicable, not a failure
  {
    auto [ts, vs] = sample(-0.2, 0.2, [](double t) { return 0.5 * t * t; });
    const MorseReport rep = check_morse_property(ts, vs, 0.0, delta);
    CHECK_FALSE(rep.applicable);
    CHECK_FALSE(rep.reason.empty());
  }
  // grid too coarse is rejected
  {
    std::vector<double> ts, vs;
    for (double t = -0.2; t <= 0.2; t += delta) {
      ts.push_back(t);
      vs.push_back(t * t * 2);
    }
    CHECK_THROWS_AS(check_morse_property(ts, vs, 0.0, delta), std::invalid_argument);
  }
}

TEST_CASE("separation growth bounds") {
  const double theta_s = 0.0, g = 0.01;
  // touching hyperbolas: |E - EE| = 2 sqrt(g^2 + t^2) >= 2|t| passes for
  // delta_prev <= 1
  {
    const ThetaFamily fam = toy_two_level(theta_s, g);
    const TraceResult tr = trace_branches(fam, -0.1, 0.1, 0.0, 1.0);
    const SeparationReport rep =
        check_separation_growth(tr.branches[0], tr.branches[1], theta_s, 1.0);
    CHECK(rep.pass);
    CHECK(rep.worst_ratio >= 2.0 - 1e-9);
  }
  // exact crossing +-s(t - theta_s): passes iff 2|s| >= delta_prev^2
  {
    EigenBranch a, b;
    const double s = 0.05;
    for (int k = -50; k <= 50; ++k) {
      const double t = k * 1e-3;
      a.samples.push_back({t, s * t, Eigen::VectorXd(), 1.0});
      b.samples.push_back({t, -s * t, Eigen::VectorXd(), 1.0});
    }
    CHECK(check_separation_growth(a, b, 0.0, std::sqrt(2 * s) * 0.999).pass);
    CHECK_FALSE(check_separation_growth(a, b, 0.0, std::sqrt(2 * s) * 1.001).pass);
  }
}
