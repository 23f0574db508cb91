#include <doctest.h>

#include <cmath>
#include <random>

#include "core/green.hpp"

using namespace qpmsa;

namespace {
OperatorSlice make_op(int dim, int radius, double theta, double eps,
                      const char* pot = "cos") {
  const FrequencyVector omega = FrequencyVector::default_for_dim(dim, 20);
  const PotentialProfile v = PotentialProfile::by_name(pot);
  return assemble(LatticeRegion::box(dim, Site{}, radius), TorusPhase(theta), eps, v, omega);
}
}  // namespace

TEST_CASE("eps = 0 Green is the diagonal closed form") {
  const OperatorSlice op = make_op(1, 15, 0.37, 0.0);
  const double energy = 1.7;
  const GreenSolve gs = green(op, energy);
  for (int i = 0; i < op.region.size(); ++i)
    for (int j = 0; j < op.region.size(); ++j) {
      if (i == j)
        CHECK(gs.G(i, i) == doctest::Approx(1.0 / (op.matrix(i, i) - energy)).epsilon(1e-12));
      else
        CHECK(gs.G(i, j) == 0.0);
    }
}

TEST_CASE("2x2 analytic inverse") {
  Eigen::MatrixXd h(2, 2);
  h << 1.0, 0.5, 0.5, 0.0;
  const double energy = 2.0;
  const GreenSolve gs = green_matrix(h, energy);
  // (H - 2I) = [[-1, .5], [.5, -2]], det = 1.75, inverse = adj/det
  const double det = 1.75;
  CHECK(gs.G(0, 0) == doctest::Approx(-2.0 / det).epsilon(1e-12));
  CHECK(gs.G(0, 1) == doctest::Approx(-0.5 / det).epsilon(1e-12));
  CHECK(gs.G(1, 0) == doctest::Approx(-0.5 / det).epsilon(1e-12));
  CHECK(gs.G(1, 1) == doctest::Approx(-1.0 / det).epsilon(1e-12));
  CHECK(gs.residual <= 1e-9);
}

TEST_CASE("energy on the spectrum raises with the distance attached") {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2);
  h(0, 0) = 1.0;
  h(1, 1) = -1.0;
  CHECK_THROWS_AS(green_matrix(h, 1.0), NearSingularError);
  try {
    green_matrix(h, 1.0 + 1e-14);
  } catch (const NearSingularError& e) {
    CHECK(e.dist_to_spectrum <= 1e-13);
  }
}

TEST_CASE("green solve is symmetric when H is") {
  const OperatorSlice op = make_op(2, 3, 0.11, 0.4, "cos2");
  const Eigen::VectorXd ev = spectrum(op.matrix);
  double energy = 2.6;
  const GreenSolve gs = green(op, energy);
  CHECK((gs.G - gs.G.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("op norm equals inverse spectral distance") {
  const OperatorSlice op = make_op(1, 12, 0.41, 0.2);
  const double energy = 1.9;
  const GreenFunctionReport rep = check_green_bounds(op, energy, 1e9, 0.0, 1);
  const double dist = dist_to_spectrum(op.matrix, energy);
  // exact identity for symmetric matrices, up to solver tolerance
  CHECK(rep.op_norm == doctest::Approx(1.0 / dist).epsilon(1e-9));
}

TEST_CASE("zero-good bounds on a 40-site chain with tiny epsilon") {
  // E* outside the spectrum band, so the whole region is 0-good at
  // delta0 = eps^{1/20}
  const double eps = 1e-6;
  const double delta0 = std::pow(eps, 1.0 / 20.0);
  const FrequencyVector omega = FrequencyVector::golden();
  const PotentialProfile v = PotentialProfile::cosine();
  std::vector<Site> sites;
  for (int x = -20; x < 20; ++x) sites.push_back(make_site({x}));
  const OperatorSlice op =
      assemble(LatticeRegion(1, sites), TorusPhase(0.37), eps, v, omega);
  const double e_star = 2.0;
  const GreenFunctionReport rep = check_zero_good_bounds(op, e_star, delta0);
  CHECK(rep.norm_ok);
  CHECK(rep.decay_ok);
  CHECK(rep.op_norm <= 10.0 / delta0);
  // the fitted decay rate beats gamma0 on separated pairs
  const GreenSolve gs = green(op, e_star);
  const DecayFit fit = fit_offdiag_decay(gs.G, op.region, 3);
  CHECK(fit.rate >= std::abs(std::log(eps)) / 2.0);
}

TEST_CASE("zero-good bounds with eps = 0: off-diagonal exactly zero") {
  const OperatorSlice op = make_op(1, 10, 0.29, 0.0);
  const GreenFunctionReport rep = check_zero_good_bounds(op, 3.0, 1.0);
  CHECK(rep.norm_ok);   // ||G|| = 1/min gap <= 1/delta0 <= 10/delta0
  CHECK(rep.decay_ok);  // infinite rate, off-diagonals vanish
}

TEST_CASE("resolvent identity degenerate and random cases") {
  const OperatorSlice op = make_op(1, 8, 0.11, 0.3);
  CHECK(check_resolvent_identity(op, op.region, 2.7) <= 1e-12);

  const OperatorSlice dec = make_op(1, 8, 0.11, 0.0);
  CHECK(check_resolvent_identity(dec, LatticeRegion::box(1, Site{}, 3), 2.7) <= 1e-12);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const OperatorSlice outer = make_op(2, 2, uni(rng), 0.1);
    Site c{};
    c[0] = static_cast<int>(uni(rng) * 3) - 1;
    c[1] = static_cast<int>(uni(rng) * 3) - 1;
    const LatticeRegion sub = LatticeRegion::box(2, c, 1);
    const Eigen::VectorXd ev = spectrum(outer.matrix);
    double energy = 2.5 + uni(rng);
    CHECK(check_resolvent_identity(outer, sub, energy) <= 1e-8);
  }
}

TEST_CASE("inverse-iteration eigenvector keeps genuine tails") {
  const OperatorSlice op = make_op(1, 60, 0.17, 1e-6);
  const Eigen::VectorXd ev = spectrum(op.matrix);
  const double lambda = ev(ev.size() / 2);
  const Eigen::VectorXd psi = localized_eigenvector(op.matrix, lambda, 0, 2);
  CHECK(psi.norm() == doctest::Approx(1.0));
  const double residual = (op.matrix * psi - lambda * psi).norm();
  CHECK(residual <= 1e-8);
  // tails fall below the dense-eigensolver mixing floor
  double min_positive = 1.0;
  for (int i = 0; i < psi.size(); ++i)
    if (std::abs(psi(i)) > 0) min_positive = std::min(min_positive, std::abs(psi(i)));
  CHECK(min_positive < 1e-20);
}
