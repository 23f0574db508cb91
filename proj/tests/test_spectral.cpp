#include <doctest.h>

#include <cmath>
#include <random>

#include "core/green.hpp"
#include "core/spectral.hpp"

#ifdef QPMSA_HAVE_LAPACKE
#include <lapacke.h>
#endif

using namespace qpmsa;

namespace {
OperatorSlice make_op(int dim, int radius, double theta, double eps) {
  const FrequencyVector omega = FrequencyVector::default_for_dim(dim, 20);
  const PotentialProfile v = PotentialProfile::cosine();
  return assemble(LatticeRegion::box(dim, Site{}, radius), TorusPhase(theta), eps, v, omega);
}

#ifdef QPMSA_HAVE_LAPACKE
// independent counting oracle: Sylvester inertia of H - t via LDL^T
// factorization; a 2x2 pivot block always carries one eigenvalue of each sign
int count_below(const Eigen::MatrixXd& h, double t) {
  const int n = static_cast<int>(h.rows());
  std::vector<double> a(h.data(), h.data() + n * n);
  for (int i = 0; i < n; ++i) a[i * n + i] -= t;
  std::vector<lapack_int> ipiv(n);
  const lapack_int info =
      LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n, a.data(), n, ipiv.data());
  REQUIRE(info == 0);
  int neg = 0;
  int i = 0;
  while (i < n) {
    if (ipiv[i] > 0) {
      if (a[i * n + i] < 0) ++neg;
      ++i;
    } else {
      ++neg;  // 2x2 block: one negative, one positive
      i += 2;
    }
  }
  return neg;
}
#endif
}  // namespace

TEST_CASE("eigenvalue window counts") {
  const OperatorSlice op = make_op(1, 20, 0.37, 0.1);
  // huge window captures everything
  CHECK(count_eigenvalues_window(op.matrix, 0.0, 100.0) == op.region.size());
  // zero window at a generic energy captures nothing
  CHECK(count_eigenvalues_window(op.matrix, 0.123456, 0.0) == 0);
}

#ifdef QPMSA_HAVE_LAPACKE
TEST_CASE("window count matches the factorization inertia oracle") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 50;
    Eigen::MatrixXd h(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) h(i, j) = h(j, i) = gauss(rng);
    const double e = 4.0 * (uni(rng) - 0.5);
    const double eta = 0.5 + uni(rng);
    const int direct = count_eigenvalues_window(h, e, eta);
    const int inertia = count_below(h, e + eta) - count_below(h, e - eta);
    // endpoint ties are measure-zero for Gaussian draws
    CHECK(direct == inertia);
  }
}
#endif

TEST_CASE("counting lemma: Lambda' = Lambda excludes the window entirely") {
  const FrequencyVector omega = FrequencyVector::golden();
  const PotentialProfile v = PotentialProfile::cosine();
  const LatticeRegion lambda = LatticeRegion::box(1, Site{}, 25);
  const OperatorSlice op = assemble(lambda, TorusPhase(0.41), 1e-4, v, omega);
  const double e_star = 0.3;
  const double dist = dist_to_spectrum(op.matrix, e_star);
  REQUIRE(dist > 0);
  const CountingLemmaReport rep =
      check_counting_lemma(lambda, lambda, TorusPhase(0.41), 1e-4, v, omega, e_star, 0.4 * dist);
  CHECK(rep.applicable);
  CHECK(rep.symmetric_difference == 0);
  CHECK(rep.count == 0);
  CHECK(rep.pass);
}

TEST_CASE("counting lemma: removing the k resonant sites bounds the count by k") {
  const FrequencyVector omega = FrequencyVector::golden();
  const PotentialProfile v = PotentialProfile::cosine();
  const LatticeRegion lambda = LatticeRegion::box(1, Site{}, 30);
  const double theta = 0.11, e_star = 0.45;
  // eps = 0: spectrum is the diagonal; remove the k closest diagonal values
  std::vector<std::pair<double, Site>> by_gap;
  for (const auto& s : lambda.sites())
    by_gap.emplace_back(std::abs(v.eval(wrap_unit(theta + omega.dot(s))) - e_star), s);
  std::sort(by_gap.begin(), by_gap.end());
  const int k = 4;
  std::vector<Site> kept;
  for (size_t i = k; i < by_gap.size(); ++i) kept.push_back(by_gap[i].second);
  const LatticeRegion lambda_prime(1, kept);
  const double eta = 0.5 * by_gap[k].first;  // window holds exactly the k removed values
  const CountingLemmaReport rep =
      check_counting_lemma(lambda, lambda_prime, TorusPhase(theta), 0.0, v, omega, e_star, eta);
  CHECK(rep.applicable);
  CHECK(rep.symmetric_difference == k);
  CHECK(rep.count <= k);
  CHECK(rep.pass);
}

TEST_CASE("counting lemma: unverifiable precondition reports inapplicable") {
  const FrequencyVector omega = FrequencyVector::golden();
  const PotentialProfile v = PotentialProfile::cosine();
  const LatticeRegion lambda = LatticeRegion::box(1, Site{}, 20);
  const OperatorSlice op = assemble(lambda, TorusPhase(0.41), 1e-4, v, omega);
  const Eigen::VectorXd ev = spectrum(op.matrix);
  // eta too large for the resolvent bound
  const CountingLemmaReport rep = check_counting_lemma(
      lambda, lambda, TorusPhase(0.41), 1e-4, v, omega, ev(5) + 1e-5, 1.0);
  CHECK_FALSE(rep.applicable);
}

TEST_CASE("IDS scan: diagonal closed form and monotonicity") {
  const FrequencyVector omega = FrequencyVector::golden();
  const PotentialProfile v = PotentialProfile::cosine();
  const LatticeRegion region = LatticeRegion::box(1, Site{}, 150);
  const double theta = 0.37, e_star = 0.4;
  const OperatorSlice op = assemble(region, TorusPhase(theta), 0.0, v, omega);
  std::vector<double> etas = {1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  const IDSReport rep = ids_window_scan(op, e_star, etas);
  CHECK(rep.monotone);
  for (size_t i = 0; i < etas.size(); ++i) {
    int direct = 0;
    for (const auto& s : region.sites())
      if (std::abs(v.eval(wrap_unit(theta + omega.dot(s))) - e_star) <= rep.etas[i]) ++direct;
    CHECK(rep.counts[i] == direct);
    CHECK(rep.increments[i] == doctest::Approx(double(direct) / region.size()));
  }
}

TEST_CASE("moments: eps = 0 gives unit moments at every time") {
  const OperatorSlice op = make_op(1, 30, 0.29, 0.0);
  const MomentReport rep = moment_sum(op, 2.0);
  for (double m : rep.per_time) CHECK(m == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.proxy == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.worst_unitarity_defect <= 1e-12);
  CHECK(rep.proxy_dominates);
}

TEST_CASE("moments: per-time sums never exceed the proxy") {
  const OperatorSlice op = make_op(1, 40, 0.17, 0.05);
  const MomentReport rep = moment_sum(op, 2.0);
  CHECK(rep.proxy_dominates);
  CHECK(std::isfinite(rep.proxy));
  CHECK(rep.worst_unitarity_defect <= 1e-8);
  CHECK(rep.sup_over_grid <= rep.proxy * (1 + 1e-9));
  // origin required
  const FrequencyVector omega = FrequencyVector::golden();
  const PotentialProfile v = PotentialProfile::cosine();
  const OperatorSlice off =
      assemble(LatticeRegion::box(1, make_site({30}), 3), TorusPhase(0.1), 0.0, v, omega);
  CHECK_THROWS_AS(moment_sum(off, 2.0), std::invalid_argument);
}

TEST_CASE("arithmetic set membership") {
  const FrequencyVector omega = FrequencyVector::golden();
  // exact resonance theta = -x0 omega / 2 fails at x0 for any A > 0
  {
    const double theta = wrap_unit(-3.0 * omega.component(0) / 2.0);
    const ArithmeticSetReport rep = arithmetic_set_membership(theta, omega, 0.05, 50, 1);
    CHECK_FALSE(rep.member);
    CHECK(std::abs(rep.worst_x[0]) == 3);
  }
  // A = 0: strict inequality against 0 always holds for irrational data
  {
    const ArithmeticSetReport rep = arithmetic_set_membership(0.17, omega, 0.0, 100, 1);
    CHECK(rep.member);
  }
  // scan decides membership at theta = 0.17, A = 0.05 (x = 1 already violates)
  {
    const ArithmeticSetReport rep = arithmetic_set_membership(0.17, omega, 0.05, 500, 1);
    CHECK_FALSE(rep.member);
    CHECK(std::abs(rep.worst_x[0]) == 1);
  }
  // the d+2 complement variant is weaker: 0.17 passes it at this radius
  {
    const ArithmeticSetReport repc = arithmetic_set_membership(0.17, omega, 1.0, 500, 2);
    CHECK(repc.exponent == 3);
    CHECK_FALSE(repc.member);  // x=1: ||2*0.17 + omega|| = 0.042 <= 1
    const ArithmeticSetReport repc2 = arithmetic_set_membership(0.17, omega, 0.04, 500, 2);
    CHECK(repc2.member);
  }
}

TEST_CASE("decay fit on synthetic profiles") {
  const LatticeRegion region = LatticeRegion::box(1, Site{}, 100);
  // delta function: single support point
  {
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(region.size());
    psi(*region.index_of(make_site({7}))) = 1.0;
    const EigenvectorDecay rep = decay_fit(psi, region);
    CHECK(rep.center == make_site({7}));
    CHECK(rep.single_support);
    CHECK(std::isinf(rep.rate));
  }
  // exact exponential: rate recovered to 1e-6
  {
    Eigen::VectorXd psi(region.size());
    for (int i = 0; i < region.size(); ++i)
      psi(i) = std::exp(-0.5 * l1_norm(region.site(i), 1));
    psi.normalize();
    const EigenvectorDecay rep = decay_fit(psi, region);
    CHECK(rep.center == make_site({0}));
    CHECK(rep.rate == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(rep.residual <= 1e-9);
  }
  // flat vector: rate ~ 0, not an error
  {
    Eigen::VectorXd psi = Eigen::VectorXd::Ones(region.size());
    psi.normalize();
    const EigenvectorDecay rep = decay_fit(psi, region);
    CHECK(rep.rate == doctest::Approx(0.0));
  }
}

TEST_CASE("trial function lemma") {
  // exact eigenvector with delta = 0 pins an exact eigenvalue
  {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
    h(0, 0) = 0.7;
    h(1, 1) = 2.0;
    h(2, 2) = -1.0;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(3, 1);
    t(0, 0) = 1.0;
    const TrialFunctionReport rep = check_trial_function_lemma(h, t, 0.7, 0.0);
    CHECK(rep.applicable);
    CHECK(rep.pass);
    CHECK(rep.sum_sq == doctest::Approx(0.0));
    CHECK(rep.corollary_pass);
  }
  // the diag(0, 10) pinned example
  {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2);
    h(1, 1) = 10.0;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2, 1);
    t(0, 0) = 1.0;
    const TrialFunctionReport rep = check_trial_function_lemma(h, t, 0.1, 0.1);
    CHECK(rep.applicable);
    CHECK(rep.pass);
    CHECK(rep.corollary_pass);
  }
  // non-orthonormal trials: inapplicable
  {
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(3, 3);
    Eigen::MatrixXd t = Eigen::MatrixXd::Ones(3, 2);
    const TrialFunctionReport rep = check_trial_function_lemma(h, t, 1.0, 0.5);
    CHECK_FALSE(rep.applicable);
  }
  // residual above delta: inapplicable
  {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2);
    h(1, 1) = 10.0;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2, 1);
    t(0, 0) = 1.0;
    const TrialFunctionReport rep = check_trial_function_lemma(h, t, 1.0, 0.5);
    CHECK_FALSE(rep.applicable);
  }
}
