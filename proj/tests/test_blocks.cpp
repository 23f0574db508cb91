#include <doctest.h>

#include <set>

#include "core/block_geometry.hpp"

using namespace qpmsa;

namespace {
HalfSite hs(int x) {
  HalfSite h{};
  h[0] = x;
  return h;
}
}  // namespace

TEST_CASE("single center with no priors gives the plain ball") {
  const FrequencyVector omega = FrequencyVector::golden();
  const BlockFamily fam =
      build_block_family(1, 1, {hs(0)}, {}, 9, 3, omega, 0.17, nullptr);
  REQUIRE(fam.blocks.size() == 1);
  CHECK(fam.blocks[0].sites == LatticeRegion::ball(1, Site{}, 9));
}

TEST_CASE("prior blocks touching the initial cube are absorbed whole") {
  const FrequencyVector omega = FrequencyVector::golden();
  // two stage-1 blocks (balls of radius 2) straddling the edge of the
  // radius-9 cube around 0
  const BlockFamily priors =
      build_block_family(1, 1, {hs(2 * 10), hs(2 * -10)}, {}, 2, 0, omega, 0.17, nullptr);
  BlockBuildDiagnostics diag;
  const BlockFamily fam =
      build_block_family(1, 2, {hs(0)}, {priors}, 9, 2, omega, 0.17, &diag);
  REQUIRE(fam.blocks.size() == 1);
  for (const auto& pb : priors.blocks) {
    CHECK(fam.blocks[0].sites.intersects(pb.sites));
    CHECK(fam.blocks[0].sites.contains_all(pb.sites));
  }
  for (int t : diag.absorption_counts) CHECK(t < 10);
}

TEST_CASE("blocks are symmetric about their centers") {
  const FrequencyVector omega = FrequencyVector::golden();
  const BlockFamily priors =
      build_block_family(1, 1, {hs(2 * 8)}, {}, 2, 0, omega, 0.17, nullptr);
  // half-integer center at 1/2
  const BlockFamily fam = build_block_family(1, 2, {hs(1)}, {priors}, 9, 2, omega, 0.17, nullptr);
  for (const auto& b : fam.blocks)
    for (const auto& x : b.sites.sites()) {
      Site rx{};
      rx[0] = b.center2[0] - x[0];
      CHECK(b.sites.contains(rx));
    }
}

TEST_CASE("template is shared across centers") {
  const FrequencyVector omega = FrequencyVector::golden();
  const BlockFamily priors =
      build_block_family(1, 1, {hs(2 * 9)}, {}, 2, 0, omega, 0.17, nullptr);
  const BlockFamily fam =
      build_block_family(1, 2, {hs(0), hs(2 * 400)}, {priors}, 9, 2, omega, 0.17, nullptr);
  REQUIRE(fam.blocks.size() == 2);
  CHECK(fam.blocks[0].sites.size() == fam.blocks[1].sites.size());
  // sites(B) - c identical
  const int shift = (fam.blocks[1].center2[0] - fam.blocks[0].center2[0]) / 2;
  for (int i = 0; i < fam.blocks[0].sites.size(); ++i)
    CHECK(fam.blocks[1].sites.site(i)[0] - fam.blocks[0].sites.site(i)[0] == shift);
  // the prior near center 0 is absorbed around BOTH centers via the
  // relative-position set, keeping translation invariance
  CHECK(fam.blocks[0].sites.contains(make_site({11})));
  CHECK(fam.blocks[1].sites.contains(make_site({411})));
}

TEST_CASE("overlapping new centers are rejected") {
  const FrequencyVector omega = FrequencyVector::golden();
  CHECK_THROWS_AS(build_block_family(1, 1, {hs(0), hs(2 * 5)}, {}, 9, 3, omega, 0.17, nullptr),
                  std::runtime_error);
}

TEST_CASE("enclosure: no intersecting block leaves lambda unchanged") {
  const FrequencyVector omega = FrequencyVector::golden();
  const BlockFamily fam = build_block_family(1, 1, {hs(2 * 50)}, {}, 3, 0, omega, 0.17, nullptr);
  const LatticeRegion lambda = LatticeRegion::box(1, Site{}, 10);
  CHECK(enclose_region(lambda, {fam}, 3) == lambda);
}

TEST_CASE("enclosure: straddling block is united in") {
  const FrequencyVector omega = FrequencyVector::golden();
  const BlockFamily fam = build_block_family(1, 1, {hs(2 * 12)}, {}, 3, 0, omega, 0.17, nullptr);
  const LatticeRegion lambda = LatticeRegion::box(1, Site{}, 10);
  const LatticeRegion enc = enclose_region(lambda, {fam}, 3);
  CHECK(enc == lambda.united(fam.blocks[0].sites));
}

TEST_CASE("enclosure reaches the fixpoint through nested blocks") {
  const FrequencyVector omega = FrequencyVector::golden();
  // B1 (radius 2 at 12) sits inside B2 (built at the same center, size 8)
  const BlockFamily fam1 = build_block_family(1, 1, {hs(2 * 12)}, {}, 2, 0, omega, 0.17, nullptr);
  const BlockFamily fam2 =
      build_block_family(1, 2, {hs(2 * 12)}, {fam1}, 8, 2, omega, 0.17, nullptr);
  const LatticeRegion lambda = LatticeRegion::box(1, Site{}, 10);  // meets B1 at site 10
  const LatticeRegion enc = enclose_region(lambda, {fam1, fam2}, 8);
  CHECK(enc.contains_all(fam1.blocks[0].sites));
  CHECK(enc.contains_all(fam2.blocks[0].sites));

  // independent fixpoint oracle: keep absorbing whole blocks until stable
  std::set<Site> acc(lambda.sites().begin(), lambda.sites().end());
  bool grew = true;
  while (grew) {
    grew = false;
    for (const BlockFamily* f : {&fam1, &fam2})
      for (const auto& b : f->blocks) {
        bool touch = false, inside = true;
        for (const auto& s : b.sites.sites()) {
          if (acc.count(s))
            touch = true;
          else
            inside = false;
        }
        if (touch && !inside) {
          for (const auto& s : b.sites.sites()) acc.insert(s);
          grew = true;
        }
      }
  }
  CHECK(enc == LatticeRegion(1, std::vector<Site>(acc.begin(), acc.end())));
  // minimality: the enclosure adds nothing beyond lambda and whole blocks
  for (const auto& s : enc.sites()) {
    const bool in_lambda = lambda.contains(s);
    const bool in_b1 = fam1.blocks[0].sites.contains(s);
    const bool in_b2 = fam2.blocks[0].sites.contains(s);
    CHECK((in_lambda || in_b1 || in_b2));
  }
}

TEST_CASE("enclosure budget violations raise") {
  const FrequencyVector omega = FrequencyVector::golden();
  const BlockFamily fam = build_block_family(1, 1, {hs(2 * 12)}, {}, 3, 0, omega, 0.17, nullptr);
  const LatticeRegion lambda = LatticeRegion::box(1, Site{}, 10);
  // pad 0 leaves no budget for the absorbed block
  CHECK_THROWS_AS(enclose_region(lambda, {fam}, 0), std::runtime_error);
}

TEST_CASE("mirror image sign selection") {
  const FrequencyVector omega = FrequencyVector::golden();
  const double w = omega.component(0);

  // c = c_I maps to c_J by construction of the pair
  {
    const double theta_star = wrap_unit(-(3.0 + 10.0) * w / 2.0);  // makes (3,10) sum-resonant
    const MirrorImage mi = mirror_image(1, hs(2 * 3), hs(2 * 3), hs(2 * 10), theta_star, omega,
                                        1e-4);
    CHECK(mi.mirror2 == hs(2 * 10));
    CHECK(mi.achieved <= 1e-12);
    CHECK(mi.sign == +1);
  }
  // exact symmetry: theta* = -(c + c~) omega / 2 gives distance 0
  {
    const double theta_star = wrap_unit(-(5.0 + 12.0) * w / 2.0);
    const MirrorImage mi =
        mirror_image(1, hs(2 * 5), hs(2 * 5), hs(2 * 12), theta_star, omega, 1e-6);
    CHECK(mi.achieved <= 1e-12);
    CHECK(mi.sign == +1);
  }
  // neither sign within the bound raises
  {
    FrequencyVector quarter(1, {0.25}, 2.5, 1e-9);
    CHECK_THROWS_AS(mirror_image(1, hs(0), hs(0), hs(2 * 1), 0.2, quarter, 1e-8),
                    std::runtime_error);
  }
}
