#include "core/block_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qpmsa {

namespace {

HalfSite add2(const HalfSite& a, const HalfSite& b) {
  HalfSite out{};
  for (int i = 0; i < kMaxDim; ++i) out[i] = a[i] + b[i];
  return out;
}

HalfSite sub2(const HalfSite& a, const HalfSite& b) {
  HalfSite out{};
  for (int i = 0; i < kMaxDim; ++i) out[i] = a[i] - b[i];
  return out;
}

bool same_parity(const HalfSite& a, const HalfSite& b) {
  for (int i = 0; i < kMaxDim; ++i)
    if (((a[i] - b[i]) % 2 + 2) % 2 != 0) return false;
  return true;
}

// set-of-sites workhorse for the absorption iteration
using SiteSet = std::set<Site>;

bool ball_touches(const SiteSet& j, int dim, const HalfSite& h2, long long radius) {
  // dist(h, J) <= radius  <=>  exists k in J with 2*||k - h||_1 <= 2*radius
  for (const auto& k : j)
    if (l1_dist2_site(k, h2, dim) <= 2 * radius) return true;
  return false;
}

void ball_insert(SiteSet& j, int dim, const HalfSite& h2, long long radius) {
  LatticeRegion ball = LatticeRegion::ball_half(dim, h2, static_cast<int>(2 * radius));
  for (const auto& s : ball.sites()) j.insert(s);
}

bool ball_inside(const SiteSet& j, int dim, const HalfSite& h2, long long radius) {
  LatticeRegion ball = LatticeRegion::ball_half(dim, h2, static_cast<int>(2 * radius));
  for (const auto& s : ball.sites())
    if (!j.count(s)) return false;
  return true;
}

}  // namespace

BlockFamily build_block_family(int dim, int stage, const std::vector<HalfSite>& centers2,
                               const std::vector<BlockFamily>& prior_families,
                               long long base_size, long long pad,
                               const FrequencyVector& omega, double theta_star,
                               BlockBuildDiagnostics* diag) {
  if (centers2.empty()) throw std::invalid_argument("build_block_family: no centers");
  if (base_size < 1) throw std::invalid_argument("build_block_family: base size must be >= 1");
  for (const auto& c : centers2)
    if (!same_parity(c, centers2.front()))
      throw std::runtime_error("build_block_family: centers are not an integer translate family");
  for (size_t i = 0; i < prior_families.size(); ++i)
    if (prior_families[i].stage != static_cast<int>(i) + 1)
      throw std::invalid_argument("build_block_family: prior families must be stages 1..n in order");

  const HalfSite k0 = centers2.front();
  SiteSet j;
  {
    LatticeRegion base = LatticeRegion::ball_half(dim, k0, static_cast<int>(2 * base_size));
    j.insert(base.sites().begin(), base.sites().end());
  }

  BlockBuildDiagnostics local;
  BlockBuildDiagnostics* dg = diag ? diag : &local;
  dg->absorption_counts.clear();

  // absorb prior stages top down: r = 0 -> stage n, r = n-1 -> stage 1
  const int n_prior = static_cast<int>(prior_families.size());
  for (int r = 0; r < n_prior; ++r) {
    const BlockFamily& fam = prior_families[n_prior - 1 - r];
    const long long l_m = fam.block_size;
    // H_r = (k0 - P_{n+1} + P_m) u (k0 + P_{n+1} - P_m), deduplicated,
    // iterated in lexicographic order
    std::set<HalfSite> h_r;
    for (const auto& c : centers2) {
      for (const auto& b : fam.blocks) {
        h_r.insert(add2(sub2(k0, c), b.center2));
        h_r.insert(sub2(add2(k0, c), b.center2));
      }
    }
    int t_r = 0;
    while (true) {
      std::vector<HalfSite> touching;
      for (const auto& h : h_r)
        if (ball_touches(j, dim, h, 2 * l_m) && !ball_inside(j, dim, h, 2 * l_m))
          touching.push_back(h);
      if (touching.empty()) break;
      for (const auto& h : touching) ball_insert(j, dim, h, 2 * l_m);
      ++t_r;
      if (t_r >= 10)
        throw std::runtime_error(
            "build_block_family: absorption chain reached 10 steps at prior stage " +
            std::to_string(fam.stage) + " (separation preconditions violated)");
    }
    dg->absorption_counts.push_back(t_r);
  }

  // padding budget: the template must stay within base_size + 50*pad of k0
  long long worst = 0;
  for (const auto& s : j) worst = std::max<long long>(worst, l1_dist2_site(s, k0, dim) / 2);
  dg->padding_used = static_cast<int>(worst - base_size);
  if (!prior_families.empty() && worst > base_size + 50 * pad)
    throw std::runtime_error("build_block_family: 50*l_n padding budget exceeded (used " +
                             std::to_string(worst - base_size) + ", budget " +
                             std::to_string(50 * pad) + ")");

  // template offsets (doubled), symmetric about k0 by construction
  BlockFamily fam;
  fam.stage = stage;
  fam.block_size = base_size;
  for (const auto& s : j) fam.template_offsets2.push_back(sub2(doubled(s), k0));
  std::sort(fam.template_offsets2.begin(), fam.template_offsets2.end());

  for (const auto& c : centers2) {
    std::vector<Site> sites;
    sites.reserve(fam.template_offsets2.size());
    for (const auto& off : fam.template_offsets2) sites.push_back(to_site(add2(c, off)));
    ResonantBlock blk{c, LatticeRegion(dim, std::move(sites)), stage};
    fam.blocks.push_back(std::move(blk));
  }

  // verify symmetry about the center
  for (const auto& b : fam.blocks) {
    for (const auto& x : b.sites.sites()) {
      Site rx = to_site(sub2(b.center2, sub2(doubled(x), b.center2)));
      if (!b.sites.contains(rx))
        throw std::runtime_error("build_block_family: symmetry violated at " +
                                 site_to_string(x, dim));
    }
  }
  // verify pairwise disjointness
  for (size_t a = 0; a < fam.blocks.size(); ++a)
    for (size_t b = a + 1; b < fam.blocks.size(); ++b)
      if (fam.blocks[a].sites.intersects(fam.blocks[b].sites)) {
        std::ostringstream os;
        os << "build_block_family: blocks overlap at centers "
           << half_to_string(fam.blocks[a].center2, dim) << " and "
           << half_to_string(fam.blocks[b].center2, dim) << " (resonance m = "
           << std::min(torus_norm(omega.dot_half(sub2(fam.blocks[a].center2, fam.blocks[b].center2))),
                       torus_norm(2 * theta_star +
                                  omega.dot_half(add2(fam.blocks[a].center2, fam.blocks[b].center2))))
           << ")";
        throw std::runtime_error(os.str());
      }
  // verify absorption of every prior block
  for (const auto& pf : prior_families)
    for (const auto& pb : pf.blocks)
      for (const auto& nb : fam.blocks)
        if (pb.sites.intersects(nb.sites) && !nb.sites.contains_all(pb.sites))
          throw std::runtime_error("build_block_family: stage-" + std::to_string(pf.stage) +
                                   " block at " + half_to_string(pb.center2, dim) +
                                   " straddles the boundary of the block at " +
                                   half_to_string(nb.center2, dim));
  return fam;
}

LatticeRegion enclose_region(const LatticeRegion& lambda,
                             const std::vector<BlockFamily>& families, long long pad) {
  SiteSet acc(lambda.sites().begin(), lambda.sites().end());
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& fam : families) {
      for (const auto& b : fam.blocks) {
        bool touches = false, inside = true;
        for (const auto& s : b.sites.sites()) {
          if (acc.count(s))
            touches = true;
          else
            inside = false;
        }
        if (touches && !inside) {
          acc.insert(b.sites.sites().begin(), b.sites.sites().end());
          grew = true;
        }
      }
    }
  }
  // budget: dist(k, lambda) <= 50*pad for every added site
  for (const auto& s : acc) {
    long long best = std::numeric_limits<long long>::max();
    for (const auto& t : lambda.sites())
      best = std::min<long long>(best, l1_dist(s, t, lambda.dim()));
    if (best > 50 * pad)
      throw std::runtime_error("enclose_region: 50*l_n distance budget exceeded at " +
                               site_to_string(s, lambda.dim()));
  }
  return LatticeRegion(lambda.dim(), std::vector<Site>(acc.begin(), acc.end()));
}

MirrorImage mirror_image(int dim, const HalfSite& c2, const HalfSite& ci2, const HalfSite& cj2,
                         double theta_star, const FrequencyVector& omega, double delta) {
  const HalfSite delta2 = sub2(cj2, ci2);
  const double bound = 6.0 * std::sqrt(delta);
  MirrorImage out;
  double best = std::numeric_limits<double>::infinity();
  int n_ok = 0;
  for (int sign : {+1, -1}) {
    HalfSite cand{};
    for (int i = 0; i < kMaxDim; ++i) cand[i] = c2[i] + sign * delta2[i];
    const double m = torus_norm(2.0 * theta_star + omega.dot_half(add2(c2, cand)));
    if (m <= bound) ++n_ok;
    if (m < best) {
      best = m;
      out.mirror2 = cand;
      out.sign = sign;
      out.achieved = m;
    }
  }
  if (n_ok == 0)
    throw std::runtime_error("mirror_image: neither sign satisfies the 6*sqrt(delta) bound at " +
                             half_to_string(c2, dim) + " (best " + std::to_string(best) + ")");
  out.ambiguous = n_ok == 2;
  return out;
}

}  // namespace qpmsa
