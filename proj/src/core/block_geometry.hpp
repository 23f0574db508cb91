#pragma once

#include <optional>
#include <vector>

#include "core/geometry.hpp"
#include "core/torus.hpp"

// Resonant-block constructions: symmetric translation-invariant blocks that
// absorb every earlier-stage block they touch, and good-set enclosures of
// arbitrary regions. Centers are carried in doubled coordinates so that the
// midpoint construction stays in exact integer arithmetic.

namespace qpmsa {

struct ResonantBlock {
  HalfSite center2{};  // doubled coordinates
  LatticeRegion sites;
  int stage = 0;
};

struct BlockFamily {
  int stage = 0;
  long long block_size = 0;  // the size parameter l of this stage's blocks
  std::vector<ResonantBlock> blocks;
  // shared offset template: 2*site - center2, identical across blocks
  std::vector<HalfSite> template_offsets2;

  bool empty() const { return blocks.empty(); }
};

struct BlockBuildDiagnostics {
  std::vector<int> absorption_counts;  // t_r per absorbed prior stage, top down
  int padding_used = 0;                // max dist of final template from the base ball
};

// The absorption iteration: start from the l1 ball of radius base_size around
// the first center, repeatedly absorb the 2*l_m neighborhoods of the relative
// prior-center positions that touch it (prior stages top down), then translate
// the resulting template to every center. Throws std::runtime_error when an
// absorption chain exceeds 10 steps, when the 50*pad budget is exceeded, or
// when the produced blocks overlap or fail to absorb a prior block they touch.
//
// prior_families must be ordered by stage (1..n); pad is the size parameter of
// the top prior stage (unused when there are no priors).
BlockFamily build_block_family(int dim, int stage, const std::vector<HalfSite>& centers2,
                               const std::vector<BlockFamily>& prior_families,
                               long long base_size, long long pad,
                               const FrequencyVector& omega, double theta_star,
                               BlockBuildDiagnostics* diag = nullptr);

// Smallest fixpoint enlargement of lambda that contains every block (of any
// listed family) it intersects. Throws when the result leaves the 50*pad
// distance budget around lambda.
LatticeRegion enclose_region(const LatticeRegion& lambda,
                             const std::vector<BlockFamily>& families, long long pad);

struct MirrorImage {
  HalfSite mirror2{};
  int sign = +1;              // mirror = c + sign * (c_J - c_I)
  double achieved = 0.0;      // ||2 theta* + (c + mirror).omega||
  bool ambiguous = false;     // both signs met the bound; smaller distance chosen
};

// Mirror image c~ = c +/- (c_J - c_I) with the sign fixed by
// ||2 theta* + (c + c~).omega|| <= 6 sqrt(delta). Throws std::runtime_error
// when neither sign satisfies the bound.
MirrorImage mirror_image(int dim, const HalfSite& c2, const HalfSite& ci2, const HalfSite& cj2,
                         double theta_star, const FrequencyVector& omega, double delta);

}  // namespace qpmsa
