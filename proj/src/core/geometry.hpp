#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Finite lattice regions of Z^d with a deterministic site ordering, plus the
// boundary-pair enumeration needed by every resolvent-identity step.
//
// Centers produced by the midpoint construction can have half-integer
// coordinates, so points that may sit between lattice sites are carried in
// doubled coordinates (every component multiplied by 2). Sites themselves
// are always integer.

namespace qpmsa {

inline constexpr int kMaxDim = 4;

using Site = std::array<int, kMaxDim>;   // unused trailing components are 0
using HalfSite = std::array<int, kMaxDim>;  // doubled coordinates: point = value/2

Site make_site(std::initializer_list<int> xs);
HalfSite doubled(const Site& s);
bool is_integral(const HalfSite& h);
Site to_site(const HalfSite& h);  // requires is_integral

int l1_norm(const Site& a, int dim);
int l1_dist(const Site& a, const Site& b, int dim);
int linf_norm(const Site& a, int dim);
// l1 distance between doubled points, itself in doubled units (2x true distance).
int l1_dist2(const HalfSite& a, const HalfSite& b, int dim);
// 2*dist(site, half-point)
int l1_dist2_site(const Site& a, const HalfSite& b, int dim);

std::string site_to_string(const Site& s, int dim);
std::string half_to_string(const HalfSite& h, int dim);

class LatticeRegion {
 public:
  LatticeRegion() = default;
  // Sorts lexicographically; throws std::invalid_argument on duplicates or
  // empty input.
  LatticeRegion(int dim, std::vector<Site> sites);

  // Axis-aligned box {x : |x_i - c_i| <= radius for all i}.
  static LatticeRegion box(int dim, const Site& center, int radius);
  // l1 ball {x : ||x - c||_1 <= radius}.
  static LatticeRegion ball(int dim, const Site& center, int radius);
  // l1 ball around a possibly half-integer center; radius2 is doubled
  // (sites k with 2*||k - c||_1 <= radius2).
  static LatticeRegion ball_half(int dim, const HalfSite& center2, int radius2);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(sites_.size()); }
  const std::vector<Site>& sites() const { return sites_; }
  const Site& site(int i) const { return sites_[i]; }

  // Row index of a site, or nullopt when absent. The map is a bijection onto
  // 0..size()-1 by construction.
  std::optional<int> index_of(const Site& s) const;
  bool contains(const Site& s) const { return index_of(s).has_value(); }
  bool contains_all(const LatticeRegion& other) const;
  bool intersects(const LatticeRegion& other) const;

  LatticeRegion united(const LatticeRegion& other) const;
  LatticeRegion minus(const LatticeRegion& other) const;
  LatticeRegion intersected(const LatticeRegion& other) const;

  bool operator==(const LatticeRegion& other) const {
    return dim_ == other.dim_ && sites_ == other.sites_;
  }

 private:
  int dim_ = 0;
  std::vector<Site> sites_;
};

struct BoundaryCoupling {
  // (z, z') with z in the inner region, z' adjacent to z, outside inner but
  // inside the ambient region. Every pair satisfies ||z - z'||_1 = 1.
  std::vector<std::pair<Site, Site>> pairs;
};

// Throws std::invalid_argument unless inner is a subset of ambient.
BoundaryCoupling boundary_coupling(const LatticeRegion& inner,
                                   const LatticeRegion& ambient);

}  // namespace qpmsa
